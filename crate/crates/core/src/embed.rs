//! Graph-based optimization of feature embeddings.
//!
//! Two optimizers refine the initial binned embeddings `L` over the feature
//! correlation graph and return `L_o`:
//!
//! * [`retrofit`] pulls each feature towards its original vector and towards
//!   its graph neighbours (Gauss–Seidel coordinate descent on a convex
//!   quadratic).
//! * [`transe_train`] treats features as entities of a knowledge graph with
//!   one translation vector per correlation relation and trains them with a
//!   margin ranking loss against corrupted triples. Entities start from `L`,
//!   never from random vectors.

use std::collections::HashSet;

use ndarray::{Array2, ArrayView1};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::binning::FeatureEmbeddingMatrix;
use crate::error::{Error, Result};
use crate::graph::{CorrelationGraph, Relation, Triple, TripleSet};

// ---------------------------------------------------------------------------
// Retrofitting
// ---------------------------------------------------------------------------

/// Neighbour weight `β_ij`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaMode {
    /// `β_ij = 1 / deg(i)`.
    InverseDegree,
    /// The same weight on every edge.
    Uniform(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RetrofitConfig {
    pub alpha: f64,
    pub beta: BetaMode,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for RetrofitConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: BetaMode::InverseDegree,
            max_iters: 10,
            tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrofitOutcome {
    pub embeddings: FeatureEmbeddingMatrix,
    /// Objective before the first sweep and after every sweep.
    pub objective_trace: Vec<f64>,
    pub sweeps: usize,
}

struct RetrofitWeights {
    neighbours: Vec<Vec<usize>>,
    /// `β_ij` in the same layout as `neighbours`.
    beta: Vec<Vec<f64>>,
    /// Per-node scale on the anchor term, chosen so `w_i β_ij` is symmetric.
    anchor_scale: Vec<f64>,
    /// Symmetric pair weight `w_i β_ij`, one per undirected edge.
    edges: Vec<(usize, usize, f64)>,
}

fn retrofit_weights(g: &CorrelationGraph, cfg: &RetrofitConfig) -> RetrofitWeights {
    let neighbours = g.adjacency();
    let (beta, anchor_scale): (Vec<Vec<f64>>, Vec<f64>) = neighbours
        .iter()
        .map(|nb| match cfg.beta {
            BetaMode::Uniform(b) => (vec![b; nb.len()], 1.0),
            BetaMode::InverseDegree => {
                let deg = nb.len().max(1) as f64;
                (vec![1.0 / deg; nb.len()], deg)
            }
        })
        .unzip();
    let edges = g
        .edges
        .iter()
        .map(|e| {
            let w = match cfg.beta {
                BetaMode::Uniform(b) => b,
                BetaMode::InverseDegree => 1.0,
            };
            (e.i, e.j, w)
        })
        .collect();
    RetrofitWeights {
        neighbours,
        beta,
        anchor_scale,
        edges,
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn columns_of(m: &Array2<f64>) -> Vec<Vec<f64>> {
    m.columns().into_iter().map(|c| c.to_vec()).collect()
}

fn matrix_from_columns(cols: &[Vec<f64>], rows: usize) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols.len()), |(p, j)| cols[j][p])
}

/// Retrofitting objective
///
/// `Ψ(Q) = Σ_i w_i α ‖q_i − q̂_i‖² + Σ_{edges (i,j)} w_i β_ij ‖q_i − q_j‖²`
///
/// with each undirected edge counted once. `w_i = 1` for uniform weights and
/// `w_i = deg(i)` for inverse-degree weights, which makes `w_i β_ij`
/// symmetric; the coordinate update used by [`retrofit`] is then the exact
/// minimizer of `Ψ` in `q_i`.
pub fn retrofit_objective(
    current: &FeatureEmbeddingMatrix,
    original: &FeatureEmbeddingMatrix,
    g: &CorrelationGraph,
    cfg: &RetrofitConfig,
) -> f64 {
    let q = columns_of(&current.matrix);
    let q_hat = columns_of(&original.matrix);
    objective_of(&q, &q_hat, &retrofit_weights(g, cfg), cfg.alpha)
}

fn objective_of(q: &[Vec<f64>], q_hat: &[Vec<f64>], w: &RetrofitWeights, alpha: f64) -> f64 {
    let anchor: f64 = (0..q.len())
        .map(|i| w.anchor_scale[i] * alpha * sq_dist(&q[i], &q_hat[i]))
        .sum();
    let pull: f64 = w
        .edges
        .iter()
        .map(|&(i, j, s)| s * sq_dist(&q[i], &q[j]))
        .sum();
    anchor + pull
}

/// Gauss–Seidel sweeps of
/// `q_i ← (α q̂_i + Σ_j β_ij q_j) / (α + Σ_j β_ij)` in node order.
///
/// Stops after `max_iters` sweeps or once no entry moved by `tol` or more.
/// Isolated features keep their original vectors.
pub fn retrofit(
    l: &FeatureEmbeddingMatrix,
    g: &CorrelationGraph,
    cfg: &RetrofitConfig,
) -> Result<RetrofitOutcome> {
    if g.num_nodes() != l.num_features() {
        return Err(Error::Dimension {
            context: "retrofit graph nodes",
            expected: l.num_features(),
            actual: g.num_nodes(),
        });
    }
    if g.has_negative_edges() {
        return Err(Error::config(
            "retrofitting accepts positive-correlation edges only",
        ));
    }
    if !(cfg.alpha >= 0.0) || !cfg.alpha.is_finite() {
        return Err(Error::config(format!(
            "alpha must be non-negative, got {}",
            cfg.alpha
        )));
    }
    if let BetaMode::Uniform(b) = cfg.beta {
        if !(b > 0.0) {
            return Err(Error::config(format!(
                "uniform beta must be positive, got {b}"
            )));
        }
    }
    if !(cfg.tol > 0.0) {
        return Err(Error::config("retrofit tolerance must be positive"));
    }
    let w = retrofit_weights(g, cfg);
    if cfg.alpha == 0.0 {
        if let Some(i) = w.neighbours.iter().position(Vec::is_empty) {
            return Err(Error::config(format!(
                "alpha = 0 leaves isolated feature '{}' undetermined",
                g.nodes[i]
            )));
        }
    }

    let q_hat = columns_of(&l.matrix);
    let mut q = q_hat.clone();
    let dim = l.dim();
    let mut trace = vec![objective_of(&q, &q_hat, &w, cfg.alpha)];
    let mut sweeps = 0;
    let mut next = vec![0.0; dim];
    for _ in 0..cfg.max_iters {
        sweeps += 1;
        let mut max_change: f64 = 0.0;
        for i in 0..q.len() {
            let nb = &w.neighbours[i];
            if nb.is_empty() {
                continue;
            }
            let beta_sum: f64 = w.beta[i].iter().sum();
            let denom = cfg.alpha + beta_sum;
            for (p, out) in next.iter_mut().enumerate() {
                let mut acc = cfg.alpha * q_hat[i][p];
                for (&j, &b) in nb.iter().zip(&w.beta[i]) {
                    acc += b * q[j][p];
                }
                *out = acc / denom;
            }
            for (old, &new) in q[i].iter_mut().zip(&next) {
                max_change = max_change.max((new - *old).abs());
                *old = new;
            }
        }
        trace.push(objective_of(&q, &q_hat, &w, cfg.alpha));
        if max_change < cfg.tol {
            break;
        }
    }
    Ok(RetrofitOutcome {
        embeddings: FeatureEmbeddingMatrix::new(
            matrix_from_columns(&q, dim),
            l.feature_names.clone(),
        )?,
        objective_trace: trace,
        sweeps,
    })
}

// ---------------------------------------------------------------------------
// TransE
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Norm {
    L1,
    L2,
}

impl Norm {
    fn of(self, d: &[f64]) -> f64 {
        match self {
            Norm::L1 => d.iter().map(|v| v.abs()).sum(),
            Norm::L2 => d.iter().map(|v| v * v).sum::<f64>().sqrt(),
        }
    }

    /// Subgradient of the norm at `d`; zero coordinates (L1) and the zero
    /// vector (L2) get 0.
    fn grad(self, d: &[f64]) -> Vec<f64> {
        match self {
            Norm::L1 => d
                .iter()
                .map(|&v| {
                    if v > 0.0 {
                        1.0
                    } else if v < 0.0 {
                        -1.0
                    } else {
                        0.0
                    }
                })
                .collect(),
            Norm::L2 => {
                let n = self.of(d);
                if n == 0.0 {
                    vec![0.0; d.len()]
                } else {
                    d.iter().map(|v| v / n).collect()
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransEMode {
    /// Per-triple SGD over shuffled triples with sampled corruptions.
    #[default]
    Sgd,
    /// One gradient step per epoch on the mean loss over every triple and
    /// every admissible corruption of it.
    FullBatch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransEConfig {
    pub margin: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub norm: Norm,
    pub neg_samples_per_triple: usize,
    pub renormalize_entities: bool,
    pub mode: TransEMode,
    /// Set from the experiment seed by the pipeline, never read from config.
    #[serde(skip)]
    pub seed: u64,
}

impl Default for TransEConfig {
    fn default() -> Self {
        Self {
            margin: 1.0,
            learning_rate: 0.01,
            epochs: 100,
            norm: Norm::L2,
            neg_samples_per_triple: 1,
            renormalize_entities: false,
            mode: TransEMode::Sgd,
            seed: 0,
        }
    }
}

/// One translation vector per relation in the vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationVectors {
    pub relations: Vec<Relation>,
    /// `relations.len() × M`.
    pub vectors: Array2<f64>,
}

impl RelationVectors {
    pub fn get(&self, relation: Relation) -> Option<ArrayView1<'_, f64>> {
        self.relations
            .iter()
            .position(|&r| r == relation)
            .map(|i| self.vectors.row(i))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransEOutcome {
    pub embeddings: FeatureEmbeddingMatrix,
    pub relations: RelationVectors,
    /// Mean hinge loss per epoch.
    pub loss_trace: Vec<f64>,
}

fn check_dims(h: &[f64], r: &[f64], t: &[f64]) -> Result<()> {
    for (len, ctx) in [(r.len(), "relation vector"), (t.len(), "tail vector")] {
        if len != h.len() {
            return Err(Error::Dimension {
                context: ctx,
                expected: h.len(),
                actual: len,
            });
        }
    }
    Ok(())
}

fn translation(h: &[f64], r: &[f64], t: &[f64]) -> Vec<f64> {
    h.iter()
        .zip(r)
        .zip(t)
        .map(|((a, b), c)| a + b - c)
        .collect()
}

/// `‖h + r − t‖`.
pub fn transe_score(h: &[f64], r: &[f64], t: &[f64], norm: Norm) -> Result<f64> {
    check_dims(h, r, t)?;
    Ok(norm.of(&translation(h, r, t)))
}

/// `1 − ‖h + r − t‖`, the score used for negative-correlation triples.
pub fn transe_score_negcorr(h: &[f64], r: &[f64], t: &[f64], norm: Norm) -> Result<f64> {
    Ok(1.0 - transe_score(h, r, t, norm)?)
}

fn score_of(relation: Relation, d: &[f64], norm: Norm) -> f64 {
    match relation {
        Relation::PosCorr => norm.of(d),
        Relation::NegCorr => 1.0 - norm.of(d),
    }
}

fn score_grad(relation: Relation, d: &[f64], norm: Norm) -> Vec<f64> {
    let g = norm.grad(d);
    match relation {
        Relation::PosCorr => g,
        Relation::NegCorr => g.into_iter().map(|v| -v).collect(),
    }
}

/// Hinge term for one (positive, corrupted) pair and its gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct HingeGradient {
    pub loss: f64,
    /// `(entity, ∂loss/∂entity)`; an entity may appear more than once.
    pub entities: Vec<(usize, Vec<f64>)>,
    pub relation: Vec<f64>,
}

/// `max(0, margin + f(h, r, t) − f(h', r, t'))` where `f` is the relation's
/// score function.
pub fn hinge_loss(
    entities: &[Vec<f64>],
    relation_vec: &[f64],
    positive: Triple,
    corrupted: Triple,
    margin: f64,
    norm: Norm,
) -> f64 {
    let dp = translation(
        &entities[positive.head],
        relation_vec,
        &entities[positive.tail],
    );
    let dn = translation(
        &entities[corrupted.head],
        relation_vec,
        &entities[corrupted.tail],
    );
    let rel = positive.relation;
    (margin + score_of(rel, &dp, norm) - score_of(rel, &dn, norm)).max(0.0)
}

pub fn hinge_gradient(
    entities: &[Vec<f64>],
    relation_vec: &[f64],
    positive: Triple,
    corrupted: Triple,
    margin: f64,
    norm: Norm,
) -> HingeGradient {
    let dp = translation(
        &entities[positive.head],
        relation_vec,
        &entities[positive.tail],
    );
    let dn = translation(
        &entities[corrupted.head],
        relation_vec,
        &entities[corrupted.tail],
    );
    let rel = positive.relation;
    let loss = margin + score_of(rel, &dp, norm) - score_of(rel, &dn, norm);
    if loss <= 0.0 {
        return HingeGradient {
            loss: 0.0,
            entities: Vec::new(),
            relation: vec![0.0; relation_vec.len()],
        };
    }
    let gp = score_grad(rel, &dp, norm);
    let gn = score_grad(rel, &dn, norm);
    let neg = |v: &[f64]| v.iter().map(|x| -x).collect::<Vec<_>>();
    let relation = gp.iter().zip(&gn).map(|(a, b)| a - b).collect();
    HingeGradient {
        loss,
        entities: vec![
            (positive.head, gp.clone()),
            (positive.tail, neg(&gp)),
            (corrupted.head, neg(&gn)),
            (corrupted.tail, gn),
        ],
        relation,
    }
}

/// Replaces the head (probability ½) or the tail with a uniformly chosen
/// different entity. Corruptions that are self-loops or known triples are
/// resampled up to 100 times; the last draw is then accepted as is.
pub fn corrupt_triple<R: Rng + ?Sized>(
    triple: Triple,
    n_entities: usize,
    known: &HashSet<Triple>,
    rng: &mut R,
) -> Triple {
    assert!(n_entities >= 2, "corruption needs at least two entities");
    let mut candidate = triple;
    for _ in 0..100 {
        let replace_head = rng.random_bool(0.5);
        let current = if replace_head {
            triple.head
        } else {
            triple.tail
        };
        let mut e = rng.random_range(0..n_entities - 1);
        if e >= current {
            e += 1;
        }
        candidate = if replace_head {
            Triple { head: e, ..triple }
        } else {
            Triple { tail: e, ..triple }
        };
        if candidate.head != candidate.tail && !known.contains(&candidate) {
            return candidate;
        }
    }
    candidate
}

fn all_corruptions(triple: Triple, n_entities: usize, known: &HashSet<Triple>) -> Vec<Triple> {
    let mut out = Vec::new();
    for e in 0..n_entities {
        if e != triple.head {
            out.push(Triple { head: e, ..triple });
        }
        if e != triple.tail {
            out.push(Triple { tail: e, ..triple });
        }
    }
    out.retain(|c| c.head != c.tail && !known.contains(c));
    out
}

/// Trains entity and relation vectors with the margin ranking loss.
///
/// Entities are the columns of `l`. Relation vectors start uniform in
/// `[−6/√M, 6/√M]`. Entities that appear in no triple are never updated,
/// even when drawn as a corruption.
pub fn transe_train(
    l: &FeatureEmbeddingMatrix,
    triples: &TripleSet,
    cfg: &TransEConfig,
) -> Result<TransEOutcome> {
    if triples.is_empty() {
        return Err(Error::data("TransE needs at least one triple"));
    }
    if !(cfg.margin > 0.0) || !(cfg.learning_rate > 0.0) || cfg.neg_samples_per_triple == 0 {
        return Err(Error::config(
            "TransE margin, learning rate and negative samples must be positive",
        ));
    }
    let n_entities = l.num_features();
    if let Some(t) = triples
        .triples
        .iter()
        .find(|t| t.head >= n_entities || t.tail >= n_entities || t.head == t.tail)
    {
        return Err(Error::data(format!(
            "invalid triple {t:?} for {n_entities} entities"
        )));
    }
    let dim = l.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut vocab: Vec<Relation> = vec![Relation::PosCorr];
    if triples.count(Relation::NegCorr) > 0 {
        vocab.push(Relation::NegCorr);
    }
    let bound = 6.0 / (dim as f64).sqrt();
    let mut relations: Vec<Vec<f64>> = vocab
        .iter()
        .map(|_| (0..dim).map(|_| rng.random_range(-bound..=bound)).collect())
        .collect();
    let rel_slot = |r: Relation| vocab.iter().position(|&v| v == r).expect("in vocabulary");

    let mut entities = columns_of(&l.matrix);
    let active: HashSet<usize> = triples.entities().into_iter().collect();
    let known: HashSet<Triple> = triples.triples.iter().copied().collect();
    let mut order: Vec<Triple> = triples.triples.clone();
    let mut loss_trace = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        if cfg.renormalize_entities {
            for &e in &active {
                let n = Norm::L2.of(&entities[e]);
                if n > 0.0 {
                    entities[e].iter_mut().for_each(|v| *v /= n);
                }
            }
        }
        let mean_loss = match cfg.mode {
            TransEMode::Sgd => {
                order.shuffle(&mut rng);
                let mut total = 0.0;
                let mut count = 0usize;
                for &pos in &order {
                    let slot = rel_slot(pos.relation);
                    for _ in 0..cfg.neg_samples_per_triple {
                        let neg = corrupt_triple(pos, n_entities, &known, &mut rng);
                        let g = hinge_gradient(
                            &entities,
                            &relations[slot],
                            pos,
                            neg,
                            cfg.margin,
                            cfg.norm,
                        );
                        total += g.loss;
                        count += 1;
                        apply_step(
                            &mut entities,
                            &mut relations[slot],
                            &g,
                            &active,
                            cfg.learning_rate,
                        );
                    }
                }
                total / count as f64
            }
            TransEMode::FullBatch => {
                let mut ent_grad = vec![vec![0.0; dim]; n_entities];
                let mut rel_grad = vec![vec![0.0; dim]; vocab.len()];
                let mut total = 0.0;
                let mut count = 0usize;
                for &pos in &triples.triples {
                    let slot = rel_slot(pos.relation);
                    for neg in all_corruptions(pos, n_entities, &known) {
                        let g = hinge_gradient(
                            &entities,
                            &relations[slot],
                            pos,
                            neg,
                            cfg.margin,
                            cfg.norm,
                        );
                        total += g.loss;
                        count += 1;
                        for (e, ge) in &g.entities {
                            for (a, b) in ent_grad[*e].iter_mut().zip(ge) {
                                *a += b;
                            }
                        }
                        for (a, b) in rel_grad[slot].iter_mut().zip(&g.relation) {
                            *a += b;
                        }
                    }
                }
                if count > 0 {
                    let scale = cfg.learning_rate / count as f64;
                    for &e in &active {
                        for (v, gv) in entities[e].iter_mut().zip(&ent_grad[e]) {
                            *v -= scale * gv;
                        }
                    }
                    for (r, gr) in relations.iter_mut().zip(&rel_grad) {
                        for (v, gv) in r.iter_mut().zip(gr) {
                            *v -= scale * gv;
                        }
                    }
                    total / count as f64
                } else {
                    0.0
                }
            }
        };
        if !mean_loss.is_finite() {
            return Err(Error::NonFinite {
                stage: "transe",
                epoch,
            });
        }
        loss_trace.push(mean_loss);
    }

    let rel_matrix = Array2::from_shape_fn((vocab.len(), dim), |(i, p)| relations[i][p]);
    Ok(TransEOutcome {
        embeddings: FeatureEmbeddingMatrix::new(
            matrix_from_columns(&entities, dim),
            l.feature_names.clone(),
        )?,
        relations: RelationVectors {
            relations: vocab,
            vectors: rel_matrix,
        },
        loss_trace,
    })
}

fn apply_step(
    entities: &mut [Vec<f64>],
    relation: &mut [f64],
    g: &HingeGradient,
    active: &HashSet<usize>,
    lr: f64,
) {
    if g.loss == 0.0 {
        return;
    }
    for (e, ge) in &g.entities {
        if !active.contains(e) {
            continue;
        }
        for (v, gv) in entities[*e].iter_mut().zip(ge) {
            *v -= lr * gv;
        }
    }
    for (v, gv) in relation.iter_mut().zip(&g.relation) {
        *v -= lr * gv;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, Sign};
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn graph(n: usize, edges: &[(usize, usize)]) -> CorrelationGraph {
        CorrelationGraph {
            nodes: (0..n).map(|i| format!("f{i}")).collect(),
            edges: edges
                .iter()
                .map(|&(i, j)| Edge {
                    i,
                    j,
                    sign: Sign::Positive,
                    r: 0.9,
                })
                .collect(),
            threshold: 0.7,
        }
    }

    fn fem(m: Array2<f64>) -> FeatureEmbeddingMatrix {
        let names = (0..m.ncols()).map(|j| format!("f{j}")).collect();
        FeatureEmbeddingMatrix::new(m, names).unwrap()
    }

    #[test]
    fn retrofit_without_edges_is_identity() {
        let l = fem(array![[0.1, 0.5], [0.7, 0.2]]);
        let out = retrofit(&l, &graph(2, &[]), &RetrofitConfig::default()).unwrap();
        assert_eq!(out.embeddings, l);
    }

    #[test]
    fn two_node_fixed_point() {
        // Stationarity of q1² + (q2 − 2)² + (q1 − q2)²:
        //   2 q1 − q2 = 0,  −q1 + 2 q2 = 2   ⇒  q = (2/3, 4/3), Ψ* = 4/3.
        let l = fem(array![[0.0, 2.0]]);
        let cfg = RetrofitConfig {
            alpha: 1.0,
            beta: BetaMode::Uniform(1.0),
            max_iters: 50,
            tol: 1e-14,
        };
        let out = retrofit(&l, &graph(2, &[(0, 1)]), &cfg).unwrap();
        assert_abs_diff_eq!(out.embeddings.matrix[[0, 0]], 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out.embeddings.matrix[[0, 1]], 4.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            *out.objective_trace.last().unwrap(),
            4.0 / 3.0,
            epsilon = 1e-12
        );
        for w in out.objective_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn retrofit_rejects_negative_edges_and_underdetermined() {
        let l = fem(array![[0.0, 1.0, 2.0]]);
        let mut g = graph(3, &[(0, 1)]);
        let cfg = RetrofitConfig {
            alpha: 0.0,
            ..Default::default()
        };
        assert!(retrofit(&l, &g, &cfg).is_err());
        g.edges[0].sign = Sign::Negative;
        assert!(retrofit(&l, &g, &RetrofitConfig::default()).is_err());
    }

    #[test]
    fn huge_alpha_barely_moves() {
        let l = fem(array![[0.0, 1.0, 0.3], [0.5, -1.0, 0.9]]);
        let cfg = RetrofitConfig {
            alpha: 1e9,
            ..Default::default()
        };
        let out = retrofit(&l, &graph(3, &[(0, 1), (1, 2)]), &cfg).unwrap();
        let max = (&out.embeddings.matrix - &l.matrix)
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(max < 1e-6);
    }

    #[test]
    fn scores() {
        let z = [0.0, 0.0];
        assert_eq!(
            transe_score(&[1.0, 2.0], &[1.0, 0.0], &[2.0, 2.0], Norm::L2).unwrap(),
            0.0
        );
        assert_eq!(transe_score(&z, &[1.0, 0.0], &z, Norm::L2).unwrap(), 1.0);
        assert_eq!(transe_score(&z, &[1.0, 1.0], &z, Norm::L1).unwrap(), 2.0);
        assert!(transe_score(&z, &[1.0], &z, Norm::L1).is_err());

        assert_eq!(
            transe_score_negcorr(&[1.0], &[1.0], &[2.0], Norm::L2).unwrap(),
            1.0
        );
        assert_eq!(
            transe_score_negcorr(&z, &[1.0, 0.0], &z, Norm::L2).unwrap(),
            0.0
        );
        assert_eq!(
            transe_score_negcorr(&z, &[2.5, 0.0], &z, Norm::L2).unwrap(),
            -1.5
        );
    }

    #[test]
    fn corruption_exhaustion_and_determinism() {
        let t = Triple {
            head: 0,
            relation: Relation::PosCorr,
            tail: 1,
        };
        let known: HashSet<Triple> = [t].into_iter().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        // Every corruption of a 2-entity graph is a self-loop; the fallback
        // returns the last draw after 100 attempts.
        let c = corrupt_triple(t, 2, &known, &mut rng);
        assert_eq!(c.head, c.tail);

        let a = corrupt_triple(t, 10, &known, &mut ChaCha8Rng::seed_from_u64(5));
        let b = corrupt_triple(t, 10, &known, &mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(a, b);
    }

    #[test]
    fn corruption_replaces_head_about_half_the_time() {
        let t = Triple {
            head: 0,
            relation: Relation::PosCorr,
            tail: 1,
        };
        let known: HashSet<Triple> = [t].into_iter().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let heads = (0..100)
            .filter(|_| corrupt_triple(t, 10, &known, &mut rng).head != 0)
            .count();
        // Two-sided binomial(100, ~0.5) at p > 0.001: within 50 ± 17.
        assert!((33..=67).contains(&heads), "{heads}");
    }

    #[test]
    fn inactive_hinge_leaves_embeddings() {
        // Entities 0,1 coincide (h + 0 = t). Every corruption pulls in a far
        // entity, so margin + f(pos) ≤ f(neg) for all of them.
        let l = fem(array![[0.0, 0.0, 100.0, -100.0]]);
        let triples = TripleSet {
            triples: vec![Triple {
                head: 0,
                relation: Relation::PosCorr,
                tail: 1,
            }],
        };
        let cfg = TransEConfig {
            epochs: 5,
            ..Default::default()
        };
        // The relation vector is random, so force the check through the
        // gradient directly with r = 0.
        let ents = columns_of(&l.matrix);
        for head in [2, 3] {
            let neg = Triple {
                head,
                ..triples.triples[0]
            };
            let g = hinge_gradient(&ents, &[0.0], triples.triples[0], neg, 1.0, Norm::L2);
            assert_eq!(g.loss, 0.0);
            assert!(g.entities.is_empty());
        }
        let out = transe_train(&l, &triples, &cfg).unwrap();
        // r starts within ±6 while entities 2,3 are 100 away: hinge stays off.
        assert_eq!(out.embeddings, l);
        assert!(out.loss_trace.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn isolated_entities_untouched() {
        let l = fem(Array2::from_shape_fn((6, 4), |(p, j)| {
            ((p * 7 + j * 3) % 5) as f64 * 0.1
        }));
        let triples = TripleSet {
            triples: vec![
                Triple {
                    head: 0,
                    relation: Relation::PosCorr,
                    tail: 1,
                },
                Triple {
                    head: 1,
                    relation: Relation::PosCorr,
                    tail: 0,
                },
            ],
        };
        let out = transe_train(&l, &triples, &TransEConfig::default()).unwrap();
        for j in [2, 3] {
            for p in 0..6 {
                assert_eq!(
                    out.embeddings.matrix[[p, j]].to_bits(),
                    l.matrix[[p, j]].to_bits()
                );
            }
        }
        assert_ne!(out.embeddings.column(0), l.column(0));
    }

    #[test]
    fn full_batch_descends() {
        let l = fem(array![
            [0.9, 0.1, 0.5, 0.3],
            [0.2, 0.8, 0.4, 0.6],
            [0.5, 0.5, 0.9, 0.1]
        ]);
        let g = graph(4, &[(0, 1), (1, 2), (2, 3)]);
        let triples = crate::graph::to_triples(&g);
        let cfg = TransEConfig {
            learning_rate: 1e-3,
            epochs: 10,
            mode: TransEMode::FullBatch,
            ..Default::default()
        };
        let out = transe_train(&l, &triples, &cfg).unwrap();
        assert!(
            out.loss_trace[9] < out.loss_trace[0],
            "{:?}",
            out.loss_trace
        );
    }

    #[test]
    fn rejects_empty_triples() {
        let l = fem(array![[0.0, 1.0]]);
        assert!(transe_train(&l, &TripleSet::default(), &TransEConfig::default()).is_err());
    }

    #[test]
    fn transe_is_seeded() {
        let l = fem(Array2::from_shape_fn((5, 3), |(p, j)| {
            (p + 2 * j) as f64 * 0.1
        }));
        let triples = crate::graph::to_triples(&graph(3, &[(0, 1), (1, 2)]));
        let a = transe_train(&l, &triples, &TransEConfig::default()).unwrap();
        let b = transe_train(&l, &triples, &TransEConfig::default()).unwrap();
        assert_eq!(a, b);
    }
}
