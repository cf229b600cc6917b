//! Thresholded feature-correlation graphs and their relation triples.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use ndarray::ArrayView1;
use serde::{Deserialize, Serialize};

use crate::corpus::FeatureMatrix;
use crate::error::{Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Positive,
    Negative,
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Positive => "positive",
            Sign::Negative => "negative",
        })
    }
}

impl FromStr for Sign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "positive" | "+" => Ok(Sign::Positive),
            "negative" | "-" => Ok(Sign::Negative),
            other => Err(Error::data(format!("unknown edge sign '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationStatistic {
    #[default]
    Pearson,
    Spearman,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub sign: Sign,
    pub r: f64,
}

/// Undirected graph over features; `i < j` for every edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationGraph {
    pub nodes: Vec<String>,
    pub edges: Vec<Edge>,
    pub threshold: f64,
}

impl CorrelationGraph {
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn has_negative_edges(&self) -> bool {
        self.edges.iter().any(|e| e.sign == Sign::Negative)
    }

    /// Neighbour lists (both directions) for every node.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            adj[e.i].push(e.j);
            adj[e.j].push(e.i);
        }
        adj
    }

    pub fn edge_pairs(&self) -> BTreeSet<(usize, usize)> {
        self.edges.iter().map(|e| (e.i, e.j)).collect()
    }

    /// Tab-separated `feature_a  feature_b  sign  r` lines.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        for e in &self.edges {
            writeln!(
                w,
                "{}\t{}\t{}\t{}",
                self.nodes[e.i], self.nodes[e.j], e.sign, e.r
            )?;
        }
        Ok(())
    }

    /// Reads edges written by [`write_tsv`](Self::write_tsv). Node order is
    /// taken from `nodes`; every edge endpoint must be one of them.
    pub fn read_tsv<R: BufRead>(reader: R, nodes: Vec<String>, threshold: f64) -> Result<Self> {
        let index: HashMap<&str, usize> = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        let mut edges = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                line: lineno as u64 + 1,
                message,
            };
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 4 {
                return Err(parse_err(format!(
                    "expected 4 fields, found {}",
                    fields.len()
                )));
            }
            let lookup = |name: &str| {
                index
                    .get(name)
                    .copied()
                    .ok_or_else(|| parse_err(format!("unknown feature '{name}'")))
            };
            let (a, b) = (lookup(fields[0])?, lookup(fields[1])?);
            if a == b {
                return Err(parse_err("self-loop".into()));
            }
            let sign: Sign = fields[2].parse()?;
            let r: f64 = fields[3]
                .parse()
                .map_err(|_| parse_err(format!("bad correlation '{}'", fields[3])))?;
            edges.push(Edge {
                i: a.min(b),
                j: a.max(b),
                sign,
                r,
            });
        }
        edges.sort_by_key(|e| (e.i, e.j));
        edges.dedup_by_key(|e| (e.i, e.j));
        Ok(Self {
            nodes,
            edges,
            threshold,
        })
    }
}

/// Sample Pearson correlation.
pub fn pearson(x: ArrayView1<'_, f64>, y: ArrayView1<'_, f64>) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Dimension {
            context: "pearson",
            expected: x.len(),
            actual: y.len(),
        });
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::data("correlation needs at least 2 observations"));
    }
    let mx = x.sum() / n as f64;
    let my = y.sum() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y.iter()) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::data("correlation undefined for a constant column"));
    }
    // sqrt of the product keeps the computation symmetric in (x, y)
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Average ranks (1-based, ties share their mean rank).
pub fn ranks(x: ArrayView1<'_, f64>) -> ndarray::Array1<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut out = ndarray::Array1::zeros(x.len());
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && x[order[end]] == x[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &idx in &order[start..end] {
            out[idx] = rank;
        }
        start = end;
    }
    out
}

pub fn spearman(x: ArrayView1<'_, f64>, y: ArrayView1<'_, f64>) -> Result<f64> {
    pearson(ranks(x).view(), ranks(y).view())
}

/// Pairwise correlation matrix (upper triangle used by [`build_graph`]).
pub fn correlation_matrix(
    m: &FeatureMatrix,
    statistic: CorrelationStatistic,
) -> Result<Vec<Vec<f64>>> {
    let nf = m.num_features();
    let columns: Vec<ndarray::Array1<f64>> = (0..nf)
        .map(|j| match statistic {
            CorrelationStatistic::Pearson => m.column(j).to_owned(),
            CorrelationStatistic::Spearman => ranks(m.column(j)),
        })
        .collect();
    let mut r = vec![vec![1.0; nf]; nf];
    for i in 0..nf {
        for j in (i + 1)..nf {
            let v = pearson(columns[i].view(), columns[j].view()).map_err(|e| {
                Error::data(format!(
                    "features '{}' / '{}': {e}",
                    m.feature_names()[i],
                    m.feature_names()[j]
                ))
            })?;
            r[i][j] = v;
            r[j][i] = v;
        }
    }
    Ok(r)
}

/// Keeps an edge between features `i < j` when `r ≥ τ`, or when
/// `include_negative` is set and `r ≤ −τ`.
pub fn build_graph(
    m: &FeatureMatrix,
    threshold: f64,
    include_negative: bool,
    statistic: CorrelationStatistic,
) -> Result<CorrelationGraph> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::config(format!(
            "correlation threshold must lie in (0, 1), got {threshold}"
        )));
    }
    if m.num_features() < 2 {
        return Err(Error::data("a correlation graph needs at least 2 features"));
    }
    if m.num_docs() < 3 {
        return Err(Error::data(
            "a correlation graph needs at least 3 documents",
        ));
    }
    let r = correlation_matrix(m, statistic)?;
    let mut edges = Vec::new();
    for (i, row) in r.iter().enumerate() {
        for (j, &rij) in row.iter().enumerate().skip(i + 1) {
            let sign = if rij >= threshold {
                Sign::Positive
            } else if include_negative && rij <= -threshold {
                Sign::Negative
            } else {
                continue;
            };
            edges.push(Edge { i, j, sign, r: rij });
        }
    }
    Ok(CorrelationGraph {
        nodes: m.feature_names().to_vec(),
        edges,
        threshold,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Relation {
    PosCorr,
    NegCorr,
}

impl Relation {
    pub fn index(self) -> usize {
        match self {
            Relation::PosCorr => 0,
            Relation::NegCorr => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triple {
    pub head: usize,
    pub relation: Relation,
    pub tail: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TripleSet {
    pub triples: Vec<Triple>,
}

impl TripleSet {
    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn count(&self, relation: Relation) -> usize {
        self.triples
            .iter()
            .filter(|t| t.relation == relation)
            .count()
    }

    /// Entities that appear in at least one triple.
    pub fn entities(&self) -> BTreeSet<usize> {
        self.triples.iter().flat_map(|t| [t.head, t.tail]).collect()
    }
}

/// Expands every undirected edge into both directed triples.
pub fn to_triples(g: &CorrelationGraph) -> TripleSet {
    let mut triples = Vec::with_capacity(2 * g.edges.len());
    for e in &g.edges {
        let relation = match e.sign {
            Sign::Positive => Relation::PosCorr,
            Sign::Negative => Relation::NegCorr,
        };
        triples.push(Triple {
            head: e.i,
            relation,
            tail: e.j,
        });
        triples.push(Triple {
            head: e.j,
            relation,
            tail: e.i,
        });
    }
    TripleSet { triples }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::{array, Array1, Array2};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn fm(values: Array2<f64>) -> FeatureMatrix {
        let n = values.nrows();
        FeatureMatrix::new(
            (0..n).map(|i| format!("d{i}")).collect(),
            (0..values.ncols()).map(|j| format!("f{j}")).collect(),
            values,
            (0..n).map(|i| i % 2).collect(),
            2,
        )
        .unwrap()
    }

    #[test]
    fn pearson_examples() {
        let x = array![1.0, 2.0, 3.0];
        assert_abs_diff_eq!(pearson(x.view(), x.view()).unwrap(), 1.0, epsilon = 1e-15);
        let neg = -&x;
        assert_abs_diff_eq!(
            pearson(x.view(), neg.view()).unwrap(),
            -1.0,
            epsilon = 1e-15
        );
        let y = array![1.0, 2.0, 4.0];
        // cov = 3/2, var_x = 1, var_y = 7/3 (sample); r = 1.5 / sqrt(7/3)
        let expected = 1.5 / (7.0f64 / 3.0).sqrt();
        let r = pearson(x.view(), y.view()).unwrap();
        assert_abs_diff_eq!(r, expected, epsilon = 1e-12);
        assert_abs_diff_eq!(r, 0.9820, epsilon = 1e-4);
    }

    #[test]
    fn pearson_rejects_constant() {
        let x = array![1.0, 1.0, 1.0];
        let y = array![1.0, 2.0, 3.0];
        assert!(pearson(x.view(), y.view()).is_err());
    }

    #[test]
    fn duplicated_and_negated_columns() {
        let m = fm(array![
            [1.0, 1.0, -1.0],
            [2.0, 2.0, -2.0],
            [4.0, 4.0, -4.0],
            [3.0, 3.0, -3.0]
        ]);
        let g = build_graph(&m, 0.7, false, CorrelationStatistic::Pearson).unwrap();
        assert_eq!(g.edges.len(), 1);
        assert_eq!((g.edges[0].i, g.edges[0].j), (0, 1));
        assert_abs_diff_eq!(g.edges[0].r, 1.0, epsilon = 1e-12);

        let g = build_graph(&m, 0.7, true, CorrelationStatistic::Pearson).unwrap();
        assert_eq!(g.edges.len(), 3);
        assert_eq!(
            g.edges.iter().filter(|e| e.sign == Sign::Negative).count(),
            2
        );
        let t = to_triples(&g);
        assert_eq!(t.count(Relation::PosCorr), 2);
        assert_eq!(t.count(Relation::NegCorr), 4);
    }

    #[test]
    fn independent_features_have_no_edges() {
        // Monte Carlo: 50 draws of 3 independent N(0,1) columns of length 200.
        // |r| ≥ 0.7 would need ~10 standard errors.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut with_edges = 0;
        for _ in 0..50 {
            let v = Array2::from_shape_fn((200, 3), |_| StandardNormal.sample(&mut rng));
            let g = build_graph(&fm(v), 0.7, true, CorrelationStatistic::Pearson).unwrap();
            with_edges += usize::from(!g.edges.is_empty());
        }
        assert_eq!(with_edges, 0);
    }

    #[test]
    fn triples_expand_symmetrically() {
        let g = CorrelationGraph {
            nodes: vec!["a".into(), "b".into()],
            edges: vec![Edge {
                i: 0,
                j: 1,
                sign: Sign::Positive,
                r: 0.9,
            }],
            threshold: 0.7,
        };
        let t = to_triples(&g);
        assert_eq!(t.len(), 2);
        assert!(t
            .triples
            .iter()
            .all(|t| t.relation == Relation::PosCorr && t.head != t.tail));
        let empty = CorrelationGraph { edges: vec![], ..g };
        assert!(to_triples(&empty).is_empty());
    }

    #[test]
    fn tsv_round_trip() {
        let m = fm(array![
            [1.0, 1.1, -1.0],
            [2.0, 2.2, -2.5],
            [4.0, 3.9, -4.0],
            [3.0, 3.0, -3.1]
        ]);
        let g = build_graph(&m, 0.7, true, CorrelationStatistic::Pearson).unwrap();
        let mut buf = Vec::new();
        g.write_tsv(&mut buf).unwrap();
        let back = CorrelationGraph::read_tsv(&buf[..], g.nodes.clone(), 0.7).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn spearman_is_rank_based() {
        let x = array![1.0, 2.0, 3.0, 4.0];
        let y = array![1.0, 8.0, 27.0, 64.0];
        assert_abs_diff_eq!(spearman(x.view(), y.view()).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(ranks(array![3.0, 1.0, 3.0].view()), array![2.5, 1.0, 2.5]);
    }

    fn columns() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (3usize..30).prop_flat_map(|n| {
            (
                prop::collection::vec(-100.0f64..100.0, n),
                prop::collection::vec(-100.0f64..100.0, n),
            )
        })
    }

    proptest! {
        #[test]
        fn pearson_symmetric_and_affine_invariant(
            (x, y) in columns(),
            a in 0.01f64..50.0, b in -50.0f64..50.0,
            c in 0.01f64..50.0, d in -50.0f64..50.0,
        ) {
            let x = Array1::from(x);
            let y = Array1::from(y);
            prop_assume!(pearson(x.view(), y.view()).is_ok());
            let r = pearson(x.view(), y.view()).unwrap();
            prop_assert_eq!(r, pearson(y.view(), x.view()).unwrap());
            let xa = x.mapv(|v| a * v + b);
            let yc = y.mapv(|v| c * v + d);
            let r2 = pearson(xa.view(), yc.view()).unwrap();
            prop_assert!((r - r2).abs() < 1e-12, "{} vs {}", r, r2);
        }

        #[test]
        fn edges_nested_in_threshold(seed in 0u64..200) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let base: Array1<f64> = Array1::from_shape_fn(30, |_| StandardNormal.sample(&mut rng));
            let v = Array2::from_shape_fn((30, 6), |(i, j)| {
                let noise: f64 = StandardNormal.sample(&mut rng);
                base[i] * (j as f64 / 5.0) + noise * 0.5
            });
            let m = fm(v);
            let mut previous: Option<BTreeSet<(usize, usize)>> = None;
            for tau in [0.3, 0.4, 0.5, 0.6, 0.7, 0.8] {
                let g = build_graph(&m, tau, false, CorrelationStatistic::Pearson).unwrap();
                let pairs = g.edge_pairs();
                if let Some(prev) = &previous {
                    prop_assert!(pairs.is_subset(prev));
                }
                previous = Some(pairs);
            }
        }
    }
}
