use std::collections::BTreeSet;

use ndarray::{array, Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use synembed::binning::FeatureEmbeddingMatrix;
use synembed::docembed::project_documents;
use synembed::embed::{retrofit, retrofit_objective, RetrofitConfig};
use synembed::eval::{evaluate_pipeline, threshold_sweep, CvOptions};
use synembed::graph::{build_graph, CorrelationGraph, CorrelationStatistic, Edge, Sign};
use synembed::pipeline::{PipelineConfig, Variant};
use synembed::synthetic::{generate, SyntheticSpec};

fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("f{i}")).collect()
}

fn graph(n: usize, pairs: &[(usize, usize)]) -> CorrelationGraph {
    CorrelationGraph {
        nodes: names(n),
        edges: pairs
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

#[test]
fn synthetic_graph_recovers_clusters() {
    let bench = generate(&SyntheticSpec::default()).unwrap();
    let g = build_graph(
        &bench.corpus.features,
        0.7,
        false,
        CorrelationStatistic::Pearson,
    )
    .unwrap();
    let mut expected = BTreeSet::new();
    for cluster in &bench.clusters {
        for (a, &i) in cluster.iter().enumerate() {
            for &j in &cluster[a + 1..] {
                expected.insert((i.min(j), i.max(j)));
            }
        }
    }
    assert_eq!(g.edge_pairs(), expected);
}

#[test]
fn retrofit_objective_never_increases() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let n = 20;
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(0.2) {
                pairs.push((i, j));
            }
        }
    }
    let g = graph(n, &pairs);
    let l = FeatureEmbeddingMatrix::new(
        Array2::from_shape_fn((30, n), |_| rng.random_range(-1.0..1.0)),
        names(n),
    )
    .unwrap();
    let cfg = RetrofitConfig {
        max_iters: 50,
        tol: 1e-12,
        ..Default::default()
    };
    let out = retrofit(&l, &g, &cfg).unwrap();
    assert!(out.objective_trace.len() > 2);
    for w in out.objective_trace.windows(2) {
        assert!(w[1] <= w[0] + 1e-10, "{} then {}", w[0], w[1]);
    }
    let last = *out.objective_trace.last().unwrap();
    assert!((retrofit_objective(&out.embeddings, &l, &g, &cfg) - last).abs() < 1e-12);
}

#[test]
fn retrofit_two_node_fixed_point() {
    // Ψ = q1² + (q2 − 2)² + (q1 − q2)² is minimized at (2/3, 4/3) with Ψ = 4/3
    let l = FeatureEmbeddingMatrix::new(array![[0.0, 2.0]], names(2)).unwrap();
    let g = graph(2, &[(0, 1)]);
    let cfg = RetrofitConfig {
        max_iters: 50,
        tol: 1e-12,
        ..Default::default()
    };
    let out = retrofit(&l, &g, &cfg).unwrap();
    assert!(out.sweeps <= 50);
    let q = &out.embeddings.matrix;
    assert!((q[[0, 0]] - 2.0 / 3.0).abs() < 1e-8, "{q}");
    assert!((q[[0, 1]] - 4.0 / 3.0).abs() < 1e-8, "{q}");
    assert!((out.objective_trace.last().unwrap() - 4.0 / 3.0).abs() < 1e-8);
}

#[test]
fn isolated_nodes_keep_their_vectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let l = FeatureEmbeddingMatrix::new(
        Array2::from_shape_fn((5, 4), |_| rng.random_range(-1.0..1.0)),
        names(4),
    )
    .unwrap();
    let out = retrofit(&l, &graph(4, &[(0, 2)]), &RetrofitConfig::default()).unwrap();
    assert_eq!(out.embeddings.column(1), l.column(1));
    assert_eq!(out.embeddings.column(3), l.column(3));
}

#[test]
fn projection_matches_naive_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for _ in 0..100 {
        let m = rng.random_range(1..40);
        let nf = rng.random_range(1..12);
        let l = Array2::from_shape_fn((m, nf), |_| rng.random_range(-1.0..1.0));
        let d = Array1::from_shape_fn(nf, |_| rng.random_range(-3.0..3.0));
        let lo = FeatureEmbeddingMatrix::new(l.clone(), names(nf)).unwrap();
        let got = project_documents(&lo, d.view().insert_axis(ndarray::Axis(0)), true).unwrap();
        for p in 0..m {
            let mut naive = 0.0;
            for j in 0..nf {
                naive += l[[p, j]] * d[j];
            }
            naive /= (nf as f64).sqrt();
            assert!((got[[0, p]] - naive).abs() < 1e-12);
        }
    }
}

fn small_config(variant: Variant) -> PipelineConfig {
    let mut cfg = PipelineConfig {
        variant,
        ..Default::default()
    };
    cfg.binning.bins = 3;
    cfg.transe.epochs = 5;
    cfg.network.syntactic = vec![8];
    cfg.network.semantic = vec![4];
    cfg.network.fusion = vec![4];
    cfg.train.epochs = 3;
    cfg.train.learning_rate = 0.01;
    cfg
}

fn small_corpus() -> synembed::corpus::Corpus {
    generate(&SyntheticSpec {
        num_docs: 60,
        semantic_dim: 4,
        ..Default::default()
    })
    .unwrap()
    .corpus
}

#[test]
fn cross_validation_is_deterministic_and_thread_independent() {
    let corpus = small_corpus();
    for variant in [
        Variant::GfeTranseBert,
        Variant::GfeRetrofitOnly,
        Variant::Lr,
    ] {
        let cfg = small_config(variant);
        let opts = CvOptions {
            folds: 3,
            seed: 5,
            ..Default::default()
        };
        let a = evaluate_pipeline(&corpus, &cfg, &opts).unwrap();
        let b = evaluate_pipeline(&corpus, &cfg, &opts).unwrap();
        let c = evaluate_pipeline(&corpus, &cfg, &CvOptions { jobs: 3, ..opts }).unwrap();
        assert_eq!(a, b, "{variant}");
        assert_eq!(a, c, "{variant}");
        assert_eq!(a.confusion.total(), corpus.len() as u64);
    }
}

#[test]
fn sweep_edges_are_nested() {
    let corpus = small_corpus();
    let thresholds = [0.3, 0.4, 0.5, 0.6, 0.7, 0.8];
    let rows = threshold_sweep(
        &corpus,
        &thresholds,
        &small_config(Variant::GfeRetrofitOnly),
        &CvOptions {
            folds: 3,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(rows.len(), 6);
    for (row, &t) in rows.iter().zip(&thresholds) {
        assert_eq!(row.threshold, t);
    }
    for w in rows.windows(2) {
        assert!(w[1].edges <= w[0].edges);
    }
}
