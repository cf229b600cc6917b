//! Checks that a minimal config resolves to the documented defaults.

use synembed::embed::{BetaMode, Norm, TransEMode};
use synembed::graph::CorrelationStatistic;
use synembed::neural::Optimizer;
use synembed::pipeline::{EmbeddingScope, Variant};
use synembed::{Error, Result};

use crate::config::parse_config;

const MINIMAL: &str =
    "version = 1\n[data]\nfeatures = \"features.csv\"\nsemantic = \"semantic.csv\"\n";

/// One line per checked default; fails if any differs.
pub fn cmd_selftest() -> Result<Vec<String>> {
    let cfg = parse_config(MINIMAL)?;
    let p = &cfg.pipeline;
    let checks: Vec<(&str, bool)> = vec![
        ("seed = 42", cfg.seed == 42),
        ("folds = 5", cfg.folds == 5),
        ("uber_cap = 100", cfg.data.uber_cap == 100.0),
        (
            "variant = gfe_transe_bert",
            p.variant == Variant::GfeTranseBert,
        ),
        (
            "embedding_scope = train_fold",
            p.embedding_scope == EmbeddingScope::TrainFold,
        ),
        ("scale_projection = true", p.scale_projection),
        ("binning.bins = 10", p.binning.bins == 10),
        ("binning.width_factor = 0.5", p.binning.width_factor == 0.5),
        ("graph.threshold = 0.7", p.graph.threshold == 0.7),
        ("graph.include_negative = false", !p.graph.include_negative),
        (
            "graph.statistic = pearson",
            p.graph.statistic == CorrelationStatistic::Pearson,
        ),
        ("retrofit.alpha = 1", p.retrofit.alpha == 1.0),
        (
            "retrofit.beta = inverse_degree",
            p.retrofit.beta == BetaMode::InverseDegree,
        ),
        ("retrofit.max_iters = 10", p.retrofit.max_iters == 10),
        ("retrofit.tol = 1e-4", p.retrofit.tol == 1e-4),
        ("transe.margin = 1", p.transe.margin == 1.0),
        (
            "transe.learning_rate = 0.01",
            p.transe.learning_rate == 0.01,
        ),
        ("transe.epochs = 100", p.transe.epochs == 100),
        ("transe.norm = L2", p.transe.norm == Norm::L2),
        (
            "transe.neg_samples_per_triple = 1",
            p.transe.neg_samples_per_triple == 1,
        ),
        (
            "transe.renormalize_entities = false",
            !p.transe.renormalize_entities,
        ),
        ("transe.mode = sgd", p.transe.mode == TransEMode::Sgd),
        (
            "network.semantic = [512, 256, 128, 64]",
            p.network.semantic == [512, 256, 128, 64],
        ),
        (
            "network.syntactic = [256, 64]",
            p.network.syntactic == [256, 64],
        ),
        ("network.gdoc = [256, 64]", p.network.gdoc == [256, 64]),
        ("network.raw = []", p.network.raw.is_empty()),
        ("network.fusion = [64]", p.network.fusion == [64]),
        ("train.optimizer = sgd", p.train.optimizer == Optimizer::Sgd),
        ("train.learning_rate = 1e-4", p.train.learning_rate == 1e-4),
        ("train.batch_size = 4", p.train.batch_size == 4),
        ("train.epochs = 60", p.train.epochs == 60),
        ("train.weight_decay = 0", p.train.weight_decay == 0.0),
    ];
    let failed: Vec<&str> = checks
        .iter()
        .filter(|(_, ok)| !ok)
        .map(|(n, _)| *n)
        .collect();
    if !failed.is_empty() {
        return Err(Error::config(format!(
            "default mismatch: {}",
            failed.join("; ")
        )));
    }
    Ok(checks.iter().map(|(n, _)| format!("ok  {n}")).collect())
}

#[cfg(test)]
mod tests {
    #[test]
    fn defaults_hold() {
        assert_eq!(super::cmd_selftest().unwrap().len(), 32);
    }
}
