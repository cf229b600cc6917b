//! Metrics, stratified cross-validation, significance tests and the
//! correlation threshold sweep.

use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::corpus::{drop_degenerate_features, stratified_kfold, Corpus};
use crate::error::{Error, Result};
use crate::graph::build_graph;
use crate::pipeline::{fingerprint, FitSeeds, FittedPipeline, PipelineConfig};

fn check_lengths(preds: &[usize], labels: &[usize]) -> Result<()> {
    if preds.len() != labels.len() || preds.is_empty() {
        return Err(Error::data(format!(
            "{} predictions for {} labels",
            preds.len(),
            labels.len()
        )));
    }
    Ok(())
}

pub fn accuracy(preds: &[usize], labels: &[usize]) -> Result<f64> {
    check_lengths(preds, labels)?;
    let hits = preds.iter().zip(labels).filter(|(p, l)| p == l).count();
    Ok(hits as f64 / preds.len() as f64)
}

/// Fraction of predictions within one grade of the label.
pub fn adjacent_accuracy(preds: &[usize], labels: &[usize]) -> Result<f64> {
    check_lengths(preds, labels)?;
    let hits = preds
        .iter()
        .zip(labels)
        .filter(|(p, l)| p.abs_diff(**l) <= 1)
        .count();
    Ok(hits as f64 / preds.len() as f64)
}

/// Counts with rows indexed by the true class, columns by the prediction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn zeros(num_classes: usize) -> Self {
        Self {
            counts: vec![vec![0; num_classes]; num_classes],
        }
    }

    pub fn from_predictions(preds: &[usize], labels: &[usize], num_classes: usize) -> Result<Self> {
        check_lengths(preds, labels)?;
        let mut cm = Self::zeros(num_classes);
        for (&p, &l) in preds.iter().zip(labels) {
            if p >= num_classes || l >= num_classes {
                return Err(Error::data(format!("class index outside 0..{num_classes}")));
            }
            cm.counts[l][p] += 1;
        }
        Ok(cm)
    }

    pub fn num_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.num_classes()).map(|c| self.counts[c][c]).sum()
    }

    pub fn add(&mut self, other: &ConfusionMatrix) {
        for (row, orow) in self.counts.iter_mut().zip(&other.counts) {
            for (a, b) in row.iter_mut().zip(orow) {
                *a += b;
            }
        }
    }
}

/// `TP / (TP + FN)` per grade; `None` for a grade with no documents.
pub fn per_grade_tpr(cm: &ConfusionMatrix) -> Vec<Option<f64>> {
    cm.counts
        .iter()
        .enumerate()
        .map(|(c, row)| {
            let support: u64 = row.iter().sum();
            (support > 0).then(|| row[c] as f64 / support as f64)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    /// Infinite when the differences have zero variance but a nonzero
    /// mean (serialized as `null`).
    pub t: f64,
    pub df: f64,
    pub p_value: f64,
    pub significant: bool,
}

pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn sum_sq_dev(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum()
}

fn t_result(t_num: f64, se: f64, df: f64) -> TTestResult {
    if se == 0.0 {
        return if t_num == 0.0 {
            TTestResult {
                t: 0.0,
                df,
                p_value: 1.0,
                significant: false,
            }
        } else {
            TTestResult {
                t: f64::INFINITY.copysign(t_num),
                df,
                p_value: 0.0,
                significant: true,
            }
        };
    }
    let t = t_num / se;
    let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
    let p = (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0);
    TTestResult {
        t,
        df,
        p_value: p,
        significant: p < SIGNIFICANCE_LEVEL,
    }
}

/// Two-sided paired t-test on `a − b`.
pub fn paired_ttest(a: &[f64], b: &[f64]) -> Result<TTestResult> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::data(format!(
            "paired t-test needs two samples of equal length >= 2, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = d.len() as f64;
    let sd = (sum_sq_dev(&d) / (n - 1.0)).sqrt();
    Ok(t_result(mean(&d), sd / n.sqrt(), n - 1.0))
}

/// Two-sided two-sample Student t-test with pooled variance.
pub fn unpaired_ttest(a: &[f64], b: &[f64]) -> Result<TTestResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::data(
            "unpaired t-test needs at least 2 values per sample",
        ));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let df = na + nb - 2.0;
    let pooled = (sum_sq_dev(a) + sum_sq_dev(b)) / df;
    let se = (pooled * (1.0 / na + 1.0 / nb)).sqrt();
    Ok(t_result(mean(a) - mean(b), se, df))
}

/// Identifies one cross-validation fold to a [`Learner`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FoldContext {
    pub fold: usize,
    pub seeds: FitSeeds,
}

/// Anything that can be fitted on training rows and predict others.
pub trait Learner: Sync {
    type Model: Send + Sync;

    /// `corpus` is the whole dataset; fit only on `train` labels.
    fn fit(&self, corpus: &Corpus, train: &[usize], ctx: FoldContext) -> Result<Self::Model>;

    fn predict(&self, model: &Self::Model, corpus: &Corpus, rows: &[usize]) -> Result<Vec<usize>>;

    fn loss_trace(&self, _model: &Self::Model) -> Vec<f64> {
        Vec::new()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvOptions {
    pub folds: usize,
    pub seed: u64,
    /// Worker threads; results do not depend on it.
    pub jobs: usize,
    /// Compute TPR by applying the best fold model to every document
    /// instead of pooling held-out predictions.
    pub paper_mode_tpr: bool,
}

impl Default for CvOptions {
    fn default() -> Self {
        Self {
            folds: 5,
            seed: 42,
            jobs: 1,
            paper_mode_tpr: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub test_size: usize,
    pub accuracy: f64,
    pub adjacent_accuracy: f64,
    pub confusion: ConfusionMatrix,
    pub loss_trace: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TprProtocol {
    /// Held-out predictions pooled over folds.
    PooledHeldOut,
    /// Best fold model applied to the whole dataset, training documents
    /// included.
    PaperModeBestFoldWholeDataset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub label: String,
    pub config_fingerprint: String,
    pub seed: u64,
    pub num_classes: usize,
    pub folds: Vec<FoldResult>,
    pub mean_accuracy: f64,
    pub mean_adjacent_accuracy: f64,
    pub confusion: ConfusionMatrix,
    pub tpr_protocol: TprProtocol,
    pub tpr: Vec<Option<f64>>,
}

impl EvalReport {
    pub fn fold_accuracies(&self) -> Vec<f64> {
        self.folds.iter().map(|f| f.accuracy).collect()
    }

    pub fn fold_adjacent_accuracies(&self) -> Vec<f64> {
        self.folds.iter().map(|f| f.adjacent_accuracy).collect()
    }
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::config(format!("cannot start {jobs} worker threads: {e}")))
}

/// Stratified K-fold cross-validation of `learner`.
pub fn cross_validate<L: Learner>(
    learner: &L,
    corpus: &Corpus,
    opts: &CvOptions,
    label: &str,
    config_fingerprint: &str,
) -> Result<EvalReport> {
    let labels = corpus.features.labels();
    let num_classes = corpus.features.num_classes();
    let assignment = stratified_kfold(labels, opts.folds, opts.seed)?;
    let run_fold = |fold: usize| -> Result<(FoldResult, L::Model)> {
        let train = assignment.train_indices(fold);
        let test = assignment.test_indices(fold);
        let ctx = FoldContext {
            fold,
            seeds: FitSeeds::derive(opts.seed, fold),
        };
        log::info!("{label}: fold {} of {}", fold + 1, opts.folds);
        let model = learner.fit(corpus, &train, ctx)?;
        let preds = learner.predict(&model, corpus, &test)?;
        let truth: Vec<usize> = test.iter().map(|&i| labels[i]).collect();
        let result = FoldResult {
            fold,
            test_size: test.len(),
            accuracy: accuracy(&preds, &truth)?,
            adjacent_accuracy: adjacent_accuracy(&preds, &truth)?,
            confusion: ConfusionMatrix::from_predictions(&preds, &truth, num_classes)?,
            loss_trace: learner.loss_trace(&model),
        };
        Ok((result, model))
    };
    let outcomes: Vec<Result<(FoldResult, L::Model)>> = if opts.jobs > 1 {
        thread_pool(opts.jobs)?.install(|| (0..opts.folds).into_par_iter().map(run_fold).collect())
    } else {
        (0..opts.folds).map(run_fold).collect()
    };
    let mut folds = Vec::with_capacity(opts.folds);
    let mut models = Vec::with_capacity(opts.folds);
    for (fold, outcome) in outcomes.into_iter().enumerate() {
        let (r, m) = outcome.map_err(|e| Error::Fold {
            fold,
            source: Box::new(e),
        })?;
        folds.push(r);
        models.push(m);
    }

    let k = folds.len() as f64;
    let mean_accuracy = folds.iter().map(|f| f.accuracy).sum::<f64>() / k;
    let mean_adjacent_accuracy = folds.iter().map(|f| f.adjacent_accuracy).sum::<f64>() / k;
    let mut pooled = ConfusionMatrix::zeros(num_classes);
    for f in &folds {
        pooled.add(&f.confusion);
    }
    let (tpr_protocol, tpr_matrix) = if opts.paper_mode_tpr {
        // first fold wins ties
        let best =
            folds.iter().enumerate().fold(
                0,
                |b, (i, f)| if f.accuracy > folds[b].accuracy { i } else { b },
            );
        let all: Vec<usize> = (0..corpus.len()).collect();
        let preds = learner.predict(&models[best], corpus, &all)?;
        (
            TprProtocol::PaperModeBestFoldWholeDataset,
            ConfusionMatrix::from_predictions(&preds, labels, num_classes)?,
        )
    } else {
        (TprProtocol::PooledHeldOut, pooled.clone())
    };
    Ok(EvalReport {
        label: label.to_string(),
        config_fingerprint: config_fingerprint.to_string(),
        seed: opts.seed,
        num_classes,
        folds,
        mean_accuracy,
        mean_adjacent_accuracy,
        confusion: pooled,
        tpr_protocol,
        tpr: per_grade_tpr(&tpr_matrix),
    })
}

/// [`Learner`] running the full [`FittedPipeline`].
#[derive(Debug, Clone)]
pub struct PipelineLearner {
    pub config: PipelineConfig,
}

impl Learner for PipelineLearner {
    type Model = FittedPipeline;

    fn fit(&self, corpus: &Corpus, train: &[usize], ctx: FoldContext) -> Result<FittedPipeline> {
        FittedPipeline::fit(&corpus.subset(train), corpus, &self.config, ctx.seeds)
    }

    fn predict(
        &self,
        model: &FittedPipeline,
        corpus: &Corpus,
        rows: &[usize],
    ) -> Result<Vec<usize>> {
        let sub = corpus.subset(rows);
        model.predict(&sub.features, sub.semantic.as_ref())
    }

    fn loss_trace(&self, model: &FittedPipeline) -> Vec<f64> {
        model.train_loss_trace.clone()
    }
}

/// Cross-validates the pipeline described by `config`.
pub fn evaluate_pipeline(
    corpus: &Corpus,
    config: &PipelineConfig,
    opts: &CvOptions,
) -> Result<EvalReport> {
    config.validate()?;
    let learner = PipelineLearner {
        config: config.clone(),
    };
    let fp = fingerprint(&(config, opts.folds, opts.seed));
    cross_validate(&learner, corpus, opts, config.variant.as_str(), &fp)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub threshold: f64,
    /// Edges of the graph built on the whole corpus at this threshold.
    pub edges: usize,
    pub accuracy: f64,
    pub adjacent_accuracy: f64,
}

/// One cross-validation per threshold, all with the same seed.
pub fn threshold_sweep(
    corpus: &Corpus,
    thresholds: &[f64],
    config: &PipelineConfig,
    opts: &CvOptions,
) -> Result<Vec<SweepRow>> {
    if thresholds.is_empty() {
        return Err(Error::config("threshold list is empty"));
    }
    if let Some(t) = thresholds.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
        return Err(Error::config(format!("threshold {t} outside (0, 1)")));
    }
    let (kept, _) = drop_degenerate_features(&corpus.features)?;
    thresholds
        .iter()
        .map(|&threshold| {
            let mut cfg = config.clone();
            cfg.graph.threshold = threshold;
            let graph = build_graph(
                &kept,
                threshold,
                cfg.graph.include_negative,
                cfg.graph.statistic,
            )?;
            let report = evaluate_pipeline(corpus, &cfg, opts)?;
            Ok(SweepRow {
                threshold,
                edges: graph.edges.len(),
                accuracy: report.mean_accuracy,
                adjacent_accuracy: report.mean_adjacent_accuracy,
            })
        })
        .collect()
}

/// Configurations as rows, an accuracy and an adjacent-accuracy line each.
pub fn render_table(reports: &[EvalReport]) -> String {
    let k = reports.iter().map(|r| r.folds.len()).max().unwrap_or(0);
    let width = reports
        .iter()
        .map(|r| r.label.len())
        .max()
        .unwrap_or(0)
        .max(13);
    let mut out = String::new();
    write!(out, "{:<width$}  {:<8}", "configuration", "metric").unwrap();
    for f in 0..k {
        write!(out, "  fold{:<3}", f + 1).unwrap();
    }
    out.push_str("  mean\n");
    for r in reports {
        let lines = [
            ("acc", r.fold_accuracies(), r.mean_accuracy),
            (
                "adj_acc",
                r.fold_adjacent_accuracies(),
                r.mean_adjacent_accuracy,
            ),
        ];
        for (i, (name, values, mean)) in lines.iter().enumerate() {
            let label = if i == 0 { r.label.as_str() } else { "" };
            write!(out, "{label:<width$}  {name:<8}").unwrap();
            for v in values {
                write!(out, "  {v:<7.4}").unwrap();
            }
            writeln!(out, "  {mean:.4}").unwrap();
        }
    }
    out
}

pub fn render_sweep(rows: &[SweepRow]) -> String {
    let mut out = String::from("threshold  edges  accuracy  adj_accuracy\n");
    for r in rows {
        writeln!(
            out,
            "{:<9}  {:<5}  {:<8.4}  {:.4}",
            r.threshold, r.edges, r.accuracy, r.adjacent_accuracy
        )
        .unwrap();
    }
    out
}

/// `protocol,grade,tpr,support`; undefined rates are written as `NA`.
pub fn write_tpr_csv<W: Write>(report: &EvalReport, writer: W) -> Result<()> {
    let protocol = serde_json::to_value(report.tpr_protocol)?;
    let protocol = protocol.as_str().unwrap_or_default().to_string();
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["protocol", "grade", "tpr", "support"])?;
    for (c, tpr) in report.tpr.iter().enumerate() {
        let support: u64 = report.confusion.counts[c].iter().sum();
        let tpr = tpr.map_or_else(|| "NA".to_string(), |v| v.to_string());
        w.write_record([protocol.clone(), c.to_string(), tpr, support.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
