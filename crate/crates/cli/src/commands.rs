//! Subcommand implementations. Each returns what it wrote so tests can
//! inspect results without parsing stdout.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use synembed::corpus::{load_semantic_csv, read_feature_csv, LoadOptions};
use synembed::eval::{
    evaluate_pipeline, paired_ttest, render_sweep, render_table, threshold_sweep, unpaired_ttest,
    write_tpr_csv, CvOptions, EvalReport, SweepRow, TTestResult,
};
use synembed::neural::argmax;
use synembed::pipeline::{FitSeeds, FittedPipeline, PipelineArtifact};
use synembed::{Error, Result};

use crate::config::load_config;
use crate::extract::extract_to_csv;

/// Options shared by every subcommand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOptions {
    /// Overrides the config seed.
    pub seed: Option<u64>,
    pub jobs: usize,
    pub paper_mode_tpr: bool,
    pub out_dir: PathBuf,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            seed: None,
            jobs: 1,
            paper_mode_tpr: false,
            out_dir: PathBuf::from("synembed-out"),
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let file = File::create(path)
        .map_err(|e| Error::data(format!("cannot create {}: {e}", path.display())))?;
    Ok(BufWriter::new(file))
}

fn write_string(path: &Path, s: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(s.as_bytes())?;
    w.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_string(path, &s)
}

/// `doc_id,predicted,p0,…` rows.
pub fn write_predictions<W: Write>(doc_ids: &[String], probs: &Array2<f64>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["doc_id".to_string(), "predicted".to_string()];
    header.extend((0..probs.ncols()).map(|c| format!("p{c}")));
    w.write_record(&header)?;
    for (id, row) in doc_ids.iter().zip(probs.rows()) {
        let mut rec = vec![id.clone(), argmax(row).to_string()];
        rec.extend(row.iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_extract(text_dir: &Path, labels: &Path, out: &Path, uber_cap: f64) -> Result<usize> {
    let mut buf = Vec::new();
    let n = extract_to_csv(text_dir, labels, uber_cap, &mut buf)?;
    let mut w = create(out)?;
    w.write_all(&buf)?;
    w.flush()?;
    Ok(n)
}

#[derive(Debug, Clone)]
pub struct TrainOutputs {
    pub report: EvalReport,
    pub artifact: PathBuf,
    pub report_json: PathBuf,
    pub report_txt: PathBuf,
    pub tpr_csv: PathBuf,
    pub train_predictions: PathBuf,
}

/// Cross-validates the configured pipeline, then fits the final model on
/// every document.
pub fn cmd_train(config: &Path, opts: &RunOptions) -> Result<TrainOutputs> {
    let cfg = load_config(config)?;
    let seed = opts.seed.unwrap_or(cfg.seed);
    let corpus = cfg.data.load_corpus()?;
    let cv = CvOptions {
        folds: cfg.folds,
        seed,
        jobs: opts.jobs,
        paper_mode_tpr: opts.paper_mode_tpr,
    };
    let report = evaluate_pipeline(&corpus, &cfg.pipeline, &cv)?;
    log::info!("fitting final model on all {} documents", corpus.len());
    let model = FittedPipeline::fit(
        &corpus,
        &corpus,
        &cfg.pipeline,
        FitSeeds::derive(seed, cfg.folds),
    )?;
    let probs = model.predict_proba(&corpus.features, corpus.semantic.as_ref())?;

    let dir = &opts.out_dir;
    std::fs::create_dir_all(dir)?;
    let out = TrainOutputs {
        artifact: dir.join("artifact.json"),
        report_json: dir.join("report.json"),
        report_txt: dir.join("report.txt"),
        tpr_csv: dir.join("tpr.csv"),
        train_predictions: dir.join("train_predictions.csv"),
        report,
    };
    write_json(&out.report_json, &out.report)?;
    let mut table = render_table(std::slice::from_ref(&out.report));
    if opts.paper_mode_tpr {
        table.push_str("TPR protocol: paper mode (best fold model applied to the whole dataset)\n");
    }
    write_string(&out.report_txt, &table)?;
    let mut w = create(&out.tpr_csv)?;
    write_tpr_csv(&out.report, &mut w)?;
    w.flush()?;
    write_predictions(
        corpus.features.doc_ids(),
        &probs,
        create(&out.train_predictions)?,
    )?;
    if let Some(graph) = &model.features.graph {
        let mut w = create(&dir.join("graph.tsv"))?;
        graph.write_tsv(&mut w)?;
        w.flush()?;
    }
    let artifact = PipelineArtifact::new(model, out.report.config_fingerprint.clone());
    let mut w = create(&out.artifact)?;
    artifact.write(&mut w)?;
    w.flush()?;
    Ok(out)
}

/// Applies a saved model to a feature CSV (labels, if any, are ignored).
pub fn cmd_predict(
    artifact: &Path,
    features: &Path,
    semantic: Option<&Path>,
    out: &Path,
) -> Result<Array2<f64>> {
    let artifact = PipelineArtifact::load(artifact)?;
    let model = &artifact.model;
    let opts = LoadOptions {
        num_classes: Some(model.num_classes),
        ignore_labels: true,
        ..Default::default()
    };
    let file = File::open(features)
        .map_err(|e| Error::data(format!("cannot open {}: {e}", features.display())))?;
    let docs = read_feature_csv(file, &opts)?;
    let expected = &model.features.input_features;
    let missing: Vec<&str> = expected
        .iter()
        .filter(|n| !docs.feature_names().contains(n))
        .map(String::as_str)
        .collect();
    let extra: Vec<&str> = docs
        .feature_names()
        .iter()
        .filter(|n| !expected.contains(n))
        .map(String::as_str)
        .collect();
    if !missing.is_empty() || !extra.is_empty() {
        return Err(Error::data(format!(
            "feature names differ from the model: missing [{}], unexpected [{}]",
            missing.join(", "),
            extra.join(", ")
        )));
    }
    let semantic = semantic.map(load_semantic_csv).transpose()?;
    let probs = model.predict_proba(&docs, semantic.as_ref())?;
    write_predictions(docs.doc_ids(), &probs, create(out)?)?;
    Ok(probs)
}

pub fn cmd_sweep(config: &Path, thresholds: &[f64], opts: &RunOptions) -> Result<Vec<SweepRow>> {
    let cfg = load_config(config)?;
    if let Some(t) = thresholds.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
        return Err(Error::config(format!("threshold {t} outside (0, 1)")));
    }
    let corpus = cfg.data.load_corpus()?;
    let cv = CvOptions {
        folds: cfg.folds,
        seed: opts.seed.unwrap_or(cfg.seed),
        jobs: opts.jobs,
        paper_mode_tpr: false,
    };
    let rows = threshold_sweep(&corpus, thresholds, &cfg.pipeline, &cv)?;
    let dir = &opts.out_dir;
    let mut w = csv::Writer::from_writer(create(&dir.join("sweep.csv"))?);
    w.write_record(["threshold", "edges", "accuracy", "adjacent_accuracy"])?;
    for r in &rows {
        w.write_record([
            r.threshold.to_string(),
            r.edges.to_string(),
            r.accuracy.to_string(),
            r.adjacent_accuracy.to_string(),
        ])?;
    }
    w.flush()?;
    write_string(&dir.join("sweep.txt"), &render_sweep(&rows))?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub a: String,
    pub b: String,
    pub paired: bool,
    /// What the test samples are.
    pub compared: String,
    pub accuracy: TTestResult,
    pub adjacent_accuracy: TTestResult,
}

impl Comparison {
    pub fn render(&self) -> String {
        let line = |name: &str, r: &TTestResult| {
            format!(
                "{name:<18} t = {:>9.4}  df = {:>3}  p = {:.6}  {}\n",
                r.t,
                r.df,
                r.p_value,
                if r.significant {
                    "significant at 0.05"
                } else {
                    "not significant"
                }
            )
        };
        let mut s = format!(
            "{} vs {} ({} t-test on {})\n",
            self.a,
            self.b,
            if self.paired { "paired" } else { "unpaired" },
            self.compared
        );
        s.push_str(&line("accuracy", &self.accuracy));
        s.push_str(&line("adjacent accuracy", &self.adjacent_accuracy));
        s
    }
}

fn read_report(path: &Path) -> Result<EvalReport> {
    let file = File::open(path)
        .map_err(|e| Error::data(format!("cannot open report {}: {e}", path.display())))?;
    serde_json::from_reader(std::io::BufReader::new(file)).map_err(|e| {
        Error::data(format!(
            "{} is not an evaluation report: {e}",
            path.display()
        ))
    })
}

/// t-tests on the per-fold metrics of two reports.
pub fn cmd_compare(a: &Path, b: &Path, unpaired: bool, out_dir: &Path) -> Result<Comparison> {
    let (ra, rb) = (read_report(a)?, read_report(b)?);
    if !unpaired && (ra.folds.len() != rb.folds.len() || ra.seed != rb.seed) {
        return Err(Error::data(format!(
            "reports are not paired ({} folds, seed {} vs {} folds, seed {}); use --unpaired",
            ra.folds.len(),
            ra.seed,
            rb.folds.len(),
            rb.seed
        )));
    }
    let test = if unpaired {
        unpaired_ttest
    } else {
        paired_ttest
    };
    let cmp = Comparison {
        a: ra.label.clone(),
        b: rb.label.clone(),
        paired: !unpaired,
        compared: "per-fold accuracy and per-fold adjacent accuracy".into(),
        accuracy: test(&ra.fold_accuracies(), &rb.fold_accuracies())?,
        adjacent_accuracy: test(
            &ra.fold_adjacent_accuracies(),
            &rb.fold_adjacent_accuracies(),
        )?,
    };
    write_json(&out_dir.join("compare.json"), &cmp)?;
    Ok(cmp)
}
