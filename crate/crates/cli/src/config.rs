//! Experiment configuration file (TOML).
//!
//! ```toml
//! version = 1
//! seed = 42
//! folds = 5
//!
//! [data]
//! features = "features.csv"
//! semantic = "semantic.csv"
//!
//! [pipeline]
//! variant = "gfe_transe_bert"
//!
//! [pipeline.graph]
//! threshold = 0.7
//! ```
//!
//! Relative paths are resolved against the directory of the config file.
//! Unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use synembed::corpus::{load_semantic_csv, read_feature_csv, Corpus, LoadOptions};
use synembed::features::DEFAULT_UBER_CAP;
use synembed::pipeline::PipelineConfig;
use synembed::{Error, Result};

use crate::extract::extract_to_csv;

pub const CONFIG_VERSION: u32 = 1;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_FOLDS: usize = 5;

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_folds() -> usize {
    DEFAULT_FOLDS
}

fn default_uber_cap() -> f64 {
    DEFAULT_UBER_CAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    /// Feature CSV. Either this or `text_dir` + `labels` is required.
    #[serde(default)]
    pub features: Option<PathBuf>,
    #[serde(default)]
    pub semantic: Option<PathBuf>,
    /// Directory of `*.txt` documents to extract features from.
    #[serde(default)]
    pub text_dir: Option<PathBuf>,
    /// `doc_id,label` CSV used with `text_dir`.
    #[serde(default)]
    pub labels: Option<PathBuf>,
    #[serde(default)]
    pub num_classes: Option<usize>,
    #[serde(default)]
    pub label_map: Option<BTreeMap<String, usize>>,
    #[serde(default = "default_uber_cap")]
    pub uber_cap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_folds")]
    pub folds: usize,
    pub data: DataConfig,
    #[serde(default)]
    pub pipeline: PipelineConfig,
}

/// Parses a config, reporting the offending field path on schema errors.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let de = toml::Deserializer::parse(text)
        .map_err(|e| Error::config(format!("config is not valid TOML: {e}")))?;
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let msg = inner.message().trim_end().to_string();
        if path == "." {
            Error::config(format!("config: {msg}"))
        } else {
            Error::config(format!("config field `{path}`: {msg}"))
        }
    })?;
    if cfg.version != CONFIG_VERSION {
        return Err(Error::config(format!(
            "config field `version`: unsupported version {}, expected {CONFIG_VERSION}",
            cfg.version
        )));
    }
    cfg.pipeline.validate()?;
    let data = &cfg.data;
    match (&data.features, &data.text_dir, &data.labels) {
        (Some(_), None, _) | (None, Some(_), Some(_)) => {}
        (Some(_), Some(_), _) => {
            return Err(Error::config(
                "config field `data`: give either `features` or `text_dir`, not both",
            ))
        }
        (None, Some(_), None) => {
            return Err(Error::config(
                "config field `data.labels`: required with `text_dir`",
            ))
        }
        (None, None, _) => return Err(Error::config("config field `data.features`: missing")),
    }
    if cfg.pipeline.variant.needs_semantic() && data.semantic.is_none() {
        return Err(Error::config(format!(
            "config field `data.semantic`: variant {} needs semantic vectors",
            cfg.pipeline.variant
        )));
    }
    Ok(cfg)
}

/// Reads and parses a config file and makes its data paths absolute.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
    let mut cfg = parse_config(&text)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let resolve = |p: &mut Option<PathBuf>| {
        if let Some(p) = p {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    };
    resolve(&mut cfg.data.features);
    resolve(&mut cfg.data.semantic);
    resolve(&mut cfg.data.text_dir);
    resolve(&mut cfg.data.labels);
    Ok(cfg)
}

impl DataConfig {
    pub fn load_options(&self) -> LoadOptions {
        LoadOptions {
            num_classes: self.num_classes,
            label_map: self.label_map.clone(),
            ..Default::default()
        }
    }

    pub fn load_corpus(&self) -> Result<Corpus> {
        let opts = self.load_options();
        let features = match (&self.features, &self.text_dir, &self.labels) {
            (Some(path), _, _) => {
                let file = std::fs::File::open(path)
                    .map_err(|e| Error::data(format!("cannot open {}: {e}", path.display())))?;
                read_feature_csv(file, &opts)?
            }
            (None, Some(dir), Some(labels)) => {
                let mut buf = Vec::new();
                extract_to_csv(dir, labels, self.uber_cap, &mut buf)?;
                read_feature_csv(buf.as_slice(), &opts)?
            }
            _ => return Err(Error::config("config field `data.features`: missing")),
        };
        let semantic = self.semantic.as_ref().map(load_semantic_csv).transpose()?;
        Corpus::new(features, semantic)
    }
}
