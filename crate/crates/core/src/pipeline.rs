//! End-to-end model: feature cleaning, standardization, binning, graph,
//! embedding optimization, projection and classifier, fitted on one set of
//! documents and applied to any other.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::binning::{
    build_initial_embeddings, BinningModel, FeatureEmbeddingMatrix, DEFAULT_BINS,
    DEFAULT_WIDTH_FACTOR,
};
use crate::corpus::{
    drop_degenerate_features, standardize, Corpus, FeatureMatrix, SemanticVectorSet,
    StandardizationParams,
};
use crate::docembed::{
    assemble_channels, gdoc_embeddings, project_documents, Channel, ChannelInputs, ChannelSources,
};
use crate::embed::{retrofit, transe_train, RelationVectors, RetrofitConfig, TransEConfig};
use crate::error::{Error, Result};
use crate::graph::{build_graph, to_triples, CorrelationGraph, CorrelationStatistic};
use crate::neural::{
    argmax, forward, init_params, train, Dataset, ModelParams, NetworkSpec, TrainConfig,
    DEFAULT_FUSION_WIDTHS, DEFAULT_SEMANTIC_WIDTHS, DEFAULT_SYNTACTIC_WIDTHS,
};

/// Model configurations compared in the evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Lr,
    BertOnly,
    RawBert,
    GdocOnly,
    GdocBert,
    GfeTranseOnly,
    GfeRetrofitOnly,
    GfeTranseBert,
    GfeRetrofitBert,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphMethod {
    Transe,
    Retrofit,
}

impl Variant {
    pub const ALL: [Variant; 9] = [
        Variant::Lr,
        Variant::BertOnly,
        Variant::RawBert,
        Variant::GdocOnly,
        Variant::GdocBert,
        Variant::GfeTranseOnly,
        Variant::GfeRetrofitOnly,
        Variant::GfeTranseBert,
        Variant::GfeRetrofitBert,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Lr => "lr",
            Variant::BertOnly => "bert_only",
            Variant::RawBert => "raw_bert",
            Variant::GdocOnly => "gdoc_only",
            Variant::GdocBert => "gdoc_bert",
            Variant::GfeTranseOnly => "gfe_transe_only",
            Variant::GfeRetrofitOnly => "gfe_retrofit_only",
            Variant::GfeTranseBert => "gfe_transe_bert",
            Variant::GfeRetrofitBert => "gfe_retrofit_bert",
        }
    }

    /// Classifier input channels, in canonical order.
    pub fn channels(self) -> Vec<Channel> {
        use Channel::*;
        match self {
            Variant::Lr => vec![Raw],
            Variant::BertOnly => vec![Semantic],
            Variant::RawBert => vec![Raw, Semantic],
            Variant::GdocOnly => vec![Gdoc],
            Variant::GdocBert => vec![Gdoc, Semantic],
            Variant::GfeTranseOnly | Variant::GfeRetrofitOnly => vec![Syntactic],
            Variant::GfeTranseBert | Variant::GfeRetrofitBert => vec![Syntactic, Semantic],
        }
    }

    pub fn graph_method(self) -> Option<GraphMethod> {
        match self {
            Variant::GfeTranseOnly | Variant::GfeTranseBert => Some(GraphMethod::Transe),
            Variant::GfeRetrofitOnly | Variant::GfeRetrofitBert => Some(GraphMethod::Retrofit),
            _ => None,
        }
    }

    pub fn uses(self, c: Channel) -> bool {
        self.channels().contains(&c)
    }

    pub fn needs_semantic(self) -> bool {
        self.uses(Channel::Semantic)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::config(format!("unknown variant '{s}'")))
    }
}

/// Which documents the feature-side representation is fitted on.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingScope {
    #[default]
    TrainFold,
    /// Standardization, bins, graph and `L` use every document, held-out
    /// ones included. The classifier still only sees training labels.
    FullCorpus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BinningConfig {
    pub bins: usize,
    pub width_factor: f64,
}

impl Default for BinningConfig {
    fn default() -> Self {
        Self {
            bins: DEFAULT_BINS,
            width_factor: DEFAULT_WIDTH_FACTOR,
        }
    }
}

pub const DEFAULT_THRESHOLD: f64 = 0.7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GraphConfig {
    pub threshold: f64,
    pub include_negative: bool,
    pub statistic: CorrelationStatistic,
}

impl Default for GraphConfig {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            include_negative: false,
            statistic: CorrelationStatistic::Pearson,
        }
    }
}

/// Hidden widths per channel stack. The fusion stack always gets a final
/// softmax layer on top of `fusion`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkConfig {
    pub semantic: Vec<usize>,
    pub syntactic: Vec<usize>,
    pub gdoc: Vec<usize>,
    pub raw: Vec<usize>,
    pub fusion: Vec<usize>,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            semantic: DEFAULT_SEMANTIC_WIDTHS.to_vec(),
            syntactic: DEFAULT_SYNTACTIC_WIDTHS.to_vec(),
            gdoc: DEFAULT_SYNTACTIC_WIDTHS.to_vec(),
            raw: Vec::new(),
            fusion: DEFAULT_FUSION_WIDTHS.to_vec(),
        }
    }
}

impl NetworkConfig {
    fn widths(&self, c: Channel) -> &[usize] {
        match c {
            Channel::Semantic => &self.semantic,
            Channel::Syntactic => &self.syntactic,
            Channel::Gdoc => &self.gdoc,
            Channel::Raw => &self.raw,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub variant: Variant,
    pub embedding_scope: EmbeddingScope,
    /// Divide projected documents by `√N_F`.
    pub scale_projection: bool,
    pub binning: BinningConfig,
    pub graph: GraphConfig,
    pub retrofit: RetrofitConfig,
    pub transe: TransEConfig,
    pub network: NetworkConfig,
    pub train: TrainConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            variant: Variant::GfeTranseBert,
            embedding_scope: EmbeddingScope::TrainFold,
            scale_projection: true,
            binning: BinningConfig::default(),
            graph: GraphConfig::default(),
            retrofit: RetrofitConfig::default(),
            transe: TransEConfig::default(),
            network: NetworkConfig::default(),
            train: TrainConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.binning.bins == 0 || !(self.binning.width_factor > 0.0) {
            return Err(Error::config(
                "binning needs at least one bin and a positive width factor",
            ));
        }
        let t = self.graph.threshold;
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::config(format!(
                "graph threshold must lie in (0, 1), got {t}"
            )));
        }
        if self.graph.include_negative && self.variant.graph_method() == Some(GraphMethod::Retrofit)
        {
            return Err(Error::config(
                "negative edges are only supported with TransE; disable include_negative for retrofit variants",
            ));
        }
        for (name, widths) in [
            ("semantic", &self.network.semantic),
            ("syntactic", &self.network.syntactic),
            ("gdoc", &self.network.gdoc),
            ("raw", &self.network.raw),
            ("fusion", &self.network.fusion),
        ] {
            if widths.contains(&0) {
                return Err(Error::config(format!(
                    "network.{name} has a zero-width layer"
                )));
            }
        }
        self.train.validate()
    }
}

/// Hex SHA-256 of the JSON encoding of `value`.
pub fn fingerprint<T: Serialize>(value: &T) -> String {
    let json = serde_json::to_vec(value).expect("config serializes");
    hex::encode(Sha256::digest(&json))
}

/// Seeds for one fit: `fold_seed` drives TransE and minibatch shuffling,
/// `init_seed` the network initialization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitSeeds {
    pub fold_seed: u64,
    pub init_seed: u64,
}

impl FitSeeds {
    /// `seed + fold` and `seed + 1000 + fold`. The final model uses
    /// `fold = K`.
    pub fn derive(seed: u64, fold: usize) -> Self {
        Self {
            fold_seed: seed.wrapping_add(fold as u64),
            init_seed: seed.wrapping_add(1000).wrapping_add(fold as u64),
        }
    }
}

/// Feature-side state fitted on the embedding documents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureModel {
    pub input_features: Vec<String>,
    pub kept_features: Vec<String>,
    pub dropped_features: Vec<String>,
    /// What the projection `L_o d` multiplies: always [`PROJECTION_INPUT`].
    pub projection_input: String,
    pub standardization: StandardizationParams,
    pub bins: Option<Vec<BinningModel>>,
    pub graph: Option<CorrelationGraph>,
    /// Optimized feature embeddings `L_o`.
    pub embeddings: Option<FeatureEmbeddingMatrix>,
    pub relations: Option<RelationVectors>,
    /// Retrofitting objective per sweep or TransE loss per epoch.
    pub embedding_trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedPipeline {
    pub config: PipelineConfig,
    pub seeds: FitSeeds,
    pub num_classes: usize,
    pub features: FeatureModel,
    pub semantic_dim: Option<usize>,
    pub spec: NetworkSpec,
    pub params: ModelParams,
    pub train_loss_trace: Vec<f64>,
}

fn fit_feature_model(
    docs: &FeatureMatrix,
    cfg: &PipelineConfig,
    seeds: FitSeeds,
) -> Result<FeatureModel> {
    let variant = cfg.variant;
    let (kept, dropped) = drop_degenerate_features(docs)?;
    if !dropped.is_empty() {
        log::info!(
            "dropping {} constant feature(s): {}",
            dropped.len(),
            dropped.join(", ")
        );
    }
    let (std_docs, standardization) = standardize(&kept, None)?;
    let needs_bins = variant.uses(Channel::Gdoc) || variant.uses(Channel::Syntactic);
    let mut model = FeatureModel {
        input_features: docs.feature_names().to_vec(),
        kept_features: kept.feature_names().to_vec(),
        dropped_features: dropped,
        projection_input: PROJECTION_INPUT.to_string(),
        standardization,
        bins: None,
        graph: None,
        embeddings: None,
        relations: None,
        embedding_trace: Vec::new(),
    };
    if !needs_bins {
        return Ok(model);
    }
    let (l, bins) =
        build_initial_embeddings(&std_docs, cfg.binning.bins, cfg.binning.width_factor)?;
    model.bins = Some(bins);
    let Some(method) = variant.graph_method() else {
        return Ok(model);
    };
    let graph = build_graph(
        &std_docs,
        cfg.graph.threshold,
        cfg.graph.include_negative,
        cfg.graph.statistic,
    )?;
    let l_o = if graph.edges.is_empty() {
        log::warn!(
            "no feature pair reaches |r| >= {}; using the unoptimized embeddings",
            cfg.graph.threshold
        );
        l
    } else {
        match method {
            GraphMethod::Retrofit => {
                let out = retrofit(&l, &graph, &cfg.retrofit)?;
                model.embedding_trace = out.objective_trace;
                out.embeddings
            }
            GraphMethod::Transe => {
                let tcfg = TransEConfig {
                    seed: seeds.fold_seed,
                    ..cfg.transe.clone()
                };
                let out = transe_train(&l, &to_triples(&graph), &tcfg)?;
                model.embedding_trace = out.loss_trace;
                model.relations = Some(out.relations);
                out.embeddings
            }
        }
    };
    model.graph = Some(graph);
    model.embeddings = Some(l_o);
    Ok(model)
}

fn channel_sources(
    model: &FeatureModel,
    cfg: &PipelineConfig,
    features: &FeatureMatrix,
    semantic: Option<&SemanticVectorSet>,
) -> Result<ChannelSources> {
    let variant = cfg.variant;
    let selected = features.select_named(&model.kept_features)?;
    let (std_docs, _) = standardize(&selected, Some(&model.standardization))?;
    let values = std_docs.values();
    let mut sources = ChannelSources {
        doc_ids: features.doc_ids().to_vec(),
        ..Default::default()
    };
    if variant.uses(Channel::Raw) {
        sources.raw = Some(values.clone());
    }
    if variant.uses(Channel::Gdoc) {
        let bins = model.bins.as_ref().expect("gdoc variants fit bins");
        sources.gdoc = Some(gdoc_embeddings(values.view(), bins)?);
    }
    if variant.uses(Channel::Syntactic) {
        let l_o = model
            .embeddings
            .as_ref()
            .expect("gfe variants fit embeddings");
        sources.syntactic = Some(project_documents(l_o, values.view(), cfg.scale_projection)?);
    }
    if variant.needs_semantic() {
        if let Some(s) = semantic {
            sources.semantic = Some(s.align_to(features.doc_ids())?.vectors().clone());
        }
    }
    Ok(sources)
}

fn network_spec(
    cfg: &PipelineConfig,
    inputs: &ChannelInputs,
    num_classes: usize,
) -> Result<NetworkSpec> {
    let channels: Vec<(Channel, usize, &[usize])> = inputs
        .channels
        .iter()
        .map(|(c, m)| (*c, m.ncols(), cfg.network.widths(*c)))
        .collect();
    // the baseline is plain multinomial logistic regression
    let fusion: &[usize] = if cfg.variant == Variant::Lr {
        &[]
    } else {
        &cfg.network.fusion
    };
    NetworkSpec::from_widths(&channels, fusion, num_classes)
}

impl FittedPipeline {
    /// Fits on `train`. With [`EmbeddingScope::FullCorpus`] the feature
    /// side is fitted on `all` instead.
    pub fn fit(
        train_docs: &Corpus,
        all: &Corpus,
        cfg: &PipelineConfig,
        seeds: FitSeeds,
    ) -> Result<Self> {
        cfg.validate()?;
        if cfg.variant.needs_semantic() && train_docs.semantic.is_none() {
            return Err(Error::config(format!(
                "variant {} needs semantic vectors but none were provided",
                cfg.variant
            )));
        }
        let embed_docs = match cfg.embedding_scope {
            EmbeddingScope::TrainFold => &train_docs.features,
            EmbeddingScope::FullCorpus => &all.features,
        };
        let features = fit_feature_model(embed_docs, cfg, seeds)?;
        let sources = channel_sources(
            &features,
            cfg,
            &train_docs.features,
            train_docs.semantic.as_ref(),
        )?;
        let inputs = assemble_channels(&cfg.variant.channels(), &sources)?;
        let num_classes = train_docs.features.num_classes();
        let spec = network_spec(cfg, &inputs, num_classes)?;
        let tcfg = TrainConfig {
            seed: seeds.fold_seed,
            ..cfg.train.clone()
        };
        let outcome = train(
            &spec,
            &tcfg,
            init_params(&spec, seeds.init_seed),
            Dataset {
                inputs: &inputs,
                labels: train_docs.features.labels(),
            },
            None,
        )?;
        Ok(Self {
            config: cfg.clone(),
            seeds,
            num_classes,
            features,
            semantic_dim: train_docs.semantic.as_ref().map(SemanticVectorSet::dim),
            spec,
            params: outcome.params,
            train_loss_trace: outcome.loss_trace,
        })
    }

    /// Classifier inputs for new documents.
    pub fn inputs(
        &self,
        features: &FeatureMatrix,
        semantic: Option<&SemanticVectorSet>,
    ) -> Result<ChannelInputs> {
        if let (Some(expected), Some(s)) = (self.semantic_dim, semantic) {
            if s.dim() != expected {
                return Err(Error::Dimension {
                    context: "semantic vector width",
                    expected,
                    actual: s.dim(),
                });
            }
        }
        let sources = channel_sources(&self.features, &self.config, features, semantic)?;
        assemble_channels(&self.config.variant.channels(), &sources)
    }

    pub fn predict_proba(
        &self,
        features: &FeatureMatrix,
        semantic: Option<&SemanticVectorSet>,
    ) -> Result<Array2<f64>> {
        let inputs = self.inputs(features, semantic)?;
        forward(&self.params, &self.spec, &inputs)
    }

    pub fn predict(
        &self,
        features: &FeatureMatrix,
        semantic: Option<&SemanticVectorSet>,
    ) -> Result<Vec<usize>> {
        let probs = self.predict_proba(features, semantic)?;
        Ok(probs.rows().into_iter().map(argmax).collect())
    }
}

pub const ARTIFACT_FORMAT: &str = "synembed-artifact/1";

/// Documents are projected as z-scored feature rows, using the training
/// standardization.
pub const PROJECTION_INPUT: &str = "standardized";

/// Self-describing saved model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineArtifact {
    pub format: String,
    pub config_fingerprint: String,
    pub model: FittedPipeline,
}

impl PipelineArtifact {
    pub fn new(model: FittedPipeline, config_fingerprint: String) -> Self {
        Self {
            format: ARTIFACT_FORMAT.to_string(),
            config_fingerprint,
            model,
        }
    }

    pub fn write<W: std::io::Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer(writer, self)?;
        Ok(())
    }

    pub fn read<R: std::io::Read>(reader: R) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_reader(reader)?;
        match value.get("format").and_then(|f| f.as_str()) {
            Some(ARTIFACT_FORMAT) => {}
            Some(other) => {
                return Err(Error::data(format!(
                    "unsupported artifact format '{other}', expected '{ARTIFACT_FORMAT}'"
                )))
            }
            None => return Err(Error::data("not a model artifact: missing format tag")),
        }
        let artifact: Self = serde_json::from_value(value)?;
        artifact.model.spec.validate()?;
        if artifact.model.features.projection_input != PROJECTION_INPUT {
            return Err(Error::data(format!(
                "artifact projects '{}' feature rows, expected '{PROJECTION_INPUT}'",
                artifact.model.features.projection_input
            )));
        }
        Ok(artifact)
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write(file)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::read(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}
