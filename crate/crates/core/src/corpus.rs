//! Graded corpora: feature matrices, semantic vectors, scaling and folds.
//!
//! A corpus is a dense `N_D × N_F` matrix of linguistic feature values with
//! one ordinal grade label per document. Labels are contiguous indices
//! `0..G` in increasing difficulty; textual grade names are mapped through
//! an explicit [`LoadOptions::label_map`].
//!
//! Feature CSV layout (UTF-8, comma separated, `.` decimal point):
//!
//! ```text
//! doc_id,label,<feature_1>,...,<feature_NF>
//! ```
//!
//! Semantic vector CSV layout:
//!
//! ```text
//! doc_id,v0,v1,...,v{d-1}
//! ```

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array2, ArrayView1, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `N_D` documents by `N_F` named features, with ordinal grade labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    doc_ids: Vec<String>,
    feature_names: Vec<String>,
    values: Array2<f64>,
    labels: Vec<usize>,
    num_classes: usize,
}

impl FeatureMatrix {
    /// Builds a matrix, checking every structural invariant.
    pub fn new(
        doc_ids: Vec<String>,
        feature_names: Vec<String>,
        values: Array2<f64>,
        labels: Vec<usize>,
        num_classes: usize,
    ) -> Result<Self> {
        let (rows, cols) = values.dim();
        if rows != doc_ids.len() || rows != labels.len() {
            return Err(Error::data(format!(
                "row count {rows} does not match {} doc ids / {} labels",
                doc_ids.len(),
                labels.len()
            )));
        }
        if cols != feature_names.len() {
            return Err(Error::Dimension {
                context: "feature names",
                expected: cols,
                actual: feature_names.len(),
            });
        }
        if num_classes < 2 {
            return Err(Error::data("a graded corpus needs at least 2 classes"));
        }
        check_unique(&feature_names, "feature name")?;
        check_unique(&doc_ids, "doc_id")?;
        if let Some((i, &l)) = labels.iter().enumerate().find(|(_, &l)| l >= num_classes) {
            return Err(Error::data(format!(
                "document '{}' has label {l} outside 0..{num_classes}",
                doc_ids[i]
            )));
        }
        if let Some(((i, j), v)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::data(format!(
                "non-finite value {v} for document '{}', feature '{}'",
                doc_ids[i], feature_names[j]
            )));
        }
        Ok(Self {
            doc_ids,
            feature_names,
            values,
            labels,
            num_classes,
        })
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn num_docs(&self) -> usize {
        self.values.nrows()
    }

    pub fn num_features(&self) -> usize {
        self.values.ncols()
    }

    pub fn column(&self, j: usize) -> ArrayView1<'_, f64> {
        self.values.column(j)
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.values.row(i)
    }

    /// Rows in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            doc_ids: rows.iter().map(|&i| self.doc_ids[i].clone()).collect(),
            feature_names: self.feature_names.clone(),
            values: self.values.select(Axis(0), rows),
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
            num_classes: self.num_classes,
        }
    }

    /// Columns in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            doc_ids: self.doc_ids.clone(),
            feature_names: cols
                .iter()
                .map(|&j| self.feature_names[j].clone())
                .collect(),
            values: self.values.select(Axis(1), cols),
            labels: self.labels.clone(),
            num_classes: self.num_classes,
        }
    }

    /// Keeps only the named features, in the order given. Errors list every
    /// name that is absent.
    pub fn select_named(&self, names: &[String]) -> Result<FeatureMatrix> {
        let index: HashMap<&str, usize> = self
            .feature_names
            .iter()
            .enumerate()
            .map(|(j, n)| (n.as_str(), j))
            .collect();
        let mut cols = Vec::with_capacity(names.len());
        let mut missing = Vec::new();
        for name in names {
            match index.get(name.as_str()) {
                Some(&j) => cols.push(j),
                None => missing.push(name.as_str()),
            }
        }
        if !missing.is_empty() {
            return Err(Error::data(format!(
                "missing features: {}",
                missing.join(", ")
            )));
        }
        Ok(self.select_columns(&cols))
    }

    pub(crate) fn with_values(&self, values: Array2<f64>) -> FeatureMatrix {
        debug_assert_eq!(values.dim(), self.values.dim());
        FeatureMatrix {
            values,
            ..self.clone()
        }
    }
}

fn check_unique(items: &[String], what: &str) -> Result<()> {
    let mut seen = HashSet::with_capacity(items.len());
    for item in items {
        if !seen.insert(item.as_str()) {
            return Err(Error::data(format!("duplicate {what} '{item}'")));
        }
    }
    Ok(())
}

/// How labels are interpreted at ingestion.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadOptions {
    /// Declared number of grades `G`. When absent, `max(label) + 1` is used.
    #[serde(default)]
    pub num_classes: Option<usize>,
    /// Textual grade name to ordinal index. When present, every label cell
    /// must be a key of this map.
    #[serde(default)]
    pub label_map: Option<BTreeMap<String, usize>>,
    /// Read every label as grade 0 without looking at the cell, for
    /// documents whose grade is unknown.
    #[serde(skip)]
    pub ignore_labels: bool,
}

/// Reads a feature CSV from disk.
pub fn load_feature_csv(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<FeatureMatrix> {
    let file = std::fs::File::open(path.as_ref())
        .map_err(|e| Error::data(format!("cannot open {}: {e}", path.as_ref().display())))?;
    read_feature_csv(file, opts)
}

pub fn read_feature_csv<R: Read>(reader: R, opts: &LoadOptions) -> Result<FeatureMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.len() < 3 || &header[0] != "doc_id" || &header[1] != "label" {
        return Err(Error::Parse {
            line: 1,
            message: "header must start with `doc_id,label` followed by at least one feature"
                .into(),
        });
    }
    let feature_names: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
    let n_features = feature_names.len();

    let mut doc_ids = Vec::new();
    let mut labels = Vec::new();
    let mut flat = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != n_features + 2 {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, found {}", n_features + 2, record.len()),
            });
        }
        doc_ids.push(record[0].to_string());
        labels.push(parse_label(&record[1], opts, line)?);
        for (j, cell) in record.iter().skip(2).enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                line,
                message: format!(
                    "non-numeric value '{cell}' for feature '{}'",
                    feature_names[j]
                ),
            })?;
            flat.push(v);
        }
    }
    if doc_ids.is_empty() {
        return Err(Error::data("feature CSV contains no documents"));
    }
    let num_classes = match opts.num_classes {
        Some(g) => g,
        None => labels.iter().copied().max().unwrap_or(0) + 1,
    }
    .max(2);
    let values = Array2::from_shape_vec((doc_ids.len(), n_features), flat)
        .map_err(|e| Error::data(e.to_string()))?;
    FeatureMatrix::new(doc_ids, feature_names, values, labels, num_classes)
}

fn parse_label(cell: &str, opts: &LoadOptions, line: u64) -> Result<usize> {
    if opts.ignore_labels {
        return Ok(0);
    }
    let cell = cell.trim();
    let label = match &opts.label_map {
        Some(map) => *map.get(cell).ok_or_else(|| Error::Parse {
            line,
            message: format!("label '{cell}' is not in the configured label map"),
        })?,
        None => cell.parse::<usize>().map_err(|_| Error::Parse {
            line,
            message: format!("label '{cell}' is not a non-negative integer"),
        })?,
    };
    if let Some(g) = opts.num_classes {
        if label >= g {
            return Err(Error::Parse {
                line,
                message: format!("label {label} outside 0..{g}"),
            });
        }
    }
    Ok(label)
}

/// Writes a feature CSV. Values use the shortest representation that
/// round-trips exactly.
pub fn write_feature_csv<W: Write>(m: &FeatureMatrix, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["doc_id".to_string(), "label".to_string()];
    header.extend(m.feature_names.iter().cloned());
    w.write_record(&header)?;
    for i in 0..m.num_docs() {
        let mut row = vec![m.doc_ids[i].clone(), m.labels[i].to_string()];
        row.extend(m.values.row(i).iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Externally computed semantic document vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticVectorSet {
    doc_ids: Vec<String>,
    vectors: Array2<f64>,
}

impl SemanticVectorSet {
    pub fn new(doc_ids: Vec<String>, vectors: Array2<f64>) -> Result<Self> {
        if vectors.nrows() != doc_ids.len() {
            return Err(Error::Dimension {
                context: "semantic vectors",
                expected: doc_ids.len(),
                actual: vectors.nrows(),
            });
        }
        if vectors.ncols() == 0 {
            return Err(Error::data(
                "semantic vectors must have at least one dimension",
            ));
        }
        if vectors.iter().any(|v| !v.is_finite()) {
            return Err(Error::data("semantic vectors contain non-finite values"));
        }
        check_unique(&doc_ids, "doc_id")?;
        Ok(Self { doc_ids, vectors })
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn vectors(&self) -> &Array2<f64> {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    /// Reorders rows to follow `doc_ids`. Missing and extra ids are both
    /// errors, and the message names them.
    pub fn align_to(&self, doc_ids: &[String]) -> Result<SemanticVectorSet> {
        let index: HashMap<&str, usize> = self
            .doc_ids
            .iter()
            .enumerate()
            .map(|(i, d)| (d.as_str(), i))
            .collect();
        let wanted: HashSet<&str> = doc_ids.iter().map(String::as_str).collect();
        let missing: Vec<&str> = doc_ids
            .iter()
            .map(String::as_str)
            .filter(|d| !index.contains_key(d))
            .collect();
        let extra: Vec<&str> = self
            .doc_ids
            .iter()
            .map(String::as_str)
            .filter(|d| !wanted.contains(d))
            .collect();
        if !missing.is_empty() || !extra.is_empty() {
            return Err(Error::data(format!(
                "semantic vectors do not match documents (missing: [{}], extra: [{}])",
                missing.join(", "),
                extra.join(", ")
            )));
        }
        let rows: Vec<usize> = doc_ids.iter().map(|d| index[d.as_str()]).collect();
        Ok(SemanticVectorSet {
            doc_ids: doc_ids.to_vec(),
            vectors: self.vectors.select(Axis(0), &rows),
        })
    }

    pub fn select_rows(&self, rows: &[usize]) -> SemanticVectorSet {
        SemanticVectorSet {
            doc_ids: rows.iter().map(|&i| self.doc_ids[i].clone()).collect(),
            vectors: self.vectors.select(Axis(0), rows),
        }
    }
}

pub fn load_semantic_csv(path: impl AsRef<Path>) -> Result<SemanticVectorSet> {
    let file = std::fs::File::open(path.as_ref())
        .map_err(|e| Error::data(format!("cannot open {}: {e}", path.as_ref().display())))?;
    read_semantic_csv(file)
}

pub fn read_semantic_csv<R: Read>(reader: R) -> Result<SemanticVectorSet> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.len() < 2 || &header[0] != "doc_id" {
        return Err(Error::Parse {
            line: 1,
            message: "header must be `doc_id,v0,...`".into(),
        });
    }
    let dim = header.len() - 1;
    let mut ids = Vec::new();
    let mut flat = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != dim + 1 {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, found {}", dim + 1, record.len()),
            });
        }
        ids.push(record[0].to_string());
        for cell in record.iter().skip(1) {
            flat.push(cell.trim().parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("non-numeric vector component '{cell}'"),
            })?);
        }
    }
    let vectors =
        Array2::from_shape_vec((ids.len(), dim), flat).map_err(|e| Error::data(e.to_string()))?;
    SemanticVectorSet::new(ids, vectors)
}

pub fn write_semantic_csv<W: Write>(s: &SemanticVectorSet, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["doc_id".to_string()];
    header.extend((0..s.dim()).map(|i| format!("v{i}")));
    w.write_record(&header)?;
    for (i, id) in s.doc_ids.iter().enumerate() {
        let mut row = vec![id.clone()];
        row.extend(s.vectors.row(i).iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Feature matrix plus (optionally) semantic vectors aligned row-for-row.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub features: FeatureMatrix,
    pub semantic: Option<SemanticVectorSet>,
}

impl Corpus {
    pub fn new(features: FeatureMatrix, semantic: Option<SemanticVectorSet>) -> Result<Self> {
        let semantic = match semantic {
            Some(s) => Some(s.align_to(features.doc_ids())?),
            None => None,
        };
        Ok(Self { features, semantic })
    }

    pub fn len(&self) -> usize {
        self.features.num_docs()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn subset(&self, rows: &[usize]) -> Corpus {
        Corpus {
            features: self.features.select_rows(rows),
            semantic: self.semantic.as_ref().map(|s| s.select_rows(rows)),
        }
    }
}

/// Removes features that are zero for every document or have zero
/// variance; returns the reduced matrix and the dropped names.
pub fn drop_degenerate_features(m: &FeatureMatrix) -> Result<(FeatureMatrix, Vec<String>)> {
    let mut keep = Vec::new();
    let mut dropped = Vec::new();
    for j in 0..m.num_features() {
        let col = m.column(j);
        let first = col[0];
        if col.iter().all(|&v| v == first) {
            dropped.push(m.feature_names[j].clone());
        } else {
            keep.push(j);
        }
    }
    if keep.is_empty() {
        return Err(Error::data("no usable features: every feature is constant"));
    }
    Ok((m.select_columns(&keep), dropped))
}

/// Per-feature z-score parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationParams {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl StandardizationParams {
    /// Column means and sample standard deviations.
    pub fn fit(values: &Array2<f64>) -> Self {
        let n = values.nrows() as f64;
        let mut mean = Vec::with_capacity(values.ncols());
        let mut std = Vec::with_capacity(values.ncols());
        for col in values.columns() {
            let mu = col.sum() / n;
            let ss: f64 = col.iter().map(|v| (v - mu) * (v - mu)).sum();
            let sd = if values.nrows() > 1 {
                (ss / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            mean.push(mu);
            std.push(sd);
        }
        Self { mean, std }
    }

    /// Indices of features whose standard deviation is zero.
    pub fn constant_features(&self) -> Vec<usize> {
        self.std
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == 0.0)
            .map(|(j, _)| j)
            .collect()
    }

    pub fn apply(&self, values: &Array2<f64>) -> Result<Array2<f64>> {
        if values.ncols() != self.mean.len() {
            return Err(Error::Dimension {
                context: "standardization",
                expected: self.mean.len(),
                actual: values.ncols(),
            });
        }
        if let Some(&j) = self.constant_features().first() {
            return Err(Error::data(format!(
                "feature {j} has zero standard deviation"
            )));
        }
        let mut out = values.clone();
        for (j, mut col) in out.columns_mut().into_iter().enumerate() {
            let (mu, sd) = (self.mean[j], self.std[j]);
            col.mapv_inplace(|v| (v - mu) / sd);
        }
        Ok(out)
    }
}

/// Z-scores every column. Without `params` the parameters are fit on `m`
/// (train mode); with `params` they are applied unchanged (test mode).
pub fn standardize(
    m: &FeatureMatrix,
    params: Option<&StandardizationParams>,
) -> Result<(FeatureMatrix, StandardizationParams)> {
    let params = match params {
        Some(p) => p.clone(),
        None => StandardizationParams::fit(m.values()),
    };
    let values = params.apply(m.values())?;
    Ok((m.with_values(values), params))
}

/// Fold index per document for stratified K-fold cross-validation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub folds: Vec<usize>,
    pub k: usize,
    pub seed: u64,
}

impl FoldAssignment {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.folds.len())
            .filter(|&i| self.folds[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.folds.len())
            .filter(|&i| self.folds[i] != fold)
            .collect()
    }
}

/// Stratified fold assignment.
///
/// Documents of each class are shuffled with a seeded generator and dealt
/// round-robin over the folds; the dealing position carries over from one
/// class to the next so overall fold sizes stay within one of each other.
/// Classes with fewer than `k` documents are dealt the same way (some folds
/// get none of them) and logged as a warning.
pub fn stratified_kfold(labels: &[usize], k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::config(format!(
            "fold count must be at least 2, got {k}"
        )));
    }
    if k > labels.len() {
        return Err(Error::data(format!(
            "cannot split {} documents into {k} folds",
            labels.len()
        )));
    }
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![0; labels.len()];
    let mut position = 0usize;
    for (class, mut members) in by_class {
        if members.len() < k {
            log::warn!(
                "class {class} has {} documents, fewer than {k} folds",
                members.len()
            );
        }
        members.shuffle(&mut rng);
        for doc in members {
            folds[doc] = position % k;
            position += 1;
        }
    }
    Ok(FoldAssignment { folds, k, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn matrix(values: Array2<f64>, labels: Vec<usize>) -> FeatureMatrix {
        let n = values.nrows();
        let f = values.ncols();
        FeatureMatrix::new(
            (0..n).map(|i| format!("d{i}")).collect(),
            (0..f).map(|j| format!("f{j}")).collect(),
            values,
            labels,
            2,
        )
        .unwrap()
    }

    #[test]
    fn loads_small_csv() {
        let csv = "doc_id,label,a,b\nx,0,1.5,2\ny,1,3,4\nz,1,-1,0.25\n";
        let m = read_feature_csv(csv.as_bytes(), &LoadOptions::default()).unwrap();
        assert_eq!(m.num_docs(), 3);
        assert_eq!(m.num_features(), 2);
        assert_eq!(m.labels(), &[0, 1, 1]);
        assert_eq!(m.doc_ids()[2], "z");
        assert_eq!(m.values()[[2, 1]], 0.25);
    }

    #[test]
    fn rejects_label_outside_declared_range() {
        let csv = "doc_id,label,a\nx,0,1\ny,3,2\n";
        let opts = LoadOptions {
            num_classes: Some(3),
            ..Default::default()
        };
        let err = read_feature_csv(csv.as_bytes(), &opts).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn reports_line_of_bad_cell() {
        let csv = "doc_id,label,a\nx,0,1\ny,1,oops\n";
        let err = read_feature_csv(csv.as_bytes(), &LoadOptions::default()).unwrap_err();
        match err {
            Error::Parse { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("oops"));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn rejects_malformed_row_and_duplicates() {
        let short = "doc_id,label,a,b\nx,0,1\n";
        assert!(matches!(
            read_feature_csv(short.as_bytes(), &LoadOptions::default()),
            Err(Error::Parse { line: 2, .. })
        ));
        let dup = "doc_id,label,a\nx,0,1\nx,1,2\n";
        let err = read_feature_csv(dup.as_bytes(), &LoadOptions::default()).unwrap_err();
        assert!(err.to_string().contains("duplicate doc_id"));
    }

    #[test]
    fn label_map_translates_names() {
        let csv = "doc_id,label,a\nx,KET,1\ny,PET,2\n";
        let opts = LoadOptions {
            num_classes: None,
            label_map: Some(
                [("KET".to_string(), 0), ("PET".to_string(), 1)]
                    .into_iter()
                    .collect(),
            ),
            ..Default::default()
        };
        let m = read_feature_csv(csv.as_bytes(), &opts).unwrap();
        assert_eq!(m.labels(), &[0, 1]);

        let unlabeled = "doc_id,label,a\nx,,1\ny,?,2\n";
        let opts = LoadOptions {
            num_classes: Some(4),
            ignore_labels: true,
            ..Default::default()
        };
        let m = read_feature_csv(unlabeled.as_bytes(), &opts).unwrap();
        assert_eq!((m.labels(), m.num_classes()), (&[0, 0][..], 4));
    }

    #[test]
    fn drops_zero_and_constant_columns() {
        let m = matrix(
            array![[0.0, 2.0, 1.0], [0.0, 2.0, 3.0], [0.0, 2.0, 5.0]],
            vec![0, 1, 1],
        );
        let (kept, dropped) = drop_degenerate_features(&m).unwrap();
        assert_eq!(dropped, vec!["f0", "f1"]);
        assert_eq!(kept.feature_names(), &["f2".to_string()]);
        // direct variance of the constant column is zero
        let c = m.column(1);
        let mean = c.sum() / 3.0;
        let var: f64 = c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 2.0;
        assert_eq!(var, 0.0);
    }

    #[test]
    fn no_degenerate_columns_is_identity() {
        let m = matrix(array![[1.0, 2.0], [3.0, 1.0]], vec![0, 1]);
        let (kept, dropped) = drop_degenerate_features(&m).unwrap();
        assert!(dropped.is_empty());
        assert_eq!(kept, m);
    }

    #[test]
    fn all_degenerate_is_error() {
        let m = matrix(array![[1.0], [1.0]], vec![0, 1]);
        assert!(drop_degenerate_features(&m)
            .unwrap_err()
            .to_string()
            .contains("no usable features"));
    }

    #[test]
    fn zscore_of_one_two_three() {
        let m = matrix(array![[1.0], [2.0], [3.0]], vec![0, 1, 1]);
        let (z, p) = standardize(&m, None).unwrap();
        assert_abs_diff_eq!(p.std[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(z.values()[[0, 0]], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(z.values()[[1, 0]], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(z.values()[[2, 0]], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn test_mode_applies_params_unchanged() {
        let train = matrix(array![[1.0], [2.0], [3.0]], vec![0, 1, 1]);
        let (_, p) = standardize(&train, None).unwrap();
        let shifted = matrix(array![[11.0], [12.0], [13.0]], vec![0, 1, 1]);
        let (z, p2) = standardize(&shifted, Some(&p)).unwrap();
        assert_eq!(p, p2);
        assert_abs_diff_eq!(z.values()[[1, 0]], 10.0, epsilon = 1e-12);
    }

    #[test]
    fn constant_feature_cannot_be_standardized() {
        let m = matrix(array![[1.0, 4.0], [2.0, 4.0]], vec![0, 1]);
        assert!(standardize(&m, None).is_err());
    }

    #[test]
    fn balanced_folds_hold_one_per_class() {
        let labels = vec![0, 0, 0, 0, 0, 1, 1, 1, 1, 1];
        let a = stratified_kfold(&labels, 5, 7).unwrap();
        for f in 0..5 {
            let test = a.test_indices(f);
            let mut classes: Vec<usize> = test.iter().map(|&i| labels[i]).collect();
            classes.sort();
            assert_eq!(classes, vec![0, 1]);
        }
        assert_eq!(a, stratified_kfold(&labels, 5, 7).unwrap());
    }

    #[test]
    fn weebit_shaped_folds() {
        let labels: Vec<usize> = (0..5)
            .flat_map(|c| std::iter::repeat_n(c, 500))
            .collect();
        let a = stratified_kfold(&labels, 5, 0).unwrap();
        for f in 0..5 {
            for c in 0..5 {
                let n = a
                    .test_indices(f)
                    .iter()
                    .filter(|&&i| labels[i] == c)
                    .count();
                assert_eq!(n, 100);
            }
        }
    }

    #[test]
    fn too_many_folds() {
        assert!(stratified_kfold(&[0, 1, 0], 4, 0).is_err());
        assert!(stratified_kfold(&[0, 1, 0], 1, 0).is_err());
    }

    #[test]
    fn small_classes_are_dealt_best_effort() {
        let labels = vec![0, 0, 0, 0, 0, 0, 1, 1];
        let a = stratified_kfold(&labels, 4, 3).unwrap();
        for f in 0..4 {
            assert!(!a.test_indices(f).is_empty());
        }
    }

    #[test]
    fn semantic_alignment_reports_ids() {
        let s =
            SemanticVectorSet::new(vec!["a".into(), "b".into()], array![[1.0, 2.0], [3.0, 4.0]])
                .unwrap();
        let aligned = s.align_to(&["b".into(), "a".into()]).unwrap();
        assert_eq!(aligned.vectors()[[0, 0]], 3.0);
        let err = s
            .align_to(&["a".into(), "c".into()])
            .unwrap_err()
            .to_string();
        assert!(
            err.contains("missing: [c]") && err.contains("extra: [b]"),
            "{err}"
        );
    }
}
