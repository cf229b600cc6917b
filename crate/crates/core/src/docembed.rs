//! Per-document representations fed to the classifier.
//!
//! * syntactic: `d̂ = L_o d`, the standardized feature vector projected
//!   through the optimized feature embeddings (optionally scaled by
//!   `1/√N_F`);
//! * gdoc: concatenation of the Gaussian-binned feature values;
//! * raw: the standardized feature vector itself;
//! * semantic: externally supplied text vectors.

use std::fmt;
use std::io::Write;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::binning::{BinningModel, FeatureEmbeddingMatrix};
use crate::error::{Error, Result};

/// Input channel of the classifier. The derived ordering is the canonical
/// channel order: the feature-side channel first, semantic last.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Syntactic,
    Gdoc,
    Raw,
    Semantic,
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Channel::Syntactic => "syntactic",
            Channel::Gdoc => "gdoc",
            Channel::Raw => "raw",
            Channel::Semantic => "semantic",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentEmbedding {
    pub doc_id: String,
    pub kind: Channel,
    pub vector: Array1<f64>,
}

impl DocumentEmbedding {
    pub fn dim(&self) -> usize {
        self.vector.len()
    }
}

/// `l_p = Σ_j L_o[p, j] · d_j`.
pub fn project_document(
    l_o: &FeatureEmbeddingMatrix,
    d: ArrayView1<'_, f64>,
) -> Result<Array1<f64>> {
    if d.len() != l_o.num_features() {
        return Err(Error::Dimension {
            context: "projection",
            expected: l_o.num_features(),
            actual: d.len(),
        });
    }
    let m = &l_o.matrix;
    let mut out = Array1::zeros(m.nrows());
    for (p, row) in m.rows().into_iter().enumerate() {
        let mut acc = 0.0;
        for (a, b) in row.iter().zip(d.iter()) {
            acc += a * b;
        }
        out[p] = acc;
    }
    Ok(out)
}

/// Projects every row of `docs`; each row is computed independently of the
/// others. With `scale` set the result is divided by `√N_F`.
pub fn project_documents(
    l_o: &FeatureEmbeddingMatrix,
    docs: ArrayView2<'_, f64>,
    scale: bool,
) -> Result<Array2<f64>> {
    let factor = if scale {
        1.0 / (l_o.num_features() as f64).sqrt()
    } else {
        1.0
    };
    let mut out = Array2::zeros((docs.nrows(), l_o.dim()));
    for (i, d) in docs.rows().into_iter().enumerate() {
        let mut v = project_document(l_o, d)?;
        if scale {
            v.mapv_inplace(|x| x * factor);
        }
        out.row_mut(i).assign(&v);
    }
    Ok(out)
}

/// Concatenation over features of the Gaussian bins of each value.
pub fn gdoc_embedding(d: ArrayView1<'_, f64>, bins: &[BinningModel]) -> Result<Array1<f64>> {
    if d.len() != bins.len() {
        return Err(Error::Dimension {
            context: "gdoc embedding",
            expected: bins.len(),
            actual: d.len(),
        });
    }
    let total: usize = bins.iter().map(BinningModel::k).sum();
    let mut out = Array1::zeros(total);
    let slice = out.as_slice_mut().expect("contiguous");
    let mut offset = 0;
    for (x, model) in d.iter().zip(bins) {
        model.bin_into(*x, &mut slice[offset..offset + model.k()]);
        offset += model.k();
    }
    Ok(out)
}

pub fn gdoc_embeddings(docs: ArrayView2<'_, f64>, bins: &[BinningModel]) -> Result<Array2<f64>> {
    let total: usize = bins.iter().map(BinningModel::k).sum();
    let mut out = Array2::zeros((docs.nrows(), total));
    for (i, d) in docs.rows().into_iter().enumerate() {
        out.row_mut(i).assign(&gdoc_embedding(d, bins)?);
    }
    Ok(out)
}

/// Available per-document sources, each `N × dim`, rows aligned with
/// `doc_ids`.
#[derive(Debug, Clone, Default)]
pub struct ChannelSources {
    pub doc_ids: Vec<String>,
    pub syntactic: Option<Array2<f64>>,
    pub gdoc: Option<Array2<f64>>,
    pub raw: Option<Array2<f64>>,
    pub semantic: Option<Array2<f64>>,
}

impl ChannelSources {
    fn get(&self, c: Channel) -> Option<&Array2<f64>> {
        match c {
            Channel::Syntactic => self.syntactic.as_ref(),
            Channel::Gdoc => self.gdoc.as_ref(),
            Channel::Raw => self.raw.as_ref(),
            Channel::Semantic => self.semantic.as_ref(),
        }
    }
}

/// Inputs for each selected channel, in canonical channel order.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelInputs {
    pub channels: Vec<(Channel, Array2<f64>)>,
}

impl ChannelInputs {
    pub fn num_docs(&self) -> usize {
        self.channels.first().map_or(0, |(_, m)| m.nrows())
    }

    pub fn get(&self, c: Channel) -> Option<&Array2<f64>> {
        self.channels.iter().find(|(k, _)| *k == c).map(|(_, m)| m)
    }

    pub fn select_rows(&self, rows: &[usize]) -> ChannelInputs {
        ChannelInputs {
            channels: self
                .channels
                .iter()
                .map(|(c, m)| (*c, m.select(ndarray::Axis(0), rows)))
                .collect(),
        }
    }
}

/// Picks the selected channels out of `sources` in canonical order.
pub fn assemble_channels(selection: &[Channel], sources: &ChannelSources) -> Result<ChannelInputs> {
    if selection.is_empty() {
        return Err(Error::config("at least one input channel must be selected"));
    }
    let mut ordered = selection.to_vec();
    ordered.sort();
    ordered.dedup();
    let n = sources.doc_ids.len();
    let mut channels = Vec::with_capacity(ordered.len());
    for c in ordered {
        let m = match sources.get(c) {
            Some(m) => m,
            None if c == Channel::Semantic => {
                let shown: Vec<&str> = sources
                    .doc_ids
                    .iter()
                    .take(10)
                    .map(String::as_str)
                    .collect();
                let more = if n > 10 {
                    format!(" and {} more", n - 10)
                } else {
                    String::new()
                };
                return Err(Error::data(format!(
                    "semantic channel selected but no semantic vectors for documents: {}{more}",
                    shown.join(", ")
                )));
            }
            None => return Err(Error::data(format!("no source for the {c} channel"))),
        };
        if m.nrows() != n {
            return Err(Error::Dimension {
                context: "channel rows",
                expected: n,
                actual: m.nrows(),
            });
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "{c} channel has non-finite values"
            )));
        }
        channels.push((c, m.clone()));
    }
    Ok(ChannelInputs { channels })
}

/// Writes `doc_id,e0,...` rows for external analysis.
pub fn write_embeddings_csv<W: Write>(
    doc_ids: &[String],
    vectors: &Array2<f64>,
    writer: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["doc_id".to_string()];
    header.extend((0..vectors.ncols()).map(|p| format!("e{p}")));
    w.write_record(&header)?;
    for (id, row) in doc_ids.iter().zip(vectors.rows()) {
        let mut rec = vec![id.clone()];
        rec.extend(row.iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
