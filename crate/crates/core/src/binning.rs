//! Gaussian smooth binning and the initial data-driven feature embeddings.
//!
//! Each feature value `x` is mapped to `k` radial-basis similarities
//! `y_n = exp(-(x - μ_n)² / 2σ²)` against equal-width bin centers fitted on
//! training values. Stacking the binned values of every training document
//! gives each feature an `M = k · N_D` dimensional embedding: column `j` of
//! the matrix `L` is the concatenation, in document order, of the `k`-vectors
//! for feature `j`.

use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::corpus::FeatureMatrix;
use crate::error::{Error, Result};

pub const DEFAULT_BINS: usize = 10;
pub const DEFAULT_WIDTH_FACTOR: f64 = 0.5;

/// Bin centers and shared width for one feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinningModel {
    pub centers: Vec<f64>,
    pub sigma: f64,
    pub width_factor: f64,
}

impl BinningModel {
    pub fn k(&self) -> usize {
        self.centers.len()
    }

    /// Gaussian similarity of `x` to every bin center.
    pub fn bin(&self, x: f64) -> Array1<f64> {
        let mut out = Array1::zeros(self.k());
        self.bin_into(x, out.as_slice_mut().expect("contiguous"));
        out
    }

    pub(crate) fn bin_into(&self, x: f64, out: &mut [f64]) {
        let denom = 2.0 * self.sigma * self.sigma;
        for (y, mu) in out.iter_mut().zip(&self.centers) {
            let d = x - mu;
            *y = (-(d * d) / denom).exp();
        }
    }
}

/// Fits `k` equal-width bins over `[min, max]` of `values`.
///
/// Centers are the interval midpoints and `σ = width_factor · (max − min) / k`.
pub fn fit_bins(values: ArrayView1<'_, f64>, k: usize, width_factor: f64) -> Result<BinningModel> {
    if k < 2 {
        return Err(Error::config(format!(
            "bin count must be at least 2, got {k}"
        )));
    }
    if !(width_factor > 0.0) || !width_factor.is_finite() {
        return Err(Error::config(format!(
            "bin width factor must be positive, got {width_factor}"
        )));
    }
    let (min, max) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if !(max > min) {
        return Err(Error::data("cannot fit bins to a constant column"));
    }
    let width = (max - min) / k as f64;
    let centers = (0..k).map(|n| min + (n as f64 + 0.5) * width).collect();
    Ok(BinningModel {
        centers,
        sigma: width_factor * width,
        width_factor,
    })
}

pub fn gaussian_bin(x: f64, model: &BinningModel) -> Array1<f64> {
    model.bin(x)
}

/// `M × N_F` matrix with one embedding column per feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureEmbeddingMatrix {
    pub matrix: Array2<f64>,
    pub feature_names: Vec<String>,
}

impl FeatureEmbeddingMatrix {
    pub fn new(matrix: Array2<f64>, feature_names: Vec<String>) -> Result<Self> {
        if matrix.ncols() != feature_names.len() {
            return Err(Error::Dimension {
                context: "feature embedding columns",
                expected: feature_names.len(),
                actual: matrix.ncols(),
            });
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(
                "feature embeddings contain non-finite values".into(),
            ));
        }
        Ok(Self {
            matrix,
            feature_names,
        })
    }

    /// Embedding dimension `M`.
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn num_features(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn column(&self, j: usize) -> ArrayView1<'_, f64> {
        self.matrix.column(j)
    }
}

/// Fits one [`BinningModel`] per feature of a (standardized) matrix and
/// builds the initial embedding matrix `L` with `M = k · N_D` rows.
pub fn build_initial_embeddings(
    m: &FeatureMatrix,
    k: usize,
    width_factor: f64,
) -> Result<(FeatureEmbeddingMatrix, Vec<BinningModel>)> {
    let n_docs = m.num_docs();
    if n_docs < 2 {
        return Err(Error::data("initial embeddings need at least 2 documents"));
    }
    let bins = (0..m.num_features())
        .map(|j| {
            fit_bins(m.column(j), k, width_factor)
                .map_err(|e| Error::data(format!("feature '{}': {e}", m.feature_names()[j])))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut l = Array2::zeros((k * n_docs, m.num_features()));
    for (j, model) in bins.iter().enumerate() {
        let mut block = vec![0.0; k];
        for i in 0..n_docs {
            model.bin_into(m.values()[[i, j]], &mut block);
            for (n, &y) in block.iter().enumerate() {
                l[[i * k + n, j]] = y;
            }
        }
    }
    let l = FeatureEmbeddingMatrix::new(l, m.feature_names().to_vec())?;
    Ok((l, bins))
}
