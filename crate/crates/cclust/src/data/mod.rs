//! Dataset construction: synthetic generators, IDX and CSV loaders,
//! standardization, and seeded batch iteration.

mod batch;
mod csv;
mod idx;
mod synth;

pub use batch::{iterate_batches, BatchSampler};
pub use csv::{load_csv, ColumnRef};
pub use idx::load_idx;
pub use synth::{gen_blobs, gen_two_moons};

use thiserror::Error;

use crate::matrix::Matrix;

#[derive(Debug, Error, PartialEq)]
pub enum DataError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),

    #[error("failed to place {k} cluster centers at separation {separation} in {d} dimensions")]
    CenterPlacement { k: usize, d: usize, separation: f64 },

    #[error("{path}: bad magic number, expected {expected:#010x}, got {got:#010x}")]
    BadMagic { path: String, expected: u32, got: u32 },

    #[error("{path}: truncated, expected {expected} bytes of {what}, got {got}")]
    Truncated { path: String, what: String, expected: usize, got: usize },

    #[error("image file has {images} items but label file has {labels}")]
    CountMismatch { images: usize, labels: usize },

    #[error("csv row {row}: {message}")]
    CsvError { row: usize, message: String },

    #[error("labels are {labels} entries for {n} samples")]
    LabelLengthMismatch { labels: usize, n: usize },

    #[error("features contain a non-finite value")]
    NonFiniteFeatures,

    #[error("batch size {batch_size} exceeds dataset size {n}")]
    BatchTooLarge { batch_size: usize, n: usize },

    #[error("batch size must be at least 2, got {0}")]
    BatchTooSmall(usize),

    #[error("stratified sampling requires labels")]
    StratifiedNeedsLabels,

    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

/// An in-memory dataset: `n × d` features and optional class labels.
/// Immutable after construction and freely shareable.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Matrix,
    pub labels: Option<Vec<usize>>,
    pub name: String,
}

impl Dataset {
    pub fn new(features: Matrix, labels: Option<Vec<usize>>, name: impl Into<String>) -> Result<Self, DataError> {
        if !features.is_finite() {
            return Err(DataError::NonFiniteFeatures);
        }
        if let Some(l) = &labels {
            if l.len() != features.rows() {
                return Err(DataError::LabelLengthMismatch { labels: l.len(), n: features.rows() });
            }
        }
        Ok(Dataset { features, labels, name: name.into() })
    }

    pub fn n(&self) -> usize {
        self.features.rows()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    /// Number of distinct label values, if labeled.
    pub fn n_classes(&self) -> Option<usize> {
        self.labels.as_ref().map(|l| {
            let mut v = l.clone();
            v.sort_unstable();
            v.dedup();
            v.len()
        })
    }
}

/// Per-dimension affine map to zero mean and unit variance, fitted once and
/// then applied with the stored statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    mean: Vec<f64>,
    std: Vec<f64>,
}

impl Standardizer {
    /// Fit on a feature matrix. Zero-variance dimensions keep scale 1 so the
    /// map stays invertible.
    pub fn fit(features: &Matrix) -> Standardizer {
        let n = features.rows() as f64;
        let d = features.cols();
        let mut mean = vec![0.0; d];
        for row in features.iter_rows() {
            for (m, &v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        let mut var = vec![0.0; d];
        for row in features.iter_rows() {
            for ((s, &v), &m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 0.0 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, std }
    }

    pub fn transform(&self, features: &Matrix) -> Matrix {
        let mut out = features.clone();
        for i in 0..out.rows() {
            for ((v, &m), &s) in out.row_mut(i).iter_mut().zip(&self.mean).zip(&self.std) {
                *v = (*v - m) / s;
            }
        }
        out
    }

    pub fn transform_dataset(&self, ds: &Dataset) -> Dataset {
        Dataset {
            features: self.transform(&ds.features),
            labels: ds.labels.clone(),
            name: ds.name.clone(),
        }
    }
}
