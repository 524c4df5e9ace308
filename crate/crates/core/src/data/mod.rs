//! Tabular data: typed tables, schema inference, preprocessing, splits and
//! synthetic toy sets.

mod preprocess;
mod split;
mod table;
mod toy;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{shape_err, Result};
use crate::numeric::Matrix;

pub use preprocess::{fit_transform, ColumnRole, FeatureEncoder, Preprocessor, SampleDomain, SplitData};
pub use split::{split, SplitRatios, SplitTag};
pub use table::{Cell, ColumnKind, RawTable, Schema};
pub use toy::{half_moon, rotate, HalfMoonSpec};

/// Numeric design matrix with one target value per row.
///
/// Targets are 0/1 for binary tasks, class indices for multiclass tasks and
/// real values for regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub x: Matrix,
    pub y: Vec<f64>,
}

impl Dataset {
    pub fn new(x: Matrix, y: Vec<f64>) -> Result<Self> {
        if x.rows() != y.len() {
            return Err(shape_err!("{} rows but {} targets", x.rows(), y.len()));
        }
        Ok(Self { x, y })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.x.cols()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.x.row(i)
    }

    pub fn subset(&self, idx: &[usize]) -> Self {
        Self {
            x: self.x.select_rows(idx),
            y: idx.iter().map(|&i| self.y[i]).collect(),
        }
    }

    /// Rows whose tag equals `tag`.
    pub fn select(&self, tags: &[SplitTag], tag: SplitTag) -> Self {
        let idx: Vec<usize> = tags
            .iter()
            .enumerate()
            .filter(|(_, t)| **t == tag)
            .map(|(i, _)| i)
            .collect();
        self.subset(&idx)
    }

    /// Class labels as indices, for stratified splitting.
    pub fn class_labels(&self) -> Vec<usize> {
        self.y.iter().map(|&y| y as usize).collect()
    }

    /// Per-column mean and population standard deviation.
    pub fn column_moments(&self) -> Vec<(f64, f64)> {
        let n = self.len() as f64;
        (0..self.n_features())
            .map(|c| {
                let mean = self.x.iter_rows().map(|r| r[c]).sum::<f64>() / n;
                let var = self.x.iter_rows().map(|r| (r[c] - mean) * (r[c] - mean)).sum::<f64>() / n;
                (mean, libm::sqrt(var))
            })
            .collect()
    }

    /// Standardizes columns with the given moments, in place.
    pub fn standardize_with(&mut self, moments: &[(f64, f64)]) {
        let cols = self.n_features();
        for (i, v) in self.x.as_mut_slice().iter_mut().enumerate() {
            let (m, s) = moments[i % cols];
            *v = (*v - m) / s;
        }
    }
}
