use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::numeric::math;

/// Quantized tanh with `k` uniform output bins on `[-1, 1]`.
///
/// Output boundaries are `b_j = -1 + 2j/k` (j = 1..k-1) and each bin outputs its
/// midpoint `-1 + (2j+1)/k`. A value on a boundary belongs to the upper bin.
/// Bins are located by comparing the pre-activation against the input-space
/// cut points `atanh(b_j)`, which is the same partition as binning `tanh(z)`
/// but lets extracted intervals reproduce the bin assignment exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct QTanh {
    k: usize,
    cuts: Vec<f64>,
    mids: Vec<f64>,
}

impl QTanh {
    pub fn new(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::Config(alloc::format!(
                "qtanh needs k >= 2, got {k}"
            )));
        }
        let kf = k as f64;
        let cuts = (1..k)
            .map(|j| math::atanh(-1.0 + 2.0 * j as f64 / kf))
            .collect();
        let mids = (0..k).map(|j| -1.0 + (2 * j + 1) as f64 / kf).collect();
        Ok(Self { k, cuts, mids })
    }

    #[inline]
    pub fn levels(&self) -> usize {
        self.k
    }

    /// Output-space boundaries `b_1..b_{k-1}`.
    pub fn boundaries(&self) -> Vec<f64> {
        let kf = self.k as f64;
        (1..self.k).map(|j| -1.0 + 2.0 * j as f64 / kf).collect()
    }

    /// Input-space cut points `atanh(b_j)`, strictly increasing.
    #[inline]
    pub fn cuts(&self) -> &[f64] {
        &self.cuts
    }

    #[inline]
    pub fn midpoints(&self) -> &[f64] {
        &self.mids
    }

    #[inline]
    pub fn bin(&self, z: f64) -> usize {
        self.cuts.partition_point(|&c| c <= z)
    }

    #[inline]
    pub fn midpoint(&self, bin: usize) -> f64 {
        self.mids[bin]
    }

    #[inline]
    pub fn apply(&self, z: f64) -> f64 {
        self.mids[self.bin(z)]
    }

    /// Pre-activation interval `[lo, hi)` of bin `j`, infinite at the extremes.
    pub fn bin_interval(&self, bin: usize) -> (f64, f64) {
        let lo = if bin == 0 {
            f64::NEG_INFINITY
        } else {
            self.cuts[bin - 1]
        };
        let hi = self.cuts.get(bin).copied().unwrap_or(f64::INFINITY);
        (lo, hi)
    }
}

/// Quantized tanh of a single value.
pub fn qtanh(z: f64, k: usize) -> Result<f64> {
    Ok(QTanh::new(k)?.apply(z))
}
