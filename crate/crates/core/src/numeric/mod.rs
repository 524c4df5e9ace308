//! Dense linear algebra, Adam, seeded randomness and finite differences.

mod adam;
pub mod bound;
mod diff;
mod matrix;
mod rng;

pub use adam::{AdamConfig, AdamState};
pub use diff::finite_diff;
pub use matrix::{matmul, Matrix};
pub use rng::{derive_seed, SeededRng};

/// Scalar math routed through `libm` so results do not depend on the platform libm.
pub mod math {
    #[inline]
    pub fn tanh(x: f64) -> f64 {
        libm::tanh(x)
    }

    #[inline]
    pub fn atanh(x: f64) -> f64 {
        libm::atanh(x)
    }

    #[inline]
    pub fn exp(x: f64) -> f64 {
        libm::exp(x)
    }

    #[inline]
    pub fn ln(x: f64) -> f64 {
        libm::log(x)
    }

    #[inline]
    pub fn ln_1p(x: f64) -> f64 {
        libm::log1p(x)
    }

    #[inline]
    pub fn sqrt(x: f64) -> f64 {
        libm::sqrt(x)
    }

    #[inline]
    pub fn powi(x: f64, n: i32) -> f64 {
        libm::pow(x, n as f64)
    }

    #[inline]
    pub fn floor(x: f64) -> f64 {
        libm::floor(x)
    }

    #[inline]
    pub fn sin(x: f64) -> f64 {
        libm::sin(x)
    }

    #[inline]
    pub fn cos(x: f64) -> f64 {
        libm::cos(x)
    }

    #[inline]
    pub fn round(x: f64) -> f64 {
        libm::round(x)
    }

    /// `ln(1 + e^x)` without overflow.
    #[inline]
    pub fn softplus(x: f64) -> f64 {
        if x > 0.0 {
            x + ln_1p(exp(-x))
        } else {
            ln_1p(exp(x))
        }
    }

    #[inline]
    pub fn sigmoid(x: f64) -> f64 {
        if x >= 0.0 {
            1.0 / (1.0 + exp(-x))
        } else {
            let e = exp(x);
            e / (1.0 + e)
        }
    }
}

pub(crate) fn all_finite(values: &[f64]) -> bool {
    values.iter().all(|v| v.is_finite())
}
