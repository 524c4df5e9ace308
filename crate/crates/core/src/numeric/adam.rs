use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::math;
use crate::error::{shape_err, Result};

/// Adam hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Moment estimates for one flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl AdamState {
    pub fn new(len: usize, config: AdamConfig) -> Self {
        Self {
            config,
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    pub fn first_moment(&self) -> &[f64] {
        &self.m
    }

    pub fn second_moment(&self) -> &[f64] {
        &self.v
    }

    /// One bias-corrected Adam update of `params` in place.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(shape_err!(
                "adam: {} params, {} grads, state tracks {}",
                params.len(),
                grads.len(),
                self.m.len()
            ));
        }
        self.t += 1;
        let AdamConfig {
            lr,
            beta1,
            beta2,
            eps,
        } = self.config;
        let t = self.t.min(i32::MAX as u64) as i32;
        let c1 = 1.0 - math::powi(beta1, t);
        let c2 = 1.0 - math::powi(beta2, t);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * g;
            self.v[i] = beta2 * self.v[i] + (1.0 - beta2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= lr * m_hat / (math::sqrt(v_hat) + eps);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params() {
        let mut st = AdamState::new(3, AdamConfig::default());
        let mut p = [1.0, -2.0, 0.5];
        st.step(&mut p, &[0.0; 3]).unwrap();
        assert_eq!(p, [1.0, -2.0, 0.5]);
        assert_eq!(st.step_count(), 1);
        assert!(st.first_moment().iter().all(|m| *m == 0.0));
    }

    #[test]
    fn first_step_moves_by_lr() {
        let mut st = AdamState::new(1, AdamConfig::default());
        let mut p = [0.0];
        st.step(&mut p, &[1.0]).unwrap();
        assert!((p[0] + 0.001).abs() < 1e-10, "{}", p[0]);
    }

    #[test]
    fn three_steps_match_scalar_reference() {
        // independent scalar re-derivation
        let (lr, b1, b2, eps) = (0.01, 0.9, 0.999, 1e-8);
        let grads = [0.5, -1.5, 2.0];
        let mut p_ref = 0.3f64;
        let (mut m, mut v) = (0.0f64, 0.0f64);
        for (i, g) in grads.iter().enumerate() {
            let t = (i + 1) as i32;
            m = b1 * m + (1.0 - b1) * g;
            v = b2 * v + (1.0 - b2) * g * g;
            let mh = m / (1.0 - b1.powi(t));
            let vh = v / (1.0 - b2.powi(t));
            p_ref -= lr * mh / (vh.sqrt() + eps);
        }

        let mut st = AdamState::new(
            1,
            AdamConfig {
                lr,
                beta1: b1,
                beta2: b2,
                eps,
            },
        );
        let mut p = [0.3];
        for g in grads {
            st.step(&mut p, &[g]).unwrap();
        }
        assert!((p[0] - p_ref).abs() < 1e-12);
        assert_eq!(st.step_count(), 3);
    }

    #[test]
    fn length_mismatch() {
        let mut st = AdamState::new(2, AdamConfig::default());
        assert!(st.step(&mut [0.0; 2], &[0.0]).is_err());
    }
}
