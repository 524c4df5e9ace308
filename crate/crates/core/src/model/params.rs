use alloc::vec;
use alloc::vec::Vec;

use rand::distr::{Distribution, Uniform};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::LeurnConfig;
use crate::error::{shape_err, Error, Result};
use crate::numeric::{all_finite, Matrix};

/// Affine map `W^T x + b` with `W` stored as (inputs x outputs).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Linear {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

impl Linear {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            weights: Matrix::zeros(inputs, outputs),
            bias: vec![0.0; outputs],
        }
    }

    fn glorot<R: Rng + ?Sized>(inputs: usize, outputs: usize, rng: &mut R) -> Self {
        let limit = libm::sqrt(6.0 / (inputs + outputs) as f64);
        let dist = Uniform::new(-limit, limit).expect("finite glorot limit");
        let data = (0..inputs * outputs).map(|_| dist.sample(rng)).collect();
        Self {
            weights: Matrix::from_vec(inputs, outputs, data).expect("glorot shape"),
            bias: vec![0.0; outputs],
        }
    }

    pub fn inputs(&self) -> usize {
        self.weights.rows()
    }

    pub fn outputs(&self) -> usize {
        self.weights.cols()
    }

    #[inline]
    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        self.weights.transpose_matvec_into(x, &self.bias, out);
    }
}

/// Every learnable quantity of a LEURN model.
///
/// `rule_layers[i]` maps `e_{0:i}` (length `(i+1) n`) to `tau_{i+1}` (length `n`);
/// `head` maps `e_{0:d}` to the logits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeurnParams {
    pub tau0: Vec<f64>,
    pub rule_layers: Vec<Linear>,
    pub head: Linear,
}

impl LeurnParams {
    /// Random initialization: `tau_0 ~ U(-0.5, 0.5)`, Glorot-uniform weights, zero biases.
    pub fn init<R: Rng + ?Sized>(cfg: &LeurnConfig, rng: &mut R) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.n_features;
        let tau0 = (0..n).map(|_| rng.random_range(-0.5..0.5)).collect();
        let rule_layers = (0..cfg.depth)
            .map(|i| Linear::glorot((i + 1) * n, n, rng))
            .collect();
        let head = Linear::glorot(cfg.embedding_len(), cfg.output_dim(), rng);
        Ok(Self {
            tau0,
            rule_layers,
            head,
        })
    }

    /// All-zero parameters with the shapes required by `cfg`.
    pub fn zeros(cfg: &LeurnConfig) -> Self {
        let n = cfg.n_features;
        Self {
            tau0: vec![0.0; n],
            rule_layers: (0..cfg.depth).map(|i| Linear::zeros((i + 1) * n, n)).collect(),
            head: Linear::zeros(cfg.embedding_len(), cfg.output_dim()),
        }
    }

    pub fn n_features(&self) -> usize {
        self.tau0.len()
    }

    pub fn depth(&self) -> usize {
        self.rule_layers.len()
    }

    /// Checks every shape against `cfg` and that all entries are finite.
    pub fn validate(&self, cfg: &LeurnConfig) -> Result<()> {
        let n = cfg.n_features;
        if self.tau0.len() != n {
            return Err(shape_err!("tau0 has {} entries, expected {}", self.tau0.len(), n));
        }
        if self.rule_layers.len() != cfg.depth {
            return Err(shape_err!(
                "{} rule layers, expected depth {}",
                self.rule_layers.len(),
                cfg.depth
            ));
        }
        for (i, layer) in self.rule_layers.iter().enumerate() {
            check_linear(layer, (i + 1) * n, n, "rule layer", i)?;
        }
        check_linear(&self.head, cfg.embedding_len(), cfg.output_dim(), "head", cfg.depth)?;
        if !self.iter_slices().all(all_finite) {
            return Err(Error::NonFinite("parameters".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.iter_slices().map(<[f64]>::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn iter_slices(&self) -> impl Iterator<Item = &[f64]> {
        core::iter::once(self.tau0.as_slice())
            .chain(
                self.rule_layers
                    .iter()
                    .flat_map(|l| [l.weights.as_slice(), l.bias.as_slice()]),
            )
            .chain([self.head.weights.as_slice(), self.head.bias.as_slice()])
    }

    fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::with_capacity(3 + 2 * self.rule_layers.len());
        out.push(&mut self.tau0);
        for l in &mut self.rule_layers {
            out.push(l.weights.as_mut_slice());
            out.push(&mut l.bias);
        }
        out.push(self.head.weights.as_mut_slice());
        out.push(&mut self.head.bias);
        out
    }

    /// Parameters in a fixed flat order: tau0, each rule layer (W, beta), head (W, beta).
    pub fn to_flat(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.len());
        for s in self.iter_slices() {
            flat.extend_from_slice(s);
        }
        flat
    }

    pub fn copy_to_flat(&self, flat: &mut [f64]) {
        let mut at = 0;
        for s in self.iter_slices() {
            flat[at..at + s.len()].copy_from_slice(s);
            at += s.len();
        }
    }

    pub fn assign_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.len() {
            return Err(shape_err!("flat vector of {} for {} parameters", flat.len(), self.len()));
        }
        let mut at = 0;
        for s in self.slices_mut() {
            let len = s.len();
            s.copy_from_slice(&flat[at..at + len]);
            at += len;
        }
        Ok(())
    }

    pub fn fill(&mut self, value: f64) {
        for s in self.slices_mut() {
            s.fill(value);
        }
    }

    /// `self += scale * other`, elementwise; shapes must agree.
    pub fn add_scaled(&mut self, other: &Self, scale: f64) {
        let theirs: Vec<&[f64]> = other.iter_slices().collect();
        for (mine, theirs) in self.slices_mut().into_iter().zip(theirs) {
            for (a, b) in mine.iter_mut().zip(theirs) {
                *a += scale * b;
            }
        }
    }
}

fn check_linear(l: &Linear, inputs: usize, outputs: usize, what: &str, idx: usize) -> Result<()> {
    if l.weights.shape() != (inputs, outputs) || l.bias.len() != outputs {
        return Err(shape_err!(
            "{} {}: weights {:?} bias {}, expected ({}, {}) bias {}",
            what,
            idx,
            l.weights.shape(),
            l.bias.len(),
            inputs,
            outputs,
            outputs
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Task;
    use crate::numeric::SeededRng;

    #[test]
    fn init_shapes() {
        let cfg = LeurnConfig::new(3, 2, 5, Task::Multiclass { classes: 4 });
        let p = LeurnParams::init(&cfg, &mut SeededRng::new(1)).unwrap();
        p.validate(&cfg).unwrap();
        assert_eq!(p.rule_layers[0].weights.shape(), (3, 3));
        assert_eq!(p.rule_layers[1].weights.shape(), (6, 3));
        assert_eq!(p.head.weights.shape(), (9, 4));
        assert!(p.tau0.iter().all(|t| t.abs() <= 0.5));
        assert!(p.head.bias.iter().all(|b| *b == 0.0));
        assert_eq!(p.len(), 3 + 9 + 3 + 18 + 3 + 36 + 4);
    }

    #[test]
    fn flat_round_trip() {
        let cfg = LeurnConfig::new(2, 1, 3, Task::Binary);
        let p = LeurnParams::init(&cfg, &mut SeededRng::new(2)).unwrap();
        let flat = p.to_flat();
        let mut q = LeurnParams::zeros(&cfg);
        q.assign_flat(&flat).unwrap();
        assert_eq!(p, q);
        assert!(q.assign_flat(&flat[1..]).is_err());
    }

    #[test]
    fn validate_catches_shape_errors() {
        let cfg = LeurnConfig::new(2, 1, 3, Task::Binary);
        let mut p = LeurnParams::zeros(&cfg);
        p.tau0.push(0.0);
        assert!(p.validate(&cfg).is_err());
        let mut p = LeurnParams::zeros(&cfg);
        p.head.bias[0] = f64::NAN;
        assert!(matches!(p.validate(&cfg), Err(Error::NonFinite(_))));
    }
}
