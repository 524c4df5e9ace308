use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, RngCore};

use super::{LeurnConfig, LeurnParams, QTanh, Task};
use crate::error::{shape_err, Error, Result};
use crate::numeric::{all_finite, math};

/// How a forward pass treats the quantizer and dropout.
pub enum ForwardMode<'r> {
    /// Deterministic inference: hard quantization, no dropout.
    Eval,
    /// Training: hard quantization and inverted dropout drawn from the generator.
    Train(&'r mut dyn RngCore),
    /// Quantization replaced by plain `tanh`; used for gradient checks.
    Surrogate,
}

impl core::fmt::Debug for ForwardMode<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            ForwardMode::Eval => "Eval",
            ForwardMode::Train(_) => "Train",
            ForwardMode::Surrogate => "Surrogate",
        })
    }
}

/// Everything computed by one forward pass.
///
/// Per-layer vectors are stored flat, layer-major: entry `i * n + f` is layer
/// `i`, feature `f`. The concatenated embedding `e_{0:i}` is therefore the
/// prefix `embedding[..(i + 1) * n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    pub n_features: usize,
    pub depth: usize,
    pub input: Vec<f64>,
    pub tau: Vec<f64>,
    pub bins: Vec<usize>,
    pub s: Vec<f64>,
    pub tanh_tau: Vec<f64>,
    pub embedding: Vec<f64>,
    pub logits: Vec<f64>,
    /// Inverted-dropout masks, one per linear layer (rule layers then head);
    /// empty when no dropout was applied.
    pub masks: Vec<Vec<f64>>,
    pub quantized: bool,
}

impl ForwardTrace {
    #[inline]
    fn span(&self, layer: usize) -> core::ops::Range<usize> {
        layer * self.n_features..(layer + 1) * self.n_features
    }

    pub fn tau_at(&self, layer: usize) -> &[f64] {
        &self.tau[self.span(layer)]
    }

    pub fn s_at(&self, layer: usize) -> &[f64] {
        &self.s[self.span(layer)]
    }

    pub fn e_at(&self, layer: usize) -> &[f64] {
        &self.embedding[self.span(layer)]
    }

    pub fn bins_at(&self, layer: usize) -> &[usize] {
        &self.bins[self.span(layer)]
    }
}

pub(crate) fn check_input(cfg: &LeurnConfig, x: &[f64]) -> Result<()> {
    if x.len() != cfg.n_features {
        return Err(shape_err!(
            "input has {} features, model expects {}",
            x.len(),
            cfg.n_features
        ));
    }
    if !all_finite(x) {
        return Err(Error::NonFinite("input".into()));
    }
    Ok(())
}

fn dropout_mask(len: usize, rate: f64, rng: &mut dyn RngCore) -> Vec<f64> {
    let keep = 1.0 / (1.0 - rate);
    (0..len)
        .map(|_| if rng.random_bool(rate) { 0.0 } else { keep })
        .collect()
}

/// Forward pass without re-validating shapes; `q` must match `cfg.regions`.
pub(crate) fn forward_unchecked(
    params: &LeurnParams,
    cfg: &LeurnConfig,
    q: &QTanh,
    x: &[f64],
    mode: ForwardMode<'_>,
) -> ForwardTrace {
    let n = cfg.n_features;
    let d = cfg.depth;
    let total = (d + 1) * n;
    let quantized = !matches!(mode, ForwardMode::Surrogate);
    let mut rng = match mode {
        ForwardMode::Train(rng) if cfg.dropout > 0.0 => Some(rng),
        _ => None,
    };

    let mut tau = vec![0.0; total];
    let mut bins = vec![0usize; total];
    let mut s = vec![0.0; total];
    let mut tanh_tau = vec![0.0; total];
    let mut embedding = vec![0.0; total];
    let mut masks = Vec::new();
    let mut scratch = Vec::new();
    tau[..n].copy_from_slice(&params.tau0);

    for i in 0..=d {
        for f in 0..n {
            let at = i * n + f;
            let z = x[f] + tau[at];
            let bin = q.bin(z);
            bins[at] = bin;
            s[at] = if quantized { q.midpoint(bin) } else { math::tanh(z) };
            tanh_tau[at] = math::tanh(tau[at]);
            embedding[at] = s[at] * tanh_tau[at];
        }
        let width = (i + 1) * n;
        let layer = if i < d { &params.rule_layers[i] } else { &params.head };
        let source: &[f64] = match rng.as_deref_mut() {
            Some(r) => {
                let mask = dropout_mask(width, cfg.dropout, r);
                scratch.clear();
                scratch.extend(embedding[..width].iter().zip(&mask).map(|(e, m)| e * m));
                masks.push(mask);
                &scratch
            }
            None => &embedding[..width],
        };
        if i < d {
            let (_, next) = tau.split_at_mut(width);
            layer.apply_into(source, &mut next[..n]);
        } else {
            let mut logits = vec![0.0; cfg.output_dim()];
            layer.apply_into(source, &mut logits);
            return ForwardTrace {
                n_features: n,
                depth: d,
                input: x.to_vec(),
                tau,
                bins,
                s,
                tanh_tau,
                embedding,
                logits,
                masks,
                quantized,
            };
        }
    }
    unreachable!("loop returns at the head layer")
}

/// Forward pass in the given mode.
pub fn forward_with(
    params: &LeurnParams,
    cfg: &LeurnConfig,
    x: &[f64],
    mode: ForwardMode<'_>,
) -> Result<ForwardTrace> {
    cfg.validate()?;
    params.validate(cfg)?;
    check_input(cfg, x)?;
    let q = QTanh::new(cfg.regions)?;
    Ok(forward_unchecked(params, cfg, &q, x, mode))
}

/// Deterministic eval-mode forward pass.
pub fn forward(params: &LeurnParams, cfg: &LeurnConfig, x: &[f64]) -> Result<ForwardTrace> {
    forward_with(params, cfg, x, ForwardMode::Eval)
}

/// Final activation: sigmoid, softmax or identity.
pub fn output_activation(task: Task, logits: &[f64]) -> Vec<f64> {
    match task {
        Task::Binary => logits.iter().map(|&z| math::sigmoid(z)).collect(),
        Task::Regression => logits.to_vec(),
        Task::Multiclass { .. } => {
            let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let exps: Vec<f64> = logits.iter().map(|&z| math::exp(z - max)).collect();
            let sum: f64 = exps.iter().sum();
            exps.into_iter().map(|e| e / sum).collect()
        }
    }
}

pub fn predict(params: &LeurnParams, cfg: &LeurnConfig, x: &[f64]) -> Result<Vec<f64>> {
    let trace = forward(params, cfg, x)?;
    Ok(output_activation(cfg.task, &trace.logits))
}
