use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::{forward::forward_unchecked, ForwardMode, LeurnConfig, LeurnParams, QTanh, Task};
use crate::train::argmax;

/// Global importance of each input feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceTable {
    /// Mean absolute head contribution per feature.
    pub scores: Vec<f64>,
    /// Sum of the scores; dividing by it gives shares summing to one.
    pub normalization: f64,
}

impl ImportanceTable {
    pub fn normalized(&self) -> Vec<f64> {
        if self.normalization > 0.0 {
            self.scores.iter().map(|s| s / self.normalization).collect()
        } else {
            self.scores.clone()
        }
    }
}

/// Mean over samples of `|sum_l W_head[l*n + f, o] * e_l[f]|` for each feature `f`.
///
/// `o` is the single output unit, or the predicted class for multiclass
/// models. Per-sample terms are sorted before summation, so the result does
/// not depend on the order of the dataset.
pub fn feature_importance(params: &LeurnParams, cfg: &LeurnConfig, data: &Dataset) -> Result<ImportanceTable> {
    params.validate(cfg)?;
    if data.is_empty() {
        return Err(Error::Empty("importance dataset".into()));
    }
    if data.n_features() != cfg.n_features {
        return Err(crate::error::shape_err!(
            "dataset has {} features, model expects {}",
            data.n_features(),
            cfg.n_features
        ));
    }
    let n = cfg.n_features;
    let q = QTanh::new(cfg.regions)?;
    let w = &params.head.weights;
    let mut terms = vec![Vec::with_capacity(data.len()); n];
    for i in 0..data.len() {
        crate::model::forward::check_input(cfg, data.row(i))?;
        let t = forward_unchecked(params, cfg, &q, data.row(i), ForwardMode::Eval);
        let o = match cfg.task {
            Task::Multiclass { .. } => argmax(&t.logits),
            _ => 0,
        };
        for (f, acc) in terms.iter_mut().enumerate() {
            let s: f64 = (0..=cfg.depth).map(|l| w.get(l * n + f, o) * t.embedding[l * n + f]).sum();
            acc.push(s.abs());
        }
    }
    let scores: Vec<f64> = terms
        .iter_mut()
        .map(|v| {
            v.sort_by(f64::total_cmp);
            v.iter().sum::<f64>() / v.len() as f64
        })
        .collect();
    let normalization = scores.iter().sum();
    Ok(ImportanceTable { scores, normalization })
}

/// Which features a layer reads: feature `f` is selected at `layer` when some
/// weight from one of its embedding entries into that layer's outputs exceeds
/// `tol` in magnitude. Layers `0..d` are the rule layers and `d` is the head.
pub fn feature_selection(params: &LeurnParams, cfg: &LeurnConfig, layer: usize, tol: f64) -> Result<Vec<bool>> {
    params.validate(cfg)?;
    if layer > cfg.depth {
        return Err(Error::Config(format!("layer {layer} out of range for depth {}", cfg.depth)));
    }
    if !(tol >= 0.0) {
        return Err(Error::Config(format!("tolerance must be >= 0, got {tol}")));
    }
    let n = cfg.n_features;
    let lin = if layer < cfg.depth { &params.rule_layers[layer] } else { &params.head };
    Ok((0..n)
        .map(|f| {
            (0..=layer).any(|l| lin.weights.row(l * n + f).iter().any(|w| w.abs() > tol))
        })
        .collect())
}
