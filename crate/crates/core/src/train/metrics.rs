use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Evaluation metric used for model selection and reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Auroc,
    Accuracy,
    Rmse,
}

impl Metric {
    pub fn higher_is_better(self) -> bool {
        !matches!(self, Metric::Rmse)
    }

    /// Whether `candidate` is strictly better than `incumbent`.
    pub fn improves(self, candidate: f64, incumbent: f64) -> bool {
        if self.higher_is_better() {
            candidate > incumbent
        } else {
            candidate < incumbent
        }
    }

    /// The value assigned to failed runs.
    pub fn worst(self) -> f64 {
        if self.higher_is_better() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::Auroc => "auroc",
            Metric::Accuracy => "accuracy",
            Metric::Rmse => "rmse",
        }
    }
}

/// Area under the ROC curve: the probability that a random positive scores
/// above a random negative, ties counted as one half.
///
/// Computed from average ranks (Mann-Whitney U) in `O(n log n)`.
pub fn auroc(scores: &[f64], labels: &[f64]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::Shape(alloc::format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if labels.iter().any(|&l| l != 0.0 && l != 1.0) {
        return Err(Error::Target("auroc labels must be 0 or 1".into()));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::NonFinite("auroc score".into()));
    }
    let pos = labels.iter().filter(|&&l| l == 1.0).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::Target("auroc needs both classes present".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // 1-based ranks i+1..=j+1 share their mean
        let avg_rank = (i + j + 2) as f64 / 2.0;
        let tied_pos = order[i..=j].iter().filter(|&&k| labels[k] == 1.0).count();
        rank_sum_pos += avg_rank * tied_pos as f64;
        i = j + 1;
    }
    let (p, n) = (pos as f64, neg as f64);
    let u = rank_sum_pos - p * (p + 1.0) / 2.0;
    Ok(u / (p * n))
}

pub fn accuracy(preds: &[f64], labels: &[f64]) -> Result<f64> {
    check_pair(preds, labels)?;
    let hits = preds.iter().zip(labels).filter(|(p, l)| p == l).count();
    Ok(hits as f64 / preds.len() as f64)
}

pub fn rmse(preds: &[f64], targets: &[f64]) -> Result<f64> {
    check_pair(preds, targets)?;
    let sse: f64 = preds.iter().zip(targets).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok(libm::sqrt(sse / preds.len() as f64))
}

fn check_pair(a: &[f64], b: &[f64]) -> Result<()> {
    if a.is_empty() {
        return Err(Error::Empty("metric input".into()));
    }
    if a.len() != b.len() {
        return Err(Error::Shape(alloc::format!("{} predictions for {} targets", a.len(), b.len())));
    }
    Ok(())
}
