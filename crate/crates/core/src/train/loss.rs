use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{shape_err, Error, Result};
use crate::model::{output_activation, Task};
use crate::numeric::math;

/// Loss for one sample and its gradient with respect to the logits.
///
/// Binary targets are 0/1 (sigmoid cross-entropy), multiclass targets are class
/// indices (softmax cross-entropy), regression uses squared error.
pub fn loss_and_grad(task: Task, logits: &[f64], target: f64) -> Result<(f64, Vec<f64>)> {
    if logits.len() != task.output_dim() {
        return Err(shape_err!(
            "{} logits for a task with {} outputs",
            logits.len(),
            task.output_dim()
        ));
    }
    match task {
        Task::Binary => {
            if target != 0.0 && target != 1.0 {
                return Err(Error::Target(format!("binary target must be 0 or 1, got {target}")));
            }
            let z = logits[0];
            let loss = math::softplus(z) - target * z;
            Ok((loss, vec![math::sigmoid(z) - target]))
        }
        Task::Multiclass { classes } => {
            let class = class_index(target, classes)?;
            let probs = output_activation(task, logits);
            let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + math::ln(logits.iter().map(|&z| math::exp(z - max)).sum::<f64>());
            let mut grad = probs;
            grad[class] -= 1.0;
            Ok((lse - logits[class], grad))
        }
        Task::Regression => {
            if !target.is_finite() {
                return Err(Error::Target("regression target is not finite".into()));
            }
            let r = logits[0] - target;
            Ok((r * r, vec![2.0 * r]))
        }
    }
}

pub(crate) fn class_index(target: f64, classes: usize) -> Result<usize> {
    if target >= 0.0 && target < classes as f64 && math::floor(target) == target {
        Ok(target as usize)
    } else {
        Err(Error::Target(format!(
            "class target must be an index below {classes}, got {target}"
        )))
    }
}
