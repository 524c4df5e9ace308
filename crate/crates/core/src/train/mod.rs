//! Losses, metrics and the mini-batch training loop.

mod fit;
mod loss;
mod metrics;

pub use fit::{evaluate, fit, predict_dataset, EpochRecord, TrainConfig, TrainReport};
pub(crate) use fit::argmax;
pub use loss::loss_and_grad;
pub use metrics::{accuracy, auroc, rmse, Metric};
