use alloc::format;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Prediction task, which fixes the head width and final activation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Task {
    Binary,
    Multiclass { classes: usize },
    Regression,
}

impl Task {
    pub fn output_dim(&self) -> usize {
        match *self {
            Task::Binary | Task::Regression => 1,
            Task::Multiclass { classes } => classes,
        }
    }

    pub fn is_classification(&self) -> bool {
        !matches!(self, Task::Regression)
    }
}

/// Architecture hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeurnConfig {
    pub n_features: usize,
    /// Number of learned rule layers after `tau_0`.
    pub depth: usize,
    /// Quantization levels of the quantized tanh.
    pub regions: usize,
    pub dropout: f64,
    pub task: Task,
    pub seed: u64,
}

impl LeurnConfig {
    pub fn new(n_features: usize, depth: usize, regions: usize, task: Task) -> Self {
        Self {
            n_features,
            depth,
            regions,
            dropout: 0.0,
            task,
            seed: 0,
        }
    }

    pub fn with_dropout(mut self, dropout: f64) -> Self {
        self.dropout = dropout;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn output_dim(&self) -> usize {
        self.task.output_dim()
    }

    /// Length of the concatenated embedding `e_{0:d}`.
    pub fn embedding_len(&self) -> usize {
        (self.depth + 1) * self.n_features
    }

    /// Maps the degenerate `k = 1` to `k = 2`; a single level carries no rule.
    pub fn normalize_regions(regions: usize) -> usize {
        if regions == 1 {
            log::warn!("k = 1 yields a constant indicator; using k = 2");
            2
        } else {
            regions
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_features == 0 {
            return Err(Error::Config("n_features must be at least 1".into()));
        }
        if self.regions < 2 {
            return Err(Error::Config(format!(
                "quantization regions must be >= 2, got {}",
                self.regions
            )));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config(format!(
                "dropout must lie in [0, 1), got {}",
                self.dropout
            )));
        }
        if let Task::Multiclass { classes } = self.task {
            if classes < 2 {
                return Err(Error::Config("multiclass needs at least 2 classes".into()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn output_dims() {
        assert_eq!(Task::Binary.output_dim(), 1);
        assert_eq!(Task::Regression.output_dim(), 1);
        assert_eq!(Task::Multiclass { classes: 4 }.output_dim(), 4);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(LeurnConfig::new(2, 1, 1, Task::Binary).validate().is_err());
        assert!(LeurnConfig::new(0, 1, 2, Task::Binary).validate().is_err());
        assert!(LeurnConfig::new(2, 1, 2, Task::Binary)
            .with_dropout(1.0)
            .validate()
            .is_err());
        assert!(LeurnConfig::new(2, 1, 2, Task::Multiclass { classes: 1 })
            .validate()
            .is_err());
        assert!(LeurnConfig::new(2, 0, 2, Task::Binary).validate().is_ok());
    }

    #[test]
    fn k_one_maps_to_two() {
        assert_eq!(LeurnConfig::normalize_regions(1), 2);
        assert_eq!(LeurnConfig::normalize_regions(5), 5);
    }
}
