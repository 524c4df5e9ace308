use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::loss::{class_index, loss_and_grad};
use super::metrics::{accuracy, auroc, rmse, Metric};
use crate::data::Dataset;
use crate::error::{shape_err, Error, Result};
use crate::model::{backward_into, output_activation, ForwardMode, LeurnConfig, LeurnParams, QTanh, Task};
use crate::model::forward::forward_unchecked;
use crate::numeric::{AdamConfig, AdamState, SeededRng};

/// Optimization settings for one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub lr: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    /// Drives batch shuffling and dropout.
    pub seed: u64,
    /// Selection metric; defaults to AUROC (binary), accuracy (multiclass), RMSE (regression).
    pub metric: Option<Metric>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            batch_size: 128,
            max_epochs: 300,
            patience: 30,
            seed: 0,
            metric: None,
        }
    }
}

impl TrainConfig {
    pub fn metric_for(&self, task: Task) -> Metric {
        self.metric.unwrap_or(match task {
            Task::Binary => Metric::Auroc,
            Task::Multiclass { .. } => Metric::Accuracy,
            Task::Regression => Metric::Rmse,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        if self.patience > self.max_epochs {
            return Err(Error::Config(format!(
                "patience {} exceeds max epochs {}",
                self.patience, self.max_epochs
            )));
        }
        if !(self.lr > 0.0) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_metric: f64,
}

/// Training history and the selected checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub metric: Metric,
    pub history: Vec<EpochRecord>,
    pub best_epoch: Option<usize>,
    pub best_metric: Option<f64>,
    /// Filled in by callers that have a clock.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_secs: Option<f64>,
}

/// Model outputs (after the final activation) for every row.
pub fn predict_dataset(params: &LeurnParams, cfg: &LeurnConfig, data: &Dataset) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    params.validate(cfg)?;
    if data.n_features() != cfg.n_features {
        return Err(shape_err!(
            "dataset has {} features, model expects {}",
            data.n_features(),
            cfg.n_features
        ));
    }
    let q = QTanh::new(cfg.regions)?;
    data.x
        .iter_rows()
        .map(|x| {
            if !crate::numeric::all_finite(x) {
                return Err(Error::NonFinite("input".into()));
            }
            let t = forward_unchecked(params, cfg, &q, x, ForwardMode::Eval);
            Ok(output_activation(cfg.task, &t.logits))
        })
        .collect()
}

/// Evaluates `metric` on a dataset.
pub fn evaluate(params: &LeurnParams, cfg: &LeurnConfig, data: &Dataset, metric: Metric) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::Empty("evaluation set".into()));
    }
    let outputs = predict_dataset(params, cfg, data)?;
    match metric {
        Metric::Auroc => {
            if cfg.task != Task::Binary {
                return Err(Error::Config("AUROC needs a binary task".into()));
            }
            let scores: Vec<f64> = outputs.iter().map(|o| o[0]).collect();
            auroc(&scores, &data.y)
        }
        Metric::Accuracy => {
            let preds: Vec<f64> = outputs
                .iter()
                .map(|o| match cfg.task {
                    Task::Binary => f64::from(u8::from(o[0] >= 0.5)),
                    _ => argmax(o) as f64,
                })
                .collect();
            accuracy(&preds, &data.y)
        }
        Metric::Rmse => {
            let preds: Vec<f64> = outputs.iter().map(|o| o[0]).collect();
            rmse(&preds, &data.y)
        }
    }
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

fn check_split(cfg: &LeurnConfig, data: &Dataset, what: &str) -> Result<()> {
    if data.is_empty() {
        return Err(Error::Empty(format!("{what} split")));
    }
    if data.n_features() != cfg.n_features {
        return Err(shape_err!(
            "{what} split has {} features, model expects {}",
            data.n_features(),
            cfg.n_features
        ));
    }
    for &y in &data.y {
        match cfg.task {
            Task::Binary if y != 0.0 && y != 1.0 => {
                return Err(Error::Target(format!("{what} split: binary target {y}")))
            }
            Task::Multiclass { classes } => {
                class_index(y, classes)?;
            }
            _ => {}
        }
    }
    Ok(())
}

/// Mini-batch Adam training with best-validation checkpointing and early stopping.
///
/// Parameters are initialized from `cfg.seed`; shuffling and dropout draw from
/// `tcfg.seed`. The returned parameters are those of the best validation epoch.
pub fn fit(
    cfg: &LeurnConfig,
    tcfg: &TrainConfig,
    train: &Dataset,
    val: &Dataset,
) -> Result<(LeurnParams, TrainReport)> {
    cfg.validate()?;
    tcfg.validate()?;
    check_split(cfg, train, "train")?;
    check_split(cfg, val, "validation")?;
    let metric = tcfg.metric_for(cfg.task);
    if metric == Metric::Auroc {
        let pos = val.y.iter().filter(|y| **y == 1.0).count();
        if pos == 0 || pos == val.len() {
            return Err(Error::Target("validation split has a single class; AUROC undefined".into()));
        }
    }

    let mut params = LeurnParams::init(cfg, &mut SeededRng::new(cfg.seed))?;
    let mut report = TrainReport {
        metric,
        history: Vec::new(),
        best_epoch: None,
        best_metric: None,
        wall_time_secs: None,
    };
    if tcfg.max_epochs == 0 {
        return Ok((params, report));
    }

    let q = QTanh::new(cfg.regions)?;
    let mut rng = SeededRng::new(tcfg.seed);
    let mut adam = AdamState::new(
        params.len(),
        AdamConfig {
            lr: tcfg.lr,
            ..AdamConfig::default()
        },
    );
    let mut flat = params.to_flat();
    let mut grads = LeurnParams::zeros(cfg);
    let mut flat_grads = vec![0.0; flat.len()];
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut best = params.clone();
    let mut best_metric = metric.worst();
    let mut since_best = 0usize;

    for epoch in 0..tcfg.max_epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(tcfg.batch_size) {
            grads.fill(0.0);
            for &i in batch {
                let trace = forward_unchecked(&params, cfg, &q, train.row(i), ForwardMode::Train(&mut rng));
                let (loss, g) = loss_and_grad(cfg.task, &trace.logits, train.y[i])?;
                loss_sum += loss;
                backward_into(&trace, &params, cfg, &g, &mut grads)?;
            }
            grads.copy_to_flat(&mut flat_grads);
            let scale = 1.0 / batch.len() as f64;
            flat_grads.iter_mut().for_each(|g| *g *= scale);
            adam.step(&mut flat, &flat_grads)?;
            params.assign_flat(&flat)?;
        }
        let train_loss = loss_sum / train.len() as f64;
        if !train_loss.is_finite() || !crate::numeric::all_finite(&flat) {
            return Err(Error::Diverged { epoch });
        }
        let val_metric = evaluate(&params, cfg, val, metric)?;
        report.history.push(EpochRecord {
            epoch,
            train_loss,
            val_metric,
        });
        if report.best_epoch.is_none() || metric.improves(val_metric, best_metric) {
            best_metric = val_metric;
            best.clone_from(&params);
            report.best_epoch = Some(epoch);
            report.best_metric = Some(val_metric);
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= tcfg.patience {
                break;
            }
        }
    }
    Ok((best, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Matrix;
    use rand::Rng;

    /// Uniform points on [-2, 2]^2 labelled by an oblique line, keeping only
    /// those at least 0.3 away from it so the classes are separated by a margin.
    fn separable(n: usize, seed: u64) -> Dataset {
        let mut rng = SeededRng::new(seed);
        let mut data = Vec::new();
        let mut y = Vec::new();
        while y.len() < n {
            let a: f64 = rng.random_range(-2.0..2.0);
            let b: f64 = rng.random_range(-2.0..2.0);
            let side = a + 0.5 * b - 0.2;
            if side.abs() < 0.3 {
                continue;
            }
            data.extend([a, b]);
            y.push(f64::from(u8::from(side > 0.0)));
        }
        Dataset::new(Matrix::from_vec(n, 2, data).unwrap(), y).unwrap()
    }

    #[test]
    fn learns_a_separable_problem() {
        let cfg = LeurnConfig::new(2, 1, 2, Task::Binary).with_seed(1);
        let tcfg = TrainConfig {
            lr: 1e-2,
            batch_size: 32,
            max_epochs: 150,
            patience: 40,
            seed: 2,
            metric: None,
        };
        let (params, report) = fit(&cfg, &tcfg, &separable(600, 3), &separable(200, 4)).unwrap();
        let best = report.best_metric.unwrap();
        assert!(best >= 0.99, "best val auroc {best}");
        let again = evaluate(&params, &cfg, &separable(200, 4), Metric::Auroc).unwrap();
        assert_eq!(again, best);
    }

    #[test]
    fn zero_epochs_returns_initialization() {
        let cfg = LeurnConfig::new(2, 1, 2, Task::Binary).with_seed(7);
        let tcfg = TrainConfig {
            max_epochs: 0,
            patience: 0,
            ..TrainConfig::default()
        };
        let (params, report) = fit(&cfg, &tcfg, &separable(20, 1), &separable(20, 2)).unwrap();
        assert!(report.history.is_empty());
        assert_eq!(report.best_metric, None);
        assert_eq!(params, LeurnParams::init(&cfg, &mut SeededRng::new(7)).unwrap());
    }

    #[test]
    fn deterministic_reports() {
        let cfg = LeurnConfig::new(2, 2, 3, Task::Binary).with_dropout(0.2).with_seed(3);
        let tcfg = TrainConfig {
            max_epochs: 5,
            patience: 5,
            seed: 4,
            ..TrainConfig::default()
        };
        let a = fit(&cfg, &tcfg, &separable(100, 1), &separable(50, 2)).unwrap();
        let b = fit(&cfg, &tcfg, &separable(100, 1), &separable(50, 2)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn best_metric_is_the_optimum() {
        let cfg = LeurnConfig::new(2, 1, 3, Task::Regression).with_seed(5);
        let tcfg = TrainConfig {
            max_epochs: 20,
            patience: 20,
            ..TrainConfig::default()
        };
        let (_, r) = fit(&cfg, &tcfg, &separable(80, 1), &separable(40, 2)).unwrap();
        let min = r.history.iter().map(|e| e.val_metric).fold(f64::INFINITY, f64::min);
        assert_eq!(r.best_metric, Some(min));
    }

    #[test]
    fn memorizes_sixteen_points() {
        let mut rng = SeededRng::new(12);
        let mut data = Vec::new();
        let mut y = Vec::new();
        for i in 0..16 {
            data.extend([rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]);
            y.push((i % 2) as f64);
        }
        let d = Dataset::new(Matrix::from_vec(16, 2, data).unwrap(), y).unwrap();
        let cfg = LeurnConfig::new(2, 2, 5, Task::Binary).with_seed(1);
        let tcfg = TrainConfig {
            lr: 3e-2,
            batch_size: 16,
            max_epochs: 2000,
            patience: 2000,
            seed: 1,
            metric: None,
        };
        let (_, r) = fit(&cfg, &tcfg, &d, &d).unwrap();
        let min = r.history.iter().map(|e| e.train_loss).fold(f64::INFINITY, f64::min);
        assert!(min < 0.05, "lowest train loss {min}");
    }

    #[test]
    fn split_errors() {
        let cfg = LeurnConfig::new(2, 1, 2, Task::Binary);
        let empty = Dataset::new(Matrix::zeros(0, 2), vec![]).unwrap();
        let tcfg = TrainConfig::default();
        assert!(matches!(fit(&cfg, &tcfg, &empty, &separable(10, 1)), Err(Error::Empty(_))));
        let mut bad = separable(10, 1);
        bad.y[0] = 2.0;
        assert!(fit(&cfg, &tcfg, &bad, &separable(10, 2)).is_err());
    }

    #[test]
    fn divergence_is_reported() {
        let cfg = LeurnConfig::new(2, 1, 2, Task::Regression);
        let mut d = separable(10, 1);
        d.y.iter_mut().for_each(|y| *y = 1e300);
        let tcfg = TrainConfig {
            max_epochs: 3,
            patience: 3,
            ..TrainConfig::default()
        };
        assert!(matches!(fit(&cfg, &tcfg, &d, &d), Err(Error::Diverged { epoch: 0 })));
    }
}
