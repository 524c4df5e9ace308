//! Sequential grid search (depth, then quantization, then dropout) and the
//! repeated-split evaluation protocol.
//!
//! Every training draws its split, initialization and shuffling seeds from
//! the master seed and a counter, so results do not depend on the order in
//! which an [`Executor`] runs them.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::data::{fit_transform, split, Dataset, RawTable, Schema, SplitData, SplitRatios, SplitTag};
use crate::error::{Error, Result};
use crate::model::{LeurnConfig, LeurnParams, Task};
use crate::numeric::{derive_seed, math};
use crate::train::{evaluate, fit, Metric, TrainConfig};

const HOLDOUT_STREAM: u64 = 0;
const SEARCH_STREAM: u64 = 1;
const FINAL_STREAM: u64 = 2;

/// Grids and run counts of the search; omitted fields take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchSpec {
    pub depths: Vec<usize>,
    /// Quantization levels; a `1` is mapped to `2`.
    pub regions: Vec<usize>,
    pub dropouts: Vec<f64>,
    /// Trainings per configuration during the search.
    pub trainings: usize,
    /// Runs of the final protocol.
    pub final_runs: usize,
    pub seed: u64,
    pub ratios: SplitRatios,
    /// Optimizer settings; the seed field is replaced per run.
    pub train: TrainConfig,
}

impl Default for SearchSpec {
    fn default() -> Self {
        Self {
            depths: vec![0, 1, 2, 5, 10],
            regions: vec![2, 5, 10],
            dropouts: vec![0.0, 0.1, 0.3, 0.5, 0.7, 0.9],
            trainings: 5,
            final_runs: 20,
            seed: 0,
            ratios: SplitRatios::default(),
            train: TrainConfig::default(),
        }
    }
}

impl SearchSpec {
    /// Region grid after mapping `k = 1` to `k = 2` and removing duplicates.
    pub fn normalized_regions(&self) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::with_capacity(self.regions.len());
        for &k in &self.regions {
            let k = LeurnConfig::normalize_regions(k);
            if !out.contains(&k) {
                out.push(k);
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        fn sorted<T: PartialOrd>(name: &str, grid: &[T]) -> Result<()> {
            if grid.is_empty() {
                return Err(Error::Config(format!("{name} grid is empty")));
            }
            if grid.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::Config(format!("{name} grid must be strictly increasing")));
            }
            Ok(())
        }
        sorted("depth", &self.depths)?;
        sorted("region", &self.regions)?;
        sorted("dropout", &self.dropouts)?;
        if self.regions[0] == 0 {
            return Err(Error::Config("region grid must not contain 0".into()));
        }
        if let Some(r) = self.dropouts.iter().find(|r| !(0.0..1.0).contains(*r)) {
            return Err(Error::Config(format!("dropout {r} outside [0, 1)")));
        }
        if self.trainings == 0 || self.final_runs == 0 {
            return Err(Error::Config("training and final run counts must be at least 1".into()));
        }
        self.train.validate()
    }
}

/// One architecture setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub depth: usize,
    pub regions: usize,
    pub dropout: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Depth,
    Regions,
    Dropout,
}

/// One search training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingRecord {
    pub phase: Phase,
    pub config: Candidate,
    pub run: usize,
    pub seed: u64,
    /// Best validation metric; absent when the training failed.
    pub metric: Option<f64>,
    pub best_epoch: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Aggregate of one evaluated configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigResult {
    pub phase: Phase,
    pub config: Candidate,
    /// Per-run best validation metrics; `None` marks a failed run.
    pub metrics: Vec<Option<f64>>,
    /// Mean of `metrics`; absent when any run failed (the config then ranks worst).
    pub mean: Option<f64>,
}

impl ConfigResult {
    fn from_metrics(phase: Phase, config: Candidate, metrics: Vec<Option<f64>>) -> Self {
        let mean = mean_of(&metrics);
        Self {
            phase,
            config,
            metrics,
            mean,
        }
    }

    /// Mean with failures ranked as the worst metric value.
    pub fn score(&self, metric: Metric) -> f64 {
        self.mean.unwrap_or(metric.worst())
    }
}

fn mean_of(metrics: &[Option<f64>]) -> Option<f64> {
    let vals: Option<Vec<f64>> = metrics.iter().copied().collect();
    vals.map(|v| v.iter().sum::<f64>() / v.len() as f64)
}

/// Outcome of [`search`], with the final protocol when requested.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub metric: Metric,
    pub best: Candidate,
    /// Every evaluated configuration in evaluation order.
    pub trajectory: Vec<ConfigResult>,
    /// Every training in evaluation order.
    pub log: Vec<TrainingRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_protocol: Option<FinalResult>,
}

/// One run of the final protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalRun {
    pub run: usize,
    pub seed: u64,
    pub best_epoch: Option<usize>,
    pub val_metric: Option<f64>,
    pub test_metric: f64,
}

/// A model trained by the final protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct FinalModel {
    pub config: LeurnConfig,
    pub params: LeurnParams,
}

/// Test metric over repeated random splits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalResult {
    pub config: Candidate,
    pub metric: Metric,
    pub runs: Vec<FinalRun>,
    pub mean: f64,
    /// Population standard deviation of the per-run test metrics.
    pub std: f64,
    #[serde(skip)]
    pub models: Vec<FinalModel>,
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, math::sqrt(var))
}

/// Runs independent jobs, returning results in index order.
pub trait Executor: Sync {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync;
}

/// Runs jobs one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        (0..n).map(f).collect()
    }
}

/// A dataset that can be re-split and re-encoded per run.
pub trait Problem: Sync {
    fn task(&self) -> Task;
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    /// Class labels for stratified splitting; `None` for regression.
    fn strata(&self) -> Result<Option<Vec<usize>>>;
    /// Encodes the splits described by `tags`, fitting any preprocessing on
    /// the train rows only.
    fn materialize(&self, tags: &[SplitTag]) -> Result<SplitData>;
}

/// A raw table, re-preprocessed for every split.
#[derive(Debug, Clone)]
pub struct TableProblem<'a> {
    pub table: &'a RawTable,
    pub schema: &'a Schema,
}

impl Problem for TableProblem<'_> {
    fn task(&self) -> Task {
        self.schema.task
    }

    fn len(&self) -> usize {
        self.table.len()
    }

    fn strata(&self) -> Result<Option<Vec<usize>>> {
        if !self.schema.task.is_classification() {
            return Ok(None);
        }
        let labels = self
            .table
            .rows
            .iter()
            .enumerate()
            .map(|(r, row)| {
                self.schema.encode_target(&row[self.schema.target])?.map(|y| y as usize).ok_or_else(|| {
                    Error::Data(format!("missing target in data row {}", r + 1))
                })
            })
            .collect::<Result<Vec<usize>>>()?;
        Ok(Some(labels))
    }

    fn materialize(&self, tags: &[SplitTag]) -> Result<SplitData> {
        fit_transform(self.table, self.schema, tags).map(|(data, _)| data)
    }
}

/// An already numeric dataset, standardized with train-split moments per split.
#[derive(Debug, Clone)]
pub struct DatasetProblem<'a> {
    pub data: &'a Dataset,
    pub task: Task,
}

impl Problem for DatasetProblem<'_> {
    fn task(&self) -> Task {
        self.task
    }

    fn len(&self) -> usize {
        self.data.len()
    }

    fn strata(&self) -> Result<Option<Vec<usize>>> {
        Ok(self.task.is_classification().then(|| self.data.class_labels()))
    }

    fn materialize(&self, tags: &[SplitTag]) -> Result<SplitData> {
        if tags.len() != self.data.len() {
            return Err(Error::Shape(format!("{} split tags for {} rows", tags.len(), self.data.len())));
        }
        let mut train = self.data.select(tags, SplitTag::Train);
        let mut val = self.data.select(tags, SplitTag::Val);
        let mut test = self.data.select(tags, SplitTag::Test);
        if train.is_empty() {
            return Err(Error::Empty("training split".into()));
        }
        let moments: Vec<(f64, f64)> = train
            .column_moments()
            .into_iter()
            .map(|(m, s)| (m, if s > 0.0 { s } else { 1.0 }))
            .collect();
        for d in [&mut train, &mut val, &mut test] {
            d.standardize_with(&moments);
        }
        Ok(SplitData { train, val, test })
    }
}

/// Best validation metric of one training.
#[derive(Debug, Clone, PartialEq)]
struct Outcome {
    metric: Option<f64>,
    best_epoch: Option<usize>,
    error: Option<String>,
}

fn strata_subset(strata: &Option<Vec<usize>>, rows: &[usize]) -> Option<Vec<usize>> {
    strata.as_ref().map(|s| rows.iter().map(|&r| s[r]).collect())
}

/// Search-time tags: the master-seeded test share is held out for the whole
/// search and the remaining rows are re-split into train/validation by `seed`.
fn search_tags(
    n: usize,
    holdout: &[SplitTag],
    strata: &Option<Vec<usize>>,
    ratios: SplitRatios,
    seed: u64,
) -> Result<Vec<SplitTag>> {
    let pool: Vec<usize> = (0..n).filter(|&i| holdout[i] != SplitTag::Test).collect();
    let sub = split(pool.len(), ratios.without_test(), seed, strata_subset(strata, &pool).as_deref())?;
    let mut tags = vec![SplitTag::Test; n];
    for (&row, tag) in pool.iter().zip(sub) {
        tags[row] = tag;
    }
    Ok(tags)
}

fn model_config(candidate: Candidate, n_features: usize, task: Task, seed: u64) -> LeurnConfig {
    LeurnConfig::new(n_features, candidate.depth, candidate.regions, task)
        .with_dropout(candidate.dropout)
        .with_seed(seed)
}

fn train_once<P: Problem + ?Sized>(
    problem: &P,
    spec: &SearchSpec,
    holdout: &[SplitTag],
    strata: &Option<Vec<usize>>,
    candidate: Candidate,
    seed: u64,
) -> Outcome {
    let run = || -> Result<(f64, Option<usize>)> {
        let tags = search_tags(problem.len(), holdout, strata, spec.ratios, derive_seed(seed, 0))?;
        let data = problem.materialize(&tags)?;
        let cfg = model_config(candidate, data.train.n_features(), problem.task(), derive_seed(seed, 1));
        let tcfg = TrainConfig {
            seed: derive_seed(seed, 2),
            ..spec.train.clone()
        };
        let (_, report) = fit(&cfg, &tcfg, &data.train, &data.val)?;
        let metric = report
            .best_metric
            .filter(|m| m.is_finite())
            .ok_or_else(|| Error::NonFinite("no finite validation metric".into()))?;
        Ok((metric, report.best_epoch))
    };
    match run() {
        Ok((metric, best_epoch)) => Outcome {
            metric: Some(metric),
            best_epoch,
            error: None,
        },
        Err(e) => {
            log::warn!("training with {candidate:?} failed: {e}");
            Outcome {
                metric: None,
                best_epoch: None,
                error: Some(e.to_string()),
            }
        }
    }
}

/// Runs the three search phases, each stopping at the first configuration
/// whose mean is not strictly better than the incumbent's.
///
/// `train` evaluates one run of one configuration from its seed. The returned
/// records and trajectory are in evaluation order.
fn search_with<E, F>(spec: &SearchSpec, metric: Metric, exec: &E, train: F) -> Result<SearchResult>
where
    E: Executor + ?Sized,
    F: Fn(Candidate, u64) -> Outcome + Sync,
{
    spec.validate()?;
    let regions = spec.normalized_regions();
    let search_seed = derive_seed(spec.seed, SEARCH_STREAM);
    let mut trajectory: Vec<ConfigResult> = Vec::new();
    let mut log: Vec<TrainingRecord> = Vec::new();

    let mut evaluate_config = |phase: Phase, config: Candidate| -> ConfigResult {
        let base = trajectory.len() * spec.trainings;
        let seeds: Vec<u64> = (0..spec.trainings)
            .map(|j| derive_seed(search_seed, (base + j) as u64))
            .collect();
        let outcomes = exec.map(spec.trainings, |j| train(config, seeds[j]));
        let mut metrics = Vec::with_capacity(outcomes.len());
        for (j, o) in outcomes.into_iter().enumerate() {
            metrics.push(o.metric);
            log.push(TrainingRecord {
                phase,
                config,
                run: j,
                seed: seeds[j],
                metric: o.metric,
                best_epoch: o.best_epoch,
                error: o.error,
            });
        }
        let result = ConfigResult::from_metrics(phase, config, metrics);
        trajectory.push(result.clone());
        result
    };

    let mut sweep = |phase: Phase, configs: Vec<Candidate>| -> Candidate {
        let mut best = evaluate_config(phase, configs[0]);
        for &c in &configs[1..] {
            let r = evaluate_config(phase, c);
            if metric.improves(r.score(metric), best.score(metric)) {
                best = r;
            } else {
                break;
            }
        }
        best.config
    };

    let r_max = *spec.dropouts.last().expect("validated non-empty");
    let phase1: Vec<Candidate> = spec
        .depths
        .iter()
        .map(|&depth| Candidate {
            depth,
            regions: regions[0],
            dropout: r_max,
        })
        .collect();
    let d_best = sweep(Phase::Depth, phase1).depth;
    let phase2: Vec<Candidate> = regions
        .iter()
        .map(|&k| Candidate {
            depth: d_best,
            regions: k,
            dropout: r_max,
        })
        .collect();
    let k_best = sweep(Phase::Regions, phase2).regions;
    let phase3: Vec<Candidate> = spec
        .dropouts
        .iter()
        .rev()
        .map(|&dropout| Candidate {
            depth: d_best,
            regions: k_best,
            dropout,
        })
        .collect();
    let best = sweep(Phase::Dropout, phase3);

    Ok(SearchResult {
        metric,
        best,
        trajectory,
        log,
        final_protocol: None,
    })
}

/// Sequential depth → quantization → dropout search.
///
/// Each configuration is scored by the mean best-validation metric of
/// `spec.trainings` trainings on fresh train/validation splits; the test
/// share chosen by the master seed is never touched. Failed trainings rank
/// their configuration worst and the search continues.
pub fn search<P, E>(problem: &P, spec: &SearchSpec, exec: &E) -> Result<SearchResult>
where
    P: Problem + ?Sized,
    E: Executor + ?Sized,
{
    spec.validate()?;
    let metric = spec.train.metric_for(problem.task());
    let strata = problem.strata()?;
    let holdout = split(
        problem.len(),
        spec.ratios,
        derive_seed(spec.seed, HOLDOUT_STREAM),
        strata.as_deref(),
    )?;
    search_with(spec, metric, exec, |candidate, seed| {
        train_once(problem, spec, &holdout, &strata, candidate, seed)
    })
}

/// Trains `runs` models on fresh random train/validation/test splits and
/// reports the test metric of each best-validation checkpoint.
pub fn final_protocol<P, E>(
    problem: &P,
    candidate: Candidate,
    spec: &SearchSpec,
    runs: usize,
    exec: &E,
) -> Result<FinalResult>
where
    P: Problem + ?Sized,
    E: Executor + ?Sized,
{
    spec.train.validate()?;
    if runs == 0 {
        return Err(Error::Config("final protocol needs at least one run".into()));
    }
    if spec.ratios.test <= 0.0 {
        return Err(Error::Config("final protocol needs a positive test ratio".into()));
    }
    let candidate = Candidate {
        regions: LeurnConfig::normalize_regions(candidate.regions),
        ..candidate
    };
    let metric = spec.train.metric_for(problem.task());
    let strata = problem.strata()?;
    let final_seed = derive_seed(spec.seed, FINAL_STREAM);
    let results = exec.map(runs, |run| -> Result<(FinalRun, FinalModel)> {
        let seed = derive_seed(final_seed, run as u64);
        let tags = split(problem.len(), spec.ratios, derive_seed(seed, 0), strata.as_deref())?;
        let data = problem.materialize(&tags)?;
        let cfg = model_config(candidate, data.train.n_features(), problem.task(), derive_seed(seed, 1));
        let tcfg = TrainConfig {
            seed: derive_seed(seed, 2),
            ..spec.train.clone()
        };
        let (params, report) = fit(&cfg, &tcfg, &data.train, &data.val)?;
        let test_metric = evaluate(&params, &cfg, &data.test, metric)?;
        Ok((
            FinalRun {
                run,
                seed,
                best_epoch: report.best_epoch,
                val_metric: report.best_metric,
                test_metric,
            },
            FinalModel { config: cfg, params },
        ))
    });
    let mut out_runs = Vec::with_capacity(runs);
    let mut models = Vec::with_capacity(runs);
    for r in results {
        let (run, model) = r?;
        out_runs.push(run);
        models.push(model);
    }
    let tests: Vec<f64> = out_runs.iter().map(|r| r.test_metric).collect();
    let (mean, std) = mean_std(&tests);
    Ok(FinalResult {
        config: candidate,
        metric,
        runs: out_runs,
        mean,
        std,
        models,
    })
}

/// [`search`] followed by [`final_protocol`] on the selected configuration.
pub fn search_and_evaluate<P, E>(problem: &P, spec: &SearchSpec, exec: &E) -> Result<SearchResult>
where
    P: Problem + ?Sized,
    E: Executor + ?Sized,
{
    let mut result = search(problem, spec, exec)?;
    result.final_protocol = Some(final_protocol(problem, result.best, spec, spec.final_runs, exec)?);
    Ok(result)
}
