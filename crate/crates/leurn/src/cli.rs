//! Command-line surface. Every command is deterministic given its flags,
//! input files and seeds.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use leurn_core::data::{half_moon, split, Cell, Dataset, HalfMoonSpec, RawTable, Schema, SplitRatios, SplitTag};
use leurn_core::explain::{feature_importance, report};
use leurn_core::hpo::{search, search_and_evaluate, SearchResult, SearchSpec, TableProblem};
use leurn_core::model::{forward, output_activation, LeurnConfig, Task};
use leurn_core::numeric::{derive_seed, SeededRng};
use leurn_core::rules::{extract_region, generate_raw, Region};
use leurn_core::similarity::{confidence, embed, rbf_similarity, EmbeddingIndex};
use leurn_core::train::{evaluate, fit, Metric, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::bundle::{load_bundle, save_bundle, ModelBundle, Provenance, BUNDLE_FORMAT_VERSION};
use crate::error::{io_err, CliError, Result};
use crate::exec::Rayon;
use crate::io::{align, cell_text, csv_writer, encode_features, encode_labeled, finish, read_table, resolve_row, write_record};

pub const SEARCH_LOG_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "leurn", version, about = "Univariate rule-learning networks for tabular data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model on a CSV file and save a bundle.
    Train(TrainArgs),
    /// Sequential depth/quantization/dropout search plus the repeated-split protocol.
    Hpo(HpoArgs),
    /// Per-row model outputs.
    Predict(PredictArgs),
    /// Task metric on a labeled CSV file.
    Evaluate(EvaluateArgs),
    /// Rule-level explanation of one row.
    Explain(ExplainArgs),
    /// Per-feature importance over a CSV file.
    Importance(DataArgs),
    /// Decision region containing one row.
    Region(RegionArgs),
    /// Sample rows from the decision region of one row.
    Generate(GenerateArgs),
    /// Embedding similarity of two rows.
    Similar(SimilarArgs),
    /// Per-row confidence against the training embeddings.
    Confidence(ConfidenceArgs),
    /// Write a toy dataset.
    Toydata(ToyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    Binary,
    Multiclass,
    Regression,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Auroc,
    Accuracy,
    Rmse,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Auroc => Metric::Auroc,
            MetricArg::Accuracy => Metric::Accuracy,
            MetricArg::Rmse => Metric::Rmse,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Structured,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub target: String,
    /// Task kind; inferred from the target column when omitted.
    #[arg(long, value_enum)]
    pub task: Option<TaskArg>,
    /// Depth (number of rule layers after the first).
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Quantization regions.
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    /// Dropout rate on embeddings.
    #[arg(long, default_value_t = 0.0)]
    pub r: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 300)]
    pub epochs: usize,
    #[arg(long, default_value_t = 128)]
    pub batch: usize,
    #[arg(long, default_value_t = 30)]
    pub patience: usize,
    /// Share of rows held out for validation.
    #[arg(long, default_value_t = 0.2)]
    pub val_ratio: f64,
    #[arg(long, value_enum)]
    pub metric: Option<MetricArg>,
    /// Skip building the embedding index used by `confidence`.
    #[arg(long)]
    pub no_index: bool,
    /// Provenance timestamp (seconds since the Unix epoch); defaults to
    /// SOURCE_DATE_EPOCH when set, otherwise omitted.
    #[arg(long)]
    pub timestamp: Option<u64>,
    #[arg(long, default_value = "model.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct HpoArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub target: String,
    #[arg(long, value_enum)]
    pub task: Option<TaskArg>,
    /// JSON search settings; omitted fields take their defaults.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Overrides the master seed from --spec.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the final run count from --spec.
    #[arg(long)]
    pub final_runs: Option<usize>,
    /// Search only; skip the repeated-split protocol.
    #[arg(long)]
    pub no_final: bool,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Search log path; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Defaults to the metric the model was selected with.
    #[arg(long, value_enum)]
    pub metric: Option<MetricArg>,
}

#[derive(Debug, Args)]
pub struct RowArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Row index into --data, or comma-separated feature values in column order.
    #[arg(long, allow_hyphen_values = true)]
    pub row: String,
    #[arg(long)]
    pub data: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExplainArgs {
    #[command(flatten)]
    pub row: RowArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RegionArgs {
    #[command(flatten)]
    pub row: RowArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub row: RowArgs,
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimilarArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub row_a: String,
    #[arg(long, allow_hyphen_values = true)]
    pub row_b: String,
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// RBF width; defaults to the index's gamma or 1 / embedding length.
    #[arg(long)]
    pub gamma: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ConfidenceArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Build the embedding index from this CSV instead of the bundle's.
    #[arg(long)]
    pub index_data: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ToyKind {
    Halfmoon,
}

#[derive(Debug, Args)]
pub struct ToyArgs {
    #[arg(long, value_enum, default_value_t = ToyKind::Halfmoon)]
    pub kind: ToyKind,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
    /// Rotation in degrees.
    #[arg(long, default_value_t = 0.0)]
    pub rotation: f64,
    /// Extra uniform noise columns.
    #[arg(long, default_value_t = 0)]
    pub noise_features: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Versioned search log written by `hpo`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchLog {
    pub format_version: u32,
    pub spec: SearchSpec,
    pub result: SearchResult,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Hpo(a) => cmd_hpo(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Explain(a) => cmd_explain(a),
        Command::Importance(a) => cmd_importance(a),
        Command::Region(a) => cmd_region(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Similar(a) => cmd_similar(a),
        Command::Confidence(a) => cmd_confidence(a),
        Command::Toydata(a) => cmd_toydata(a),
    }
}

fn infer_schema(table: &RawTable, target: &str, task: Option<TaskArg>) -> Result<Schema> {
    let task = match task {
        None => None,
        Some(TaskArg::Binary) => Some(Task::Binary),
        Some(TaskArg::Regression) => Some(Task::Regression),
        Some(TaskArg::Multiclass) => {
            let idx = table
                .column_index(target)
                .ok_or_else(|| CliError::Usage(format!("target column '{target}' not found")))?;
            let levels: BTreeSet<String> = table.column(idx).filter_map(Cell::as_level).collect();
            Some(Task::Multiclass { classes: levels.len() })
        }
    };
    Ok(Schema::infer(table, target, task)?)
}

/// Provenance timestamp: the explicit flag, else SOURCE_DATE_EPOCH, else none.
fn resolve_timestamp(flag: Option<u64>) -> Result<Option<u64>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("SOURCE_DATE_EPOCH") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("SOURCE_DATE_EPOCH '{v}' is not an integer"))),
        Err(_) => Ok(None),
    }
}

/// Fits a model on `table` with a seeded train/validation split.
pub fn train_bundle(table: &RawTable, schema: &Schema, a: &TrainArgs) -> Result<ModelBundle> {
    if !(a.val_ratio > 0.0 && a.val_ratio < 1.0) {
        return Err(CliError::Usage(format!("--val-ratio must lie in (0, 1), got {}", a.val_ratio)));
    }
    let ratios = SplitRatios {
        train: 1.0 - a.val_ratio,
        val: a.val_ratio,
        test: 0.0,
    };
    let strata: Option<Vec<usize>> = if schema.task.is_classification() {
        Some(
            table
                .rows
                .iter()
                .map(|r| schema.encode_target(&r[schema.target]).map(|y| y.map_or(0, |v| v as usize)))
                .collect::<std::result::Result<_, _>>()?,
        )
    } else {
        None
    };
    let tags = split(table.len(), ratios, derive_seed(a.seed, 0), strata.as_deref())?;
    let (data, pre) = leurn_core::data::fit_transform(table, schema, &tags)?;
    let cfg = LeurnConfig::new(
        data.train.n_features(),
        a.d,
        LeurnConfig::normalize_regions(a.k),
        schema.task,
    )
    .with_dropout(a.r)
    .with_seed(derive_seed(a.seed, 1));
    let tcfg = TrainConfig {
        lr: a.lr,
        batch_size: a.batch,
        max_epochs: a.epochs,
        patience: a.patience.min(a.epochs),
        seed: derive_seed(a.seed, 2),
        metric: a.metric.map(Metric::from),
    };
    let (params, report) = fit(&cfg, &tcfg, &data.train, &data.val)?;
    let index = if a.no_index {
        None
    } else {
        Some(EmbeddingIndex::build(&params, &cfg, &data.train, None)?)
    };
    let n_val = tags.iter().filter(|t| **t == SplitTag::Val).count();
    Ok(ModelBundle {
        format_version: BUNDLE_FORMAT_VERSION,
        config: cfg,
        params,
        preprocessor: pre,
        schema: schema.clone(),
        index,
        provenance: Provenance {
            seed: a.seed,
            train: tcfg,
            metric: report.metric,
            val_metric: report.best_metric,
            best_epoch: report.best_epoch,
            n_train: data.train.len(),
            n_val,
            timestamp: resolve_timestamp(a.timestamp)?,
        },
    })
}

fn cmd_train(a: TrainArgs) -> Result<()> {
    let table = read_table(&a.data)?;
    let schema = infer_schema(&table, &a.target, a.task)?;
    let bundle = train_bundle(&table, &schema, &a)?;
    save_bundle(&bundle, &a.out)?;
    let p = &bundle.provenance;
    println!(
        "trained d={} k={} r={} on {} rows; best validation {} {} at epoch {}; saved {}",
        bundle.config.depth,
        bundle.config.regions,
        bundle.config.dropout,
        p.n_train,
        p.metric.name(),
        p.val_metric.map_or_else(|| "n/a".to_string(), |m| format!("{m}")),
        p.best_epoch.map_or_else(|| "n/a".to_string(), |e| e.to_string()),
        a.out.display()
    );
    Ok(())
}

fn cmd_hpo(a: HpoArgs) -> Result<()> {
    let mut spec = match &a.spec {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(io_err(p))?;
            serde_json::from_str(&text).map_err(|source| CliError::Json {
                path: p.clone(),
                source,
            })?
        }
        None => SearchSpec::default(),
    };
    if let Some(s) = a.seed {
        spec.seed = s;
    }
    if let Some(n) = a.final_runs {
        spec.final_runs = n;
    }
    let table = read_table(&a.data)?;
    let schema = infer_schema(&table, &a.target, a.task)?;
    let problem = TableProblem {
        table: &table,
        schema: &schema,
    };
    let run = || {
        if a.no_final {
            search(&problem, &spec, &Rayon)
        } else {
            search_and_evaluate(&problem, &spec, &Rayon)
        }
    };
    let result = match a.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?
            .install(run)?,
        None => run()?,
    };
    let best = result.best;
    let summary = match &result.final_protocol {
        Some(f) => format!(
            "; test {} {:.4} ± {:.4} over {} runs",
            f.metric.name(),
            f.mean,
            f.std,
            f.runs.len()
        ),
        None => String::new(),
    };
    eprintln!(
        "selected d={} k={} r={} after {} trainings{summary}",
        best.depth,
        best.regions,
        best.dropout,
        result.log.len()
    );
    let log = SearchLog {
        format_version: SEARCH_LOG_FORMAT_VERSION,
        spec,
        result,
    };
    let mut text = serde_json::to_string_pretty(&log).expect("search log serializes");
    text.push('\n');
    match &a.out {
        Some(p) => std::fs::write(p, text).map_err(io_err(p))?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Header names for `predict` output.
fn output_columns(bundle: &ModelBundle) -> Vec<String> {
    let mut cols = vec!["prediction".to_string()];
    match bundle.config.task {
        Task::Binary => cols.push(format!("p_{}", bundle.schema.classes[1])),
        Task::Multiclass { .. } => cols.extend(bundle.schema.classes.iter().map(|c| format!("p_{c}"))),
        Task::Regression => {}
    }
    cols
}

fn prediction_label(bundle: &ModelBundle, out: &[f64]) -> String {
    match bundle.config.task {
        Task::Binary => bundle.schema.classes[usize::from(out[0] >= 0.5)].clone(),
        Task::Multiclass { .. } => {
            let best = (0..out.len())
                .max_by(|&a, &b| out[a].total_cmp(&out[b]).then(b.cmp(&a)))
                .unwrap_or(0);
            bundle.schema.classes[best].clone()
        }
        Task::Regression => format!("{}", out[0]),
    }
}

fn cmd_predict(a: PredictArgs) -> Result<()> {
    let bundle = load_bundle(&a.model)?;
    let table = align(&read_table(&a.data)?, &bundle.schema)?;
    let data = encode_features(&bundle.preprocessor, &table)?;
    let out = a.out.as_deref();
    let mut w = csv_writer(out)?;
    write_record(&mut w, out, output_columns(&bundle))?;
    for i in 0..data.len() {
        let trace = forward(&bundle.params, &bundle.config, data.row(i))?;
        let y = output_activation(bundle.config.task, &trace.logits);
        let mut rec = vec![prediction_label(&bundle, &y)];
        if bundle.config.task.is_classification() {
            rec.extend(y.iter().map(|v| format!("{v}")));
        }
        write_record(&mut w, out, rec)?;
    }
    finish(w, out)
}

fn cmd_evaluate(a: EvaluateArgs) -> Result<()> {
    let bundle = load_bundle(&a.model)?;
    let table = align(&read_table(&a.data)?, &bundle.schema)?;
    let data = encode_labeled(&bundle.preprocessor, &bundle.schema, &table)?;
    let metric = a.metric.map_or(bundle.provenance.metric, Metric::from);
    let value = evaluate(&bundle.params, &bundle.config, &data, metric)?;
    println!("metric,value");
    println!("{},{value}", metric.name());
    Ok(())
}

fn load_row(bundle: &ModelBundle, arg: &str, data: Option<&Path>) -> Result<Vec<Cell>> {
    let table = data.map(read_table).transpose()?;
    resolve_row(arg, table.as_ref(), &bundle.schema)
}

fn standardize_row(bundle: &ModelBundle, row: &[Cell]) -> Result<Vec<f64>> {
    Ok(bundle.preprocessor.transform_row(row)?.0)
}

fn cmd_explain(a: ExplainArgs) -> Result<()> {
    let bundle = load_bundle(&a.row.model)?;
    let row = load_row(&bundle, &a.row.row, a.row.data.as_deref())?;
    let rep = report(&bundle.params, &bundle.config, &row, &bundle.preprocessor)?;
    match a.format {
        Format::Text => print!("{}", rep.to_text()),
        Format::Structured => println!("{}", serde_json::to_string_pretty(&rep).expect("report serializes")),
    }
    Ok(())
}

fn cmd_importance(a: DataArgs) -> Result<()> {
    let bundle = load_bundle(&a.model)?;
    let table = align(&read_table(&a.data)?, &bundle.schema)?;
    let data = encode_features(&bundle.preprocessor, &table)?;
    let imp = feature_importance(&bundle.params, &bundle.config, &data)?;
    let names = bundle.preprocessor.output_names();
    let out = a.out.as_deref();
    let mut w = csv_writer(out)?;
    write_record(&mut w, out, ["feature", "importance", "normalized"])?;
    for ((name, s), n) in names.iter().zip(&imp.scores).zip(imp.normalized()) {
        write_record(&mut w, out, [name.clone(), format!("{s}"), format!("{n}")])?;
    }
    finish(w, out)
}

fn bundle_region(bundle: &ModelBundle, x: &[f64]) -> Result<Region> {
    let (mut region, _) = extract_region(&bundle.params, &bundle.config, x)?;
    region.set_units(&bundle.preprocessor.affines())?;
    Ok(region)
}

/// One line per input: raw-unit interval, then standardized interval.
pub fn region_text(region: &Region, names: &[String]) -> String {
    let mut out = String::new();
    for (name, b) in names.iter().zip(&region.features) {
        let _ = writeln!(
            out,
            "{name}: {} <= x < {}  (standardized {} <= z < {})",
            b.raw_lower, b.raw_upper, b.lower, b.upper
        );
    }
    out
}

fn cmd_region(a: RegionArgs) -> Result<()> {
    let bundle = load_bundle(&a.row.model)?;
    let row = load_row(&bundle, &a.row.row, a.row.data.as_deref())?;
    let region = bundle_region(&bundle, &standardize_row(&bundle, &row)?)?;
    match a.format {
        Format::Text => print!("{}", region_text(&region, &bundle.preprocessor.output_names())),
        Format::Structured => println!("{}", serde_json::to_string_pretty(&region).expect("region serializes")),
    }
    Ok(())
}

fn cmd_generate(a: GenerateArgs) -> Result<()> {
    let bundle = load_bundle(&a.row.model)?;
    let row = load_row(&bundle, &a.row.row, a.row.data.as_deref())?;
    let region = bundle_region(&bundle, &standardize_row(&bundle, &row)?)?;
    let target = bundle.schema.target;
    let out = a.out.as_deref();
    let mut w = csv_writer(out)?;
    let header = bundle
        .schema
        .columns
        .iter()
        .enumerate()
        .filter(|(c, _)| *c != target)
        .map(|(_, col)| col.name.clone());
    write_record(&mut w, out, header)?;
    let mut rng = SeededRng::new(a.seed);
    for _ in 0..a.count {
        let cells = generate_raw(&region, &bundle.preprocessor, &mut rng)?;
        let rec = cells
            .iter()
            .enumerate()
            .filter(|(c, _)| *c != target)
            .map(|(_, cell)| cell_text(cell));
        write_record(&mut w, out, rec)?;
    }
    finish(w, out)
}

fn cmd_similar(a: SimilarArgs) -> Result<()> {
    let bundle = load_bundle(&a.model)?;
    let table = a.data.as_deref().map(read_table).transpose()?;
    let mut embeddings = Vec::with_capacity(2);
    for arg in [&a.row_a, &a.row_b] {
        let row = resolve_row(arg, table.as_ref(), &bundle.schema)?;
        embeddings.push(embed(&bundle.params, &bundle.config, &standardize_row(&bundle, &row)?)?);
    }
    let gamma = a
        .gamma
        .or(bundle.index.as_ref().map(|i| i.gamma))
        .unwrap_or(1.0 / bundle.config.embedding_len() as f64);
    println!("{}", rbf_similarity(&embeddings[0], &embeddings[1], gamma)?);
    Ok(())
}

fn cmd_confidence(a: ConfidenceArgs) -> Result<()> {
    let bundle = load_bundle(&a.model)?;
    let index = match (&a.index_data, &bundle.index) {
        (Some(p), _) => {
            let table = align(&read_table(p)?, &bundle.schema)?;
            let data: Dataset = encode_features(&bundle.preprocessor, &table)?;
            EmbeddingIndex::build(&bundle.params, &bundle.config, &data, None)?
        }
        (None, Some(index)) => index.clone(),
        (None, None) => {
            return Err(CliError::Usage(format!(
                "bundle {} has no embedding index; retrain without --no-index or pass --index-data <csv>",
                a.model.display()
            )))
        }
    };
    let table = align(&read_table(&a.data)?, &bundle.schema)?;
    let data = encode_features(&bundle.preprocessor, &table)?;
    let out = a.out.as_deref();
    let mut w = csv_writer(out)?;
    write_record(&mut w, out, ["row", "confidence"])?;
    for i in 0..data.len() {
        let c = confidence(&bundle.params, &bundle.config, &index, data.row(i))?;
        write_record(&mut w, out, [i.to_string(), format!("{c}")])?;
    }
    finish(w, out)
}

fn cmd_toydata(a: ToyArgs) -> Result<()> {
    let ToyKind::Halfmoon = a.kind;
    let data = half_moon(HalfMoonSpec {
        n: a.n,
        noise: a.noise,
        rotation_deg: a.rotation,
        noise_features: a.noise_features,
        seed: a.seed,
    })?;
    let out = a.out.as_deref();
    let mut w = csv_writer(out)?;
    let mut header = vec!["x0".to_string(), "x1".to_string()];
    header.extend((0..a.noise_features).map(|i| format!("noise{i}")));
    header.push("y".to_string());
    write_record(&mut w, out, &header)?;
    for i in 0..data.len() {
        let mut rec: Vec<String> = data.row(i).iter().map(|v| format!("{v}")).collect();
        rec.push(format!("{}", data.y[i]));
        write_record(&mut w, out, rec)?;
    }
    finish(w, out)
}
