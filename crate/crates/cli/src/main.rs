mod args;
mod benchmark;

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use darg_core::data::{load_csv, load_keel, stratified_split, LabelColumn, SplitSpec};
use darg_core::eval::{random_search, SearchSpace};
use darg_core::{compute_metrics, fit_darg, fit_darg_traced, DargEnsemble, DargError, Dataset, MetricsReport};
use serde::Serialize;

use args::{BenchmarkArgs, Cli, Command, DataArgs, EvaluateArgs, Format, InspectArgs, SearchArgs, TrainArgs};

/// Caps the worker pool used for benchmark cells, folds and neighbor search.
const THREADS_ENV: &str = "DARG_THREADS";

#[derive(Debug)]
enum CliError {
    Usage(String),
    Core(DargError),
}

impl From<DargError> for CliError {
    fn from(e: DargError) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Core(e) => e.kind(),
        }
    }

    fn exit_code(&self) -> u8 {
        match self.kind() {
            "usage" | "invalid_input" => 2,
            "parse" | "model" => 3,
            "fit" => 4,
            _ => 5,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) => m.clone(),
            CliError::Core(e) => e.to_string(),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn emit_error(err: &CliError) -> ExitCode {
    let body = serde_json::json!({ "error": { "kind": err.kind(), "message": err.message() } });
    let _ = writeln!(std::io::stderr().lock(), "{body}");
    ExitCode::from(err.exit_code())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            return emit_error(&CliError::Usage(e.to_string().trim_end().to_string()));
        }
    };
    if let Err(e) = configure_threads() {
        return emit_error(&e);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => emit_error(&e),
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Train(a) => train(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Benchmark(a) => run_benchmark(a),
        Command::InspectRegions(a) => inspect(a),
        Command::Search(a) => search(a),
    }
}

fn infer_format(path: &Path) -> Format {
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("dat") | Some("keel") => Format::Keel,
        _ => Format::Csv,
    }
}

fn load(path: &Path, format: Option<Format>, label_column: Option<&str>) -> CliResult<Dataset> {
    let ds = match format.unwrap_or_else(|| infer_format(path)) {
        Format::Keel => {
            if label_column.is_some() {
                return Err(CliError::Usage("--label-column only applies to CSV input".into()));
            }
            load_keel(path)?
        }
        Format::Csv => {
            let column = match label_column {
                Some(c) => c.parse::<LabelColumn>().unwrap_or(LabelColumn::Last),
                None => LabelColumn::Last,
            };
            load_csv(path, &column)?
        }
    };
    Ok(ds)
}

fn load_data(a: &DataArgs) -> CliResult<Dataset> {
    load(&a.data, a.format, a.label_column.as_deref())
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn write_json<T: Serialize>(value: &T, out: Option<&Path>) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| DargError::Model(e.to_string()))? + "\n";
    match out {
        Some(path) => std::fs::write(path, &text).map_err(|e| DargError::Io {
            path: path.to_path_buf(),
            source: e,
        })?,
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| DargError::Io {
                path: "<stdout>".into(),
                source: e,
            })?,
    }
    Ok(())
}

fn split(ds: &Dataset, fraction: f64, seed: u64) -> CliResult<(Dataset, Dataset)> {
    let spec = SplitSpec {
        train_fraction: fraction,
        seed,
        stratified: true,
    };
    Ok(stratified_split(ds, &spec)?)
}

fn score(model: &DargEnsemble, test: &Dataset) -> CliResult<MetricsReport> {
    let (pred, scores) = model.predict_with_scores(test.features.view())?;
    Ok(compute_metrics(&test.labels, &pred, scores.view())?)
}

#[derive(Serialize)]
struct TrainOutput<'a> {
    dataset: String,
    n_train: usize,
    n_test: usize,
    seed: u64,
    model: String,
    metrics: &'a MetricsReport,
}

fn train(a: TrainArgs) -> CliResult<()> {
    let ds = load_data(&a.data)?;
    let (train, test) = split(&ds, a.train_fraction, a.seed)?;
    let model = fit_darg(&train, &a.model.config(a.seed))?;
    model.save(&a.out)?;
    let metrics = score(&model, &test)?;
    write_json(
        &TrainOutput {
            dataset: dataset_name(&a.data.data),
            n_train: train.n_samples(),
            n_test: test.n_samples(),
            seed: a.seed,
            model: a.out.display().to_string(),
            metrics: &metrics,
        },
        None,
    )
}

/// Re-indexes `ds` labels into the model's class order by class name.
fn align_classes(ds: Dataset, model: &DargEnsemble) -> CliResult<Dataset> {
    if ds.n_features() != model.scaler.dim() {
        return Err(DargError::DimensionMismatch {
            expected: model.scaler.dim(),
            got: ds.n_features(),
        }
        .into());
    }
    let mapping: Vec<usize> = ds
        .class_names
        .iter()
        .map(|name| {
            model.class_names.iter().position(|m| m == name).ok_or_else(|| {
                CliError::Core(DargError::InvalidArgument(format!(
                    "class `{name}` is unknown to the model"
                )))
            })
        })
        .collect::<CliResult<_>>()?;
    let labels = ds.labels.iter().map(|&y| mapping[y]).collect();
    Ok(Dataset::new(ds.features, labels, model.class_names.clone(), ds.feature_names)?)
}

#[derive(Serialize)]
struct EvaluateOutput<'a> {
    dataset: String,
    n_samples: usize,
    metrics: &'a MetricsReport,
}

fn evaluate(a: EvaluateArgs) -> CliResult<()> {
    let model = DargEnsemble::load(&a.model)?;
    let ds = align_classes(load_data(&a.data)?, &model)?;
    let metrics = score(&model, &ds)?;
    let out = EvaluateOutput {
        dataset: dataset_name(&a.data.data),
        n_samples: ds.n_samples(),
        metrics: &metrics,
    };
    if let Some(path) = &a.out {
        write_json(&out, Some(path))?;
    }
    write_json(&out, None)
}

fn run_benchmark(a: BenchmarkArgs) -> CliResult<()> {
    let mut datasets = Vec::new();
    let mut skipped = Vec::new();
    for path in benchmark::dataset_files(&a.data)? {
        let name = dataset_name(&path);
        match load(&path, None, None) {
            Ok(ds) => datasets.push((name, ds)),
            Err(e) => {
                log::warn!("skipping unreadable dataset {}: {}", path.display(), e.message());
                skipped.push(name);
            }
        }
    }
    if datasets.is_empty() {
        return Err(CliError::Core(DargError::InvalidArgument(format!(
            "no readable datasets in {}",
            a.data.display()
        ))));
    }
    let base = a.model.config(0);
    base.validate()?;
    let (rows, failed) = benchmark::run(&datasets, &base, &a.seeds.0, a.train_fraction);
    skipped.extend(failed);
    skipped.sort();
    benchmark::write_csv(&a.out, &rows)?;
    let summary = benchmark::Summary {
        datasets: datasets
            .iter()
            .map(|(n, _)| n.clone())
            .filter(|n| !skipped.contains(n))
            .collect(),
        skipped,
        seeds: a.seeds.0.clone(),
        rows: rows.len(),
        mean_rank: benchmark::mean_ranks(&rows),
        mean_score: benchmark::mean_scores(&rows),
    };
    write_json(&summary, None)
}

#[derive(Serialize)]
struct InspectOutput {
    dataset: String,
    seed: u64,
    n_train: usize,
    class_names: Vec<String>,
    scheduler_sum: f64,
    epochs: Vec<darg_core::sampling::EpochSamplingReport>,
}

fn inspect(a: InspectArgs) -> CliResult<()> {
    let ds = load_data(&a.data)?;
    let (train, _) = split(&ds, a.train_fraction, a.seed)?;
    let (_, trace) = fit_darg_traced(&train, &a.model.config(a.seed))?;
    let epochs: Vec<_> = trace.into_iter().filter_map(|t| t.sampling).collect();
    let out = InspectOutput {
        dataset: dataset_name(&a.data.data),
        seed: a.seed,
        n_train: train.n_samples(),
        class_names: train.class_names.clone(),
        scheduler_sum: epochs.iter().map(|e| e.scheduler_weight).sum(),
        epochs,
    };
    write_json(&out, a.out.as_deref())
}

fn search(a: SearchArgs) -> CliResult<()> {
    let ds = load_data(&a.data)?;
    let result = random_search(&ds, &a.model.config(a.seed), &SearchSpace::default(), a.iters, a.folds, a.seed)?;
    write_json(&result, a.out.as_deref())
}
