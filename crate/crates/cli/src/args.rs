use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use darg_core::{BetaMode, DargConfig, NeighborScope};

#[derive(Debug, Parser)]
#[command(name = "darg", version, about = "Density- and confidence-guided boosting for imbalanced multiclass data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit on a stratified split, save the model, print held-out metrics.
    Train(TrainArgs),
    /// Score a saved model on a dataset.
    Evaluate(EvaluateArgs),
    /// Compare against AdaBoost over every dataset in a directory and several seeds.
    Benchmark(BenchmarkArgs),
    /// Print the per-epoch sampling report of a training run.
    InspectRegions(InspectArgs),
    /// Random hyperparameter search scored by cross-validated weighted F1.
    Search(SearchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Keel,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BetaArg {
    Classic,
    Regularized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScopeArg {
    WithinClass,
    Global,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Dataset file (KEEL `.dat` or delimited text).
    #[arg(long)]
    pub data: PathBuf,
    /// Input format; inferred from the extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Label column for CSV input: a header name or a 0-based index. Defaults to the last column.
    #[arg(long)]
    pub label_column: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, default_value_t = 8)]
    pub k: usize,
    #[arg(long, default_value_t = 4)]
    pub max_depth: usize,
    #[arg(long, default_value_t = 0.5)]
    pub density_threshold: f64,
    #[arg(long, default_value_t = 50)]
    pub n_estimators: usize,
    #[arg(long, value_enum, default_value_t = BetaArg::Classic)]
    pub beta_mode: BetaArg,
    #[arg(long)]
    pub samme_correction: bool,
    #[arg(long, value_enum, default_value_t = ScopeArg::WithinClass)]
    pub neighbor_scope: ScopeArg,
}

impl ModelArgs {
    pub fn config(&self, seed: u64) -> DargConfig {
        DargConfig {
            n_estimators: self.n_estimators,
            k: self.k,
            density_threshold: self.density_threshold,
            max_depth: self.max_depth,
            seed,
            beta_mode: match self.beta_mode {
                BetaArg::Classic => BetaMode::Classic,
                BetaArg::Regularized => BetaMode::Regularized,
            },
            samme_correction: self.samme_correction,
            neighbor_scope: match self.neighbor_scope {
                ScopeArg::WithinClass => NeighborScope::WithinClass,
                ScopeArg::Global => NeighborScope::Global,
            },
            ..DargConfig::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.8)]
    pub train_fraction: f64,
    /// Where to write the model JSON.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub model: PathBuf,
    /// Also write the metrics JSON here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// Directory of datasets; `.dat` files load as KEEL, `.csv` as delimited text.
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Comma-separated seeds and half-open ranges, e.g. `0,3,5..8`.
    #[arg(long, default_value = "0..5", value_parser = parse_seeds)]
    pub seeds: SeedList,
    #[arg(long, default_value_t = 0.8)]
    pub train_fraction: f64,
    /// CSV output; one row per (dataset, model, seed).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.8)]
    pub train_fraction: f64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 20)]
    pub iters: usize,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the search table here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parsed `--seeds` value, kept as one argument so clap does not treat it as a
/// repeated flag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedList(pub Vec<u64>);

pub fn parse_seeds(text: &str) -> Result<SeedList, String> {
    let mut seeds = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let a: u64 = a.trim().parse().map_err(|_| format!("bad seed range `{part}`"))?;
            let b: u64 = b.trim().parse().map_err(|_| format!("bad seed range `{part}`"))?;
            if a >= b {
                return Err(format!("empty seed range `{part}`"));
            }
            seeds.extend(a..b);
        } else {
            seeds.push(part.parse().map_err(|_| format!("bad seed `{part}`"))?);
        }
    }
    if seeds.is_empty() {
        return Err("no seeds given".into());
    }
    Ok(SeedList(seeds))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_lists_and_ranges() {
        assert_eq!(parse_seeds("0..3").unwrap().0, vec![0, 1, 2]);
        assert_eq!(parse_seeds("4, 1,7..9").unwrap().0, vec![4, 1, 7, 8]);
        assert!(parse_seeds("3..3").is_err());
        assert!(parse_seeds("x").is_err());
        assert!(parse_seeds("").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
