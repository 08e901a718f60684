//! Benchmark matrix and mean-rank summary.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use darg_core::data::{stratified_split, SplitSpec};
use darg_core::{compute_metrics, fit_adaboost_baseline, fit_darg, DargConfig, DargEnsemble, Dataset, DargError};
use rayon::prelude::*;
use serde::Serialize;

pub const MODELS: [&str; 2] = ["adaboost", "darg"];
pub const METRICS: [&str; 4] = ["accuracy", "weighted_f1", "g_mean", "auc"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub dataset: String,
    pub model: String,
    pub seed: u64,
    pub accuracy: f64,
    pub weighted_f1: f64,
    pub g_mean: f64,
    pub auc: f64,
}

impl BenchRow {
    fn metric(&self, name: &str) -> f64 {
        match name {
            "accuracy" => self.accuracy,
            "weighted_f1" => self.weighted_f1,
            "g_mean" => self.g_mean,
            "auc" => self.auc,
            _ => unreachable!("unknown metric {name}"),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub datasets: Vec<String>,
    pub skipped: Vec<String>,
    pub seeds: Vec<u64>,
    pub rows: usize,
    /// Mean rank per model and metric over all (dataset, seed) cells; 1 is best,
    /// ties share the average rank.
    pub mean_rank: BTreeMap<String, BTreeMap<String, f64>>,
    pub mean_score: BTreeMap<String, BTreeMap<String, f64>>,
}

/// Dataset files in `dir`, sorted by name.
pub fn dataset_files(dir: &Path) -> Result<Vec<PathBuf>, DargError> {
    let entries = std::fs::read_dir(dir).map_err(|e| DargError::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && matches!(
                    p.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref(),
                    Some("dat" | "csv")
                )
        })
        .collect();
    files.sort();
    Ok(files)
}

fn score(model: &DargEnsemble, test: &Dataset) -> Result<[f64; 4], DargError> {
    let (pred, scores) = model.predict_with_scores(test.features.view())?;
    let m = compute_metrics(&test.labels, &pred, scores.view())?;
    Ok([m.accuracy, m.weighted_f1, m.g_mean, m.auc])
}

fn run_cell(name: &str, ds: &Dataset, base: &DargConfig, seed: u64, fraction: f64) -> Result<Vec<BenchRow>, DargError> {
    let spec = SplitSpec {
        train_fraction: fraction,
        seed,
        stratified: true,
    };
    let (train, test) = stratified_split(ds, &spec)?;
    let cfg = DargConfig {
        seed,
        ..base.clone()
    };
    let fits = [
        ("adaboost", fit_adaboost_baseline(&train, &cfg)?),
        ("darg", fit_darg(&train, &cfg)?),
    ];
    fits.iter()
        .map(|(model, fitted)| {
            let [accuracy, weighted_f1, g_mean, auc] = score(fitted, &test)?;
            Ok(BenchRow {
                dataset: name.to_string(),
                model: model.to_string(),
                seed,
                accuracy,
                weighted_f1,
                g_mean,
                auc,
            })
        })
        .collect()
}

/// Runs every (dataset, seed) cell in parallel and returns rows sorted by
/// (dataset, model, seed). A dataset whose fit fails is dropped with a warning.
pub fn run(datasets: &[(String, Dataset)], base: &DargConfig, seeds: &[u64], fraction: f64) -> (Vec<BenchRow>, Vec<String>) {
    let cells: Vec<(usize, u64)> = (0..datasets.len())
        .flat_map(|d| seeds.iter().map(move |&s| (d, s)))
        .collect();
    let results: Vec<(usize, Result<Vec<BenchRow>, DargError>)> = cells
        .par_iter()
        .map(|&(d, s)| (d, run_cell(&datasets[d].0, &datasets[d].1, base, s, fraction)))
        .collect();
    let mut failed = vec![false; datasets.len()];
    let mut rows = Vec::new();
    for (d, res) in results {
        match res {
            Ok(r) => rows.extend(r),
            Err(e) => {
                if !failed[d] {
                    log::warn!("skipping dataset {}: {e}", datasets[d].0);
                }
                failed[d] = true;
            }
        }
    }
    let failed_names: Vec<String> = (0..datasets.len())
        .filter(|&d| failed[d])
        .map(|d| datasets[d].0.clone())
        .collect();
    rows.retain(|r| !failed_names.contains(&r.dataset));
    rows.sort_by(|a, b| {
        (a.dataset.as_str(), a.model.as_str(), a.seed).cmp(&(b.dataset.as_str(), b.model.as_str(), b.seed))
    });
    (rows, failed_names)
}

/// Ranks the models within each (dataset, seed) cell for every metric. Higher
/// scores rank better; equal scores share the mean of their positions.
pub fn mean_ranks(rows: &[BenchRow]) -> BTreeMap<String, BTreeMap<String, f64>> {
    let mut cells: BTreeMap<(&str, u64), Vec<&BenchRow>> = BTreeMap::new();
    for r in rows {
        cells.entry((r.dataset.as_str(), r.seed)).or_default().push(r);
    }
    let mut sums: BTreeMap<String, BTreeMap<String, (f64, usize)>> = BTreeMap::new();
    for group in cells.values() {
        for metric in METRICS {
            for r in group {
                let v = r.metric(metric);
                let better = group.iter().filter(|o| o.metric(metric) > v).count() as f64;
                let equal = group.iter().filter(|o| o.metric(metric) == v).count() as f64;
                let rank = better + (equal + 1.0) / 2.0;
                let e = sums
                    .entry(r.model.clone())
                    .or_default()
                    .entry(metric.to_string())
                    .or_insert((0.0, 0));
                e.0 += rank;
                e.1 += 1;
            }
        }
    }
    sums.into_iter()
        .map(|(model, m)| (model, m.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect()))
        .collect()
}

pub fn mean_scores(rows: &[BenchRow]) -> BTreeMap<String, BTreeMap<String, f64>> {
    let mut out: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    for model in MODELS {
        let mine: Vec<&BenchRow> = rows.iter().filter(|r| r.model == model).collect();
        if mine.is_empty() {
            continue;
        }
        let entry = out.entry(model.to_string()).or_default();
        for metric in METRICS {
            entry.insert(
                metric.to_string(),
                mine.iter().map(|r| r.metric(metric)).sum::<f64>() / mine.len() as f64,
            );
        }
    }
    out
}

pub fn write_csv(path: &Path, rows: &[BenchRow]) -> Result<(), DargError> {
    let io = |e: std::io::Error| DargError::Io {
        path: path.to_path_buf(),
        source: e,
    };
    let mut w = csv::Writer::from_path(path).map_err(|e| io(e.into()))?;
    w.write_record(["dataset", "model", "seed", "accuracy", "weighted_f1", "g_mean", "auc"])
        .map_err(|e| io(e.into()))?;
    for r in rows {
        w.write_record([
            r.dataset.clone(),
            r.model.clone(),
            r.seed.to_string(),
            format!("{:.6}", r.accuracy),
            format!("{:.6}", r.weighted_f1),
            format!("{:.6}", r.g_mean),
            format!("{:.6}", r.auc),
        ])
        .map_err(|e| io(e.into()))?;
    }
    w.flush().map_err(io)
}
