//! Multiclass metrics, stratified cross-validation and seeded random search.

mod metrics;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use metrics::{binary_auc, compute_metrics, MetricsReport};

use crate::boosting::{fit_darg, DargConfig};
use crate::data::{stratified_folds, Dataset};
use crate::error::{DargError, Result};
use crate::rng::rng_for;

const SEARCH_STREAM: u64 = 0x5EA7;

/// Fits on all but one fold and evaluates on the held-out fold, for each fold.
/// Folds are fitted in parallel; results are returned in fold order.
pub fn cross_validate(ds: &Dataset, cfg: &DargConfig, folds: usize, seed: u64) -> Result<Vec<MetricsReport>> {
    let assignment = stratified_folds(&ds.labels, ds.n_classes(), folds, seed)?;
    (0..folds)
        .into_par_iter()
        .map(|f| {
            let train: Vec<usize> = (0..ds.n_samples()).filter(|&i| assignment[i] != f).collect();
            let test: Vec<usize> = (0..ds.n_samples()).filter(|&i| assignment[i] == f).collect();
            let (train, test) = (ds.select(&train), ds.select(&test));
            let model = fit_darg(&train, cfg)?;
            let (pred, scores) = model.predict_with_scores(test.features.view())?;
            compute_metrics(&test.labels, &pred, scores.view())
        })
        .collect()
}

pub fn mean_of(reports: &[MetricsReport], metric: impl Fn(&MetricsReport) -> f64) -> f64 {
    reports.iter().map(metric).sum::<f64>() / reports.len().max(1) as f64
}

/// Inclusive ranges for the searched hyperparameters. The density threshold is
/// drawn from `min..=max` in steps of `step`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub k: (usize, usize),
    pub max_depth: (usize, usize),
    pub density_threshold: (f64, f64),
    pub density_step: f64,
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self {
            k: (2, 20),
            max_depth: (1, 50),
            density_threshold: (0.10, 0.90),
            density_step: 0.05,
        }
    }
}

impl SearchSpace {
    pub fn density_grid(&self) -> Vec<f64> {
        let (lo, hi) = self.density_threshold;
        let steps = ((hi - lo) / self.density_step + 1e-9).floor() as usize;
        (0..=steps)
            .map(|i| ((lo + i as f64 * self.density_step) * 1e6).round() / 1e6)
            .collect()
    }

    fn validate(&self) -> Result<()> {
        let empty = self.k.0 > self.k.1
            || self.max_depth.0 > self.max_depth.1
            || self.k.0 == 0
            || self.max_depth.0 == 0
            || self.density_step.is_nan() || self.density_step <= 0.0
            || self.density_threshold.0 > self.density_threshold.1;
        if empty {
            return Err(DargError::InvalidArgument("empty search space".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchTrial {
    pub k: usize,
    pub max_depth: usize,
    pub density_threshold: f64,
    pub mean_accuracy: f64,
    pub mean_weighted_f1: f64,
    pub mean_g_mean: f64,
    pub mean_auc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub best: DargConfig,
    pub best_index: usize,
    pub trials: Vec<SearchTrial>,
}

/// Uniform random search scored by mean cross-validated weighted F1. Ties keep
/// the earliest trial.
pub fn random_search(
    ds: &Dataset,
    base: &DargConfig,
    space: &SearchSpace,
    iters: usize,
    folds: usize,
    seed: u64,
) -> Result<SearchResult> {
    space.validate()?;
    if iters == 0 {
        return Err(DargError::InvalidArgument("iters must be at least 1".into()));
    }
    let grid = space.density_grid();
    let mut rng = rng_for(&[SEARCH_STREAM, seed]);
    let candidates: Vec<DargConfig> = (0..iters)
        .map(|_| DargConfig {
            k: rng.random_range(space.k.0..=space.k.1),
            max_depth: rng.random_range(space.max_depth.0..=space.max_depth.1),
            density_threshold: grid[rng.random_range(0..grid.len())],
            ..base.clone()
        })
        .collect();

    let mut trials = Vec::with_capacity(iters);
    for cfg in &candidates {
        let reports = cross_validate(ds, cfg, folds, seed)?;
        trials.push(SearchTrial {
            k: cfg.k,
            max_depth: cfg.max_depth,
            density_threshold: cfg.density_threshold,
            mean_accuracy: mean_of(&reports, |r| r.accuracy),
            mean_weighted_f1: mean_of(&reports, |r| r.weighted_f1),
            mean_g_mean: mean_of(&reports, |r| r.g_mean),
            mean_auc: mean_of(&reports, |r| r.auc),
        });
    }
    let mut best_index = 0;
    for (i, t) in trials.iter().enumerate() {
        if t.mean_weighted_f1 > trials[best_index].mean_weighted_f1 {
            best_index = i;
        }
    }
    Ok(SearchResult {
        best: candidates[best_index].clone(),
        best_index,
        trials,
    })
}
