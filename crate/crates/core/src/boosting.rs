//! The boosting loop: weighted trees, density- and confidence-damped weight
//! updates, voting weights, and the hand-off to dynamic oversampling.

use std::path::Path;

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, ScalerParams};
use crate::error::{DargError, Result};
use crate::geometry::{density_from_counts, global_mutual_counts, within_class_mutual_counts};
use crate::hardness::{classification_hardness, confidence_factor, HardnessProfile};
use crate::sampling::{
    dynamic_sample_epoch, EpochSamplingReport, SamplerState, SamplingParams, DEFAULT_MAX_COMPONENTS,
};
use crate::tree::{argmax, fit_tree, DecisionTree};

pub const MODEL_SCHEMA: &str = "darg-model/1";

/// Error rates are kept strictly inside (0, 1) so the voting weight stays finite.
pub const ERROR_CLAMP: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaMode {
    /// `β = ½ ln((1 − ε)/ε)` from the weighted error.
    #[default]
    Classic,
    /// Error computed on damped weights `w_i e^{−δ_i(1−ρ_i)}`, which minimizes the
    /// epoch's exponential loss in closed form.
    Regularized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeighborScope {
    #[default]
    WithinClass,
    Global,
}

/// Switches for ablation. With everything off the loop is plain AdaBoost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Components {
    /// Density factor ρ; when off, ρ ≡ 1.
    pub density: bool,
    /// Confidence factor δ; when off, δ ≡ 0.
    pub confidence: bool,
    pub sampling: bool,
}

impl Default for Components {
    fn default() -> Self {
        Self::all()
    }
}

impl Components {
    pub fn all() -> Self {
        Self {
            density: true,
            confidence: true,
            sampling: true,
        }
    }

    pub fn none() -> Self {
        Self {
            density: false,
            confidence: false,
            sampling: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DargConfig {
    pub n_estimators: usize,
    pub k: usize,
    pub density_threshold: f64,
    pub max_depth: usize,
    pub seed: u64,
    #[serde(default)]
    pub beta_mode: BetaMode,
    #[serde(default)]
    pub samme_correction: bool,
    #[serde(default)]
    pub neighbor_scope: NeighborScope,
    #[serde(default)]
    pub components: Components,
}

impl Default for DargConfig {
    fn default() -> Self {
        Self {
            n_estimators: 50,
            k: 8,
            density_threshold: 0.5,
            max_depth: 4,
            seed: 0,
            beta_mode: BetaMode::Classic,
            samme_correction: false,
            neighbor_scope: NeighborScope::WithinClass,
            components: Components::all(),
        }
    }
}

impl DargConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(DargError::InvalidArgument(msg));
        if self.n_estimators == 0 {
            return bad("n_estimators must be positive".into());
        }
        if self.k == 0 {
            return bad("k must be positive".into());
        }
        if self.max_depth == 0 {
            return bad("max_depth must be positive".into());
        }
        if !(self.density_threshold > 0.0 && self.density_threshold < 1.0) {
            return bad(format!(
                "density_threshold must lie in (0, 1), got {}",
                self.density_threshold
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DargEnsemble {
    pub schema: String,
    pub config: DargConfig,
    pub scaler: ScalerParams,
    pub class_names: Vec<String>,
    #[serde(default)]
    pub feature_names: Vec<String>,
    pub trees: Vec<DecisionTree>,
    pub betas: Vec<f64>,
}

/// What happened in one epoch, for inspection and tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochTrace {
    pub epoch: usize,
    pub n_samples: usize,
    pub error: f64,
    pub beta: f64,
    pub hardness_mean: f64,
    pub hardness_std: f64,
    /// Sum of the weights after the update and any sampling, before the next epoch.
    pub weight_sum: f64,
    pub sampling: Option<EpochSamplingReport>,
}

/// `Σ w_i` over misclassified samples divided by `Σ w_i`, clamped into
/// `[1e-10, 1 − 1e-10]`.
pub fn weighted_error(pred: &[usize], y: &[usize], w: &[f64]) -> f64 {
    let mut wrong = 0.0;
    let mut total = 0.0;
    for ((p, t), &wi) in pred.iter().zip(y).zip(w) {
        total += wi;
        if p != t {
            wrong += wi;
        }
    }
    let eps = if total > 0.0 { wrong / total } else { 0.5 };
    eps.clamp(ERROR_CLAMP, 1.0 - ERROR_CLAMP)
}

/// `β = ½ ln((1 − ε)/ε)`, optionally plus `½ ln(c − 1)`, floored at 0.
pub fn voting_weight(error: f64, n_classes: usize, samme_correction: bool) -> f64 {
    let e = error.clamp(ERROR_CLAMP, 1.0 - ERROR_CLAMP);
    let mut beta = 0.5 * ((1.0 - e) / e).ln();
    if samme_correction && n_classes > 2 {
        beta += 0.5 * ((n_classes - 1) as f64).ln();
    }
    beta.max(0.0)
}

/// `e^{−δ_i(1−ρ_i)}`.
fn dampener(delta: f64, rho: f64) -> f64 {
    (-delta * (1.0 - rho)).exp()
}

/// Voting weight that minimizes `Σ_i w_i e^{−δ_i(1−ρ_i)} e^{−β y_i h_i}` over
/// `β ≥ 0`, for `y_i h_i = ±1`.
pub fn regularized_beta(
    w: &[f64],
    delta: &[f64],
    rho: &[f64],
    correct: &[bool],
    n_classes: usize,
    samme_correction: bool,
) -> f64 {
    let mut right = 0.0;
    let mut wrong = 0.0;
    for i in 0..w.len() {
        let a = w[i] * dampener(delta[i], rho[i]);
        if correct[i] {
            right += a;
        } else {
            wrong += a;
        }
    }
    let total = right + wrong;
    let eps = if total > 0.0 { wrong / total } else { 0.5 };
    voting_weight(eps, n_classes, samme_correction)
}

/// `w'_i = e^{−δ_i(1−ρ_i)} · w_i · e^{−β [correct_i]}`, then normalized to sum 1.
pub fn update_weights(w: &[f64], delta: &[f64], rho: &[f64], beta: f64, correct: &[bool]) -> Vec<f64> {
    let raw: Vec<f64> = (0..w.len())
        .map(|i| {
            let shrink = if correct[i] { (-beta).exp() } else { 1.0 };
            dampener(delta[i], rho[i]) * w[i] * shrink
        })
        .collect();
    normalize(raw)
}

fn normalize(mut w: Vec<f64>) -> Vec<f64> {
    let total: f64 = w.iter().sum();
    if total > 0.0 && total.is_finite() {
        w.iter_mut().for_each(|v| *v /= total);
    } else {
        let u = 1.0 / w.len() as f64;
        w.iter_mut().for_each(|v| *v = u);
    }
    w
}

fn check_trainable(train: &Dataset) -> Result<()> {
    if train.n_samples() == 0 {
        return Err(DargError::Fit("training set is empty".into()));
    }
    let present = train.class_counts().iter().filter(|&&n| n > 0).count();
    if present < 2 {
        return Err(DargError::Fit(format!(
            "need at least two classes with samples, found {present}"
        )));
    }
    Ok(())
}

fn standardized(train: &Dataset) -> Result<(Dataset, ScalerParams)> {
    let scaler = ScalerParams::fit(train.features.view());
    let mut scaled = train.clone();
    scaled.features = scaler.transform(train.features.view())?;
    Ok((scaled, scaler))
}

fn density(ds: &Dataset, cfg: &DargConfig) -> Result<Vec<f64>> {
    if !cfg.components.density {
        return Ok(vec![1.0; ds.n_samples()]);
    }
    let counts = match cfg.neighbor_scope {
        NeighborScope::WithinClass => {
            within_class_mutual_counts(ds.features.view(), &ds.labels, ds.n_classes(), cfg.k)?
        }
        NeighborScope::Global => global_mutual_counts(ds.features.view(), cfg.k)?,
    };
    Ok(density_from_counts(counts).rho)
}

pub fn fit_darg(train: &Dataset, cfg: &DargConfig) -> Result<DargEnsemble> {
    fit_darg_traced(train, cfg).map(|(model, _)| model)
}

/// [`fit_darg`] that also returns one [`EpochTrace`] per epoch.
pub fn fit_darg_traced(train: &Dataset, cfg: &DargConfig) -> Result<(DargEnsemble, Vec<EpochTrace>)> {
    cfg.validate()?;
    check_trainable(train)?;
    let (mut current, scaler) = standardized(train)?;
    let c = current.n_classes();
    let m = cfg.n_estimators;
    let mut w = vec![1.0 / current.n_samples() as f64; current.n_samples()];
    let mut sampler = SamplerState::new(current.class_counts(), m);
    let sampling = SamplingParams {
        density_threshold: cfg.density_threshold,
        max_components: DEFAULT_MAX_COMPONENTS,
        seed: cfg.seed,
    };

    let mut trees = Vec::with_capacity(m);
    let mut betas = Vec::with_capacity(m);
    let mut trace = Vec::with_capacity(m);
    for epoch in 1..=m {
        let tree = fit_tree(current.features.view(), &current.labels, &w, c, cfg.max_depth)?;
        let proba = tree.predict_proba(current.features.view())?;
        let pred: Vec<usize> = proba.axis_iter(Axis(0)).map(|r| argmax(r.as_slice().unwrap())).collect();
        let correct: Vec<bool> = pred.iter().zip(&current.labels).map(|(p, y)| p == y).collect();

        let rho = density(&current, cfg)?;
        let mut profile: HardnessProfile =
            confidence_factor(classification_hardness(proba.view(), &current.labels)?);
        if !cfg.components.confidence {
            profile.delta.iter_mut().for_each(|d| *d = 0.0);
        }

        let error = weighted_error(&pred, &current.labels, &w);
        let beta = match cfg.beta_mode {
            BetaMode::Classic => voting_weight(error, c, cfg.samme_correction),
            BetaMode::Regularized => {
                regularized_beta(&w, &profile.delta, &rho, &correct, c, cfg.samme_correction)
            }
        };
        w = update_weights(&w, &profile.delta, &rho, beta, &correct);

        let mut report = None;
        if cfg.components.sampling {
            let (augmented, rep) =
                dynamic_sample_epoch(&current, &rho, &profile, &mut sampler, &sampling, epoch)?;
            if augmented.n_samples() > current.n_samples() {
                w = extend_weights(&w, &current.labels, &augmented.labels);
                current = augmented;
            }
            report = Some(rep);
        }

        trace.push(EpochTrace {
            epoch,
            n_samples: current.n_samples(),
            error,
            beta,
            hardness_mean: profile.mean,
            hardness_std: profile.std_dev,
            weight_sum: w.iter().sum(),
            sampling: report,
        });
        trees.push(tree);
        betas.push(beta);
    }

    let model = DargEnsemble {
        schema: MODEL_SCHEMA.to_string(),
        config: cfg.clone(),
        scaler,
        class_names: train.class_names.clone(),
        feature_names: train.feature_names.clone(),
        trees,
        betas,
    };
    Ok((model, trace))
}

/// Gives each appended sample the mean weight of the existing samples of its class,
/// then renormalizes.
fn extend_weights(w: &[f64], old_labels: &[usize], new_labels: &[usize]) -> Vec<f64> {
    let c = new_labels.iter().chain(old_labels).copied().max().map_or(0, |v| v + 1);
    let mut sum = vec![0.0; c];
    let mut count = vec![0usize; c];
    for (&wi, &y) in w.iter().zip(old_labels) {
        sum[y] += wi;
        count[y] += 1;
    }
    let mut out = w.to_vec();
    out.extend(new_labels[old_labels.len()..].iter().map(|&y| {
        if count[y] > 0 {
            sum[y] / count[y] as f64
        } else {
            0.0
        }
    }));
    normalize(out)
}

/// Classic AdaBoost with the same trees, error and voting weight, and no dampener
/// or sampling.
pub fn fit_adaboost_baseline(train: &Dataset, cfg: &DargConfig) -> Result<DargEnsemble> {
    cfg.validate()?;
    check_trainable(train)?;
    let (current, scaler) = standardized(train)?;
    let c = current.n_classes();
    let mut w = vec![1.0 / current.n_samples() as f64; current.n_samples()];
    let mut trees = Vec::with_capacity(cfg.n_estimators);
    let mut betas = Vec::with_capacity(cfg.n_estimators);
    for _ in 0..cfg.n_estimators {
        let tree = fit_tree(current.features.view(), &current.labels, &w, c, cfg.max_depth)?;
        let pred = tree.predict(current.features.view())?;
        let error = weighted_error(&pred, &current.labels, &w);
        let beta = voting_weight(error, c, cfg.samme_correction);
        let raw: Vec<f64> = w
            .iter()
            .zip(pred.iter().zip(&current.labels))
            .map(|(&wi, (p, y))| if p == y { wi * (-beta).exp() } else { wi })
            .collect();
        w = normalize(raw);
        trees.push(tree);
        betas.push(beta);
    }
    Ok(DargEnsemble {
        schema: MODEL_SCHEMA.to_string(),
        config: cfg.clone(),
        scaler,
        class_names: train.class_names.clone(),
        feature_names: train.feature_names.clone(),
        trees,
        betas,
    })
}

impl DargEnsemble {
    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    fn scaled(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.scaler.transform(x)
    }

    /// Labels by β-weighted vote (ties to the lowest class) and scores by
    /// β-weighted averaging of tree probabilities. Takes raw, unscaled features.
    pub fn predict_with_scores(&self, x: ArrayView2<'_, f64>) -> Result<(Vec<usize>, Array2<f64>)> {
        let xs = self.scaled(x)?;
        let (n, c) = (xs.nrows(), self.n_classes());
        let mut votes = Array2::<f64>::zeros((n, c));
        let mut scores = Array2::<f64>::zeros((n, c));
        for (tree, &beta) in self.trees.iter().zip(&self.betas) {
            if beta == 0.0 {
                continue;
            }
            for (i, row) in xs.axis_iter(Axis(0)).enumerate() {
                let dist = tree.leaf_distribution(row);
                votes[[i, argmax(dist)]] += beta;
                for (k, &p) in dist.iter().enumerate() {
                    scores[[i, k]] += beta * p;
                }
            }
        }
        let total: f64 = self.betas.iter().sum();
        if total > 0.0 {
            scores.mapv_inplace(|v| v / total);
        } else {
            scores.fill(1.0 / c as f64);
        }
        let labels = votes
            .axis_iter(Axis(0))
            .map(|r| argmax(r.as_slice().unwrap()))
            .collect();
        Ok((labels, scores))
    }

    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Vec<usize>> {
        self.predict_with_scores(x).map(|(labels, _)| labels)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| DargError::Model(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: DargEnsemble =
            serde_json::from_str(text).map_err(|e| DargError::Model(e.to_string()))?;
        if model.schema != MODEL_SCHEMA {
            return Err(DargError::Model(format!(
                "unsupported schema `{}`, expected `{MODEL_SCHEMA}`",
                model.schema
            )));
        }
        if model.trees.len() != model.betas.len() {
            return Err(DargError::Model("trees and betas differ in length".into()));
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| DargError::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| DargError::io(path, e))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::Node;
    use ndarray::array;
    use proptest::prelude::*;

    fn toy(n0: usize, n1: usize) -> Dataset {
        let n = n0 + n1;
        let labels: Vec<usize> = (0..n).map(|i| usize::from(i >= n0)).collect();
        let features = Array2::from_shape_fn((n, 2), |(i, j)| {
            let base = if labels[i] == 1 { 2.0 } else { 0.0 };
            base + ((i * 7 + j * 3) % 11) as f64 / 10.0
        });
        Dataset::new(features, labels, vec!["a".into(), "b".into()], vec!["x".into(), "y".into()]).unwrap()
    }

    #[test]
    fn weighted_error_examples() {
        assert_eq!(weighted_error(&[0, 1], &[0, 1], &[0.5, 0.5]), ERROR_CLAMP);
        assert_eq!(weighted_error(&[0, 0], &[0, 1], &[0.5, 0.5]), 0.5);
        assert!((weighted_error(&[0, 0], &[0, 1], &[0.7, 0.3]) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn voting_weight_examples() {
        assert_eq!(voting_weight(0.5, 2, false), 0.0);
        assert!((voting_weight(0.1, 2, false) - 0.5 * 9f64.ln()).abs() < 1e-12);
        assert!((voting_weight(0.1, 2, false) - 1.098_612).abs() < 1e-6);
        assert_eq!(voting_weight(0.7, 2, false), 0.0);
        assert!((voting_weight(0.5, 3, true) - 0.5 * 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn update_weight_arithmetic() {
        let pre = dampener(0.5, 0.2) * 0.1 * (-1.0f64).exp();
        assert!((pre - 0.024_660_0).abs() < 5e-7);
        let w = update_weights(&[0.5, 0.5], &[0.0, 0.0], &[0.3, 0.3], 0.0, &[false, false]);
        assert_eq!(w, vec![0.5, 0.5]);
    }

    #[test]
    fn regularized_beta_reduces_and_clamps() {
        let w = [0.2, 0.3, 0.5];
        let correct = [true, false, true];
        let classic = voting_weight(weighted_error(&[0, 1, 0], &[0, 0, 0], &w), 2, false);
        assert_eq!(regularized_beta(&w, &[0.0; 3], &[0.4; 3], &correct, 2, false), classic);
        assert_eq!(regularized_beta(&w, &[0.3; 3], &[0.1; 3], &[false; 3], 2, false), 0.0);
    }

    #[test]
    fn ensemble_vote_ties_and_weights() {
        let leaf = |d: Vec<f64>| DecisionTree {
            nodes: vec![Node::Leaf { distribution: d }],
            max_depth: 1,
            n_features: 1,
            n_classes: 2,
        };
        let mut model = DargEnsemble {
            schema: MODEL_SCHEMA.into(),
            config: DargConfig::default(),
            scaler: ScalerParams::identity(1),
            class_names: vec!["a".into(), "b".into()],
            feature_names: vec!["x".into()],
            trees: vec![leaf(vec![0.0, 1.0]), leaf(vec![1.0, 0.0])],
            betas: vec![1.0, 1.0],
        };
        let x = array![[0.0]];
        assert_eq!(model.predict(x.view()).unwrap(), vec![0]);
        model.betas = vec![2.0, 1.0];
        let (labels, scores) = model.predict_with_scores(x.view()).unwrap();
        assert_eq!(labels, vec![1]);
        assert!((scores[[0, 1]] - 2.0 / 3.0).abs() < 1e-15);
        model.betas = vec![0.0, 0.0];
        assert_eq!(model.predict_with_scores(x.view()).unwrap().1, array![[0.5, 0.5]]);
        assert!(model.predict(array![[0.0, 1.0]].view()).is_err());
    }

    #[test]
    fn single_epoch_gives_single_tree() {
        let cfg = DargConfig { n_estimators: 1, ..DargConfig::default() };
        let model = fit_darg(&toy(30, 6), &cfg).unwrap();
        assert_eq!(model.trees.len(), 1);
    }

    #[test]
    fn balanced_data_never_samples() {
        let cfg = DargConfig { n_estimators: 5, ..DargConfig::default() };
        let (_, trace) = fit_darg_traced(&toy(20, 20), &cfg).unwrap();
        assert!(trace.iter().all(|t| t.n_samples == 40));
        assert!(trace
            .iter()
            .all(|t| t.sampling.as_ref().unwrap().total_generated() == 0));
    }

    #[test]
    fn reduction_to_baseline() {
        let ds = toy(40, 9);
        let cfg = DargConfig {
            n_estimators: 10,
            max_depth: 2,
            components: Components::none(),
            ..DargConfig::default()
        };
        let a = fit_darg(&ds, &cfg).unwrap();
        let b = fit_adaboost_baseline(&ds, &cfg).unwrap();
        assert_eq!(a.trees, b.trees);
        assert_eq!(a.betas.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                   b.betas.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn separable_data_is_fit_exactly() {
        let ds = toy(25, 25);
        let cfg = DargConfig { n_estimators: 5, max_depth: 1, ..DargConfig::default() };
        let model = fit_adaboost_baseline(&ds, &cfg).unwrap();
        assert_eq!(model.predict(ds.features.view()).unwrap(), ds.labels);
    }

    #[test]
    fn weights_stay_normalized_and_sampling_accumulates() {
        let ds = toy(60, 8);
        let cfg = DargConfig { n_estimators: 8, max_depth: 2, k: 4, ..DargConfig::default() };
        let (model, trace) = fit_darg_traced(&ds, &cfg).unwrap();
        assert!(model.betas.iter().all(|&b| b >= 0.0));
        for t in &trace {
            assert!((t.weight_sum - 1.0).abs() < 1e-9);
        }
        let generated: usize = trace.iter().map(|t| t.sampling.as_ref().unwrap().total_generated()).sum();
        assert!(generated <= 52);
        assert_eq!(trace.last().unwrap().n_samples, 68 + generated);
    }

    #[test]
    fn json_round_trip_and_schema_check() {
        let cfg = DargConfig { n_estimators: 3, ..DargConfig::default() };
        let model = fit_darg(&toy(20, 8), &cfg).unwrap();
        let back = DargEnsemble::from_json(&model.to_json().unwrap()).unwrap();
        assert_eq!(back, model);
        let tampered = model.to_json().unwrap().replace(MODEL_SCHEMA, "darg-model/0");
        assert!(matches!(DargEnsemble::from_json(&tampered), Err(DargError::Model(_))));
    }

    #[test]
    fn rejects_single_class_and_bad_config() {
        let mut ds = toy(5, 0);
        assert!(matches!(fit_darg(&ds, &DargConfig::default()), Err(DargError::Fit(_))));
        ds = toy(5, 5);
        let cfg = DargConfig { density_threshold: 1.0, ..DargConfig::default() };
        assert!(fit_darg(&ds, &cfg).is_err());
    }

    proptest! {
        #[test]
        fn dampener_bounds(
            w in prop::collection::vec(0.001f64..1.0, 1..30),
            seed in any::<u64>(),
            beta in 0.0f64..5.0,
        ) {
            let n = w.len();
            let delta: Vec<f64> = (0..n).map(|i| ((seed >> (i % 60)) & 0xf) as f64 / 16.0).collect();
            let rho: Vec<f64> = (0..n).map(|i| ((seed >> ((i + 7) % 60)) & 0x7) as f64 / 7.0).collect();
            let correct: Vec<bool> = (0..n).map(|i| (seed >> (i % 64)) & 1 == 1).collect();
            let out = update_weights(&w, &delta, &rho, beta, &correct);
            prop_assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            let scale: f64 = (0..n)
                .map(|i| dampener(delta[i], rho[i]) * w[i] * if correct[i] { (-beta).exp() } else { 1.0 })
                .sum();
            for i in 0..n {
                let ratio = out[i] * scale / w[i];
                let damp = dampener(delta[i], rho[i]);
                prop_assert!(damp <= 1.0);
                if correct[i] {
                    prop_assert!(ratio <= damp * (1.0 + 1e-12));
                } else {
                    prop_assert!((ratio - damp).abs() <= 1e-12 * damp.max(1.0));
                }
            }
        }
    }
}
