//! Classification hardness and the Gaussian confidence factor.

use ndarray::{ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{DargError, Result};

/// Below this spread every sample is considered equally hard and all δ are 0.
pub const SIGMA_FLOOR: f64 = 1e-12;

/// Largest double below 1; δ saturates here instead of rounding up to 1.
const DELTA_CAP: f64 = 1.0 - f64::EPSILON / 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardnessProfile {
    pub hardness: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation of `hardness`.
    pub std_dev: f64,
    pub delta: Vec<f64>,
}

/// `H_i = (1 - p_true + max_{j != true} p_j) / 2` for every row.
pub fn classification_hardness(probs: ArrayView2<'_, f64>, labels: &[usize]) -> Result<Vec<f64>> {
    if probs.nrows() != labels.len() {
        return Err(DargError::DimensionMismatch {
            expected: labels.len(),
            got: probs.nrows(),
        });
    }
    if probs.ncols() < 2 {
        return Err(DargError::InvalidArgument(
            "hardness needs at least two classes".into(),
        ));
    }
    probs
        .axis_iter(Axis(0))
        .zip(labels)
        .enumerate()
        .map(|(i, (row, &y))| {
            let sum: f64 = row.sum();
            if y >= row.len() || (sum - 1.0).abs() > 1e-9 || row.iter().any(|&p| p < 0.0) {
                return Err(DargError::InvalidArgument(format!(
                    "row {i} is not a probability distribution over {} classes",
                    row.len()
                )));
            }
            let other = row
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != y)
                .map(|(_, &p)| p)
                .fold(f64::NEG_INFINITY, f64::max);
            Ok(((1.0 - row[y] + other) / 2.0).clamp(0.0, 1.0))
        })
        .collect()
}

/// Maps hardness to `δ_i = 1 - exp(-(H_i - μ)^2 / (2σ^2))` using the population
/// mean and standard deviation over all samples.
pub fn confidence_factor(hardness: Vec<f64>) -> HardnessProfile {
    let n = hardness.len().max(1) as f64;
    let mean = hardness.iter().sum::<f64>() / n;
    let std_dev = (hardness.iter().map(|h| (h - mean).powi(2)).sum::<f64>() / n).sqrt();
    let delta = if std_dev < SIGMA_FLOOR {
        vec![0.0; hardness.len()]
    } else {
        let two_var = 2.0 * std_dev * std_dev;
        hardness
            .iter()
            .map(|h| (-(-(h - mean).powi(2) / two_var).exp_m1()).min(DELTA_CAP))
            .collect()
    };
    HardnessProfile {
        hardness,
        mean,
        std_dev,
        delta,
    }
}
