//! Diagonal-covariance Gaussian mixtures fitted by EM, with BIC model selection.

use std::f64::consts::PI;

use ndarray::{ArrayView1, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::{rng_for, DargRng};

pub const VARIANCE_FLOOR: f64 = 1e-6;
pub const MAX_EM_ITERS: usize = 100;
pub const LOGLIK_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_COMPONENTS: usize = 10;

/// Smallest effective sample count a component may hold in a BIC candidate.
pub const MIN_COMPONENT_MASS: f64 = 2.0;

const GMM_STREAM: u64 = 0x6A11;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub n_components: usize,
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// Component with the highest responsibility for each sample (lowest index on ties).
    pub assignments: Vec<usize>,
    pub log_likelihood: f64,
    pub bic: f64,
    /// Log-likelihood after each EM iteration.
    pub loglik_trace: Vec<f64>,
}

impl ClusterModel {
    pub fn n_params(n_components: usize, d: usize) -> usize {
        2 * n_components * d + n_components - 1
    }

    /// True when some component carries less than two samples' worth of
    /// responsibility, i.e. it has collapsed onto a single point at the variance
    /// floor and its likelihood is not meaningful.
    pub fn is_degenerate(&self) -> bool {
        let n = self.assignments.len() as f64;
        self.n_components > 1 && self.weights.iter().any(|w| w * n < MIN_COMPONENT_MASS)
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_components];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

fn squared_distance(a: ArrayView1<'_, f64>, b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

/// k-means++ seeding: first center uniform, the rest proportional to squared
/// distance from the nearest chosen center.
fn kmeans_pp(x: ArrayView2<'_, f64>, g: usize, rng: &mut DargRng) -> Vec<Vec<f64>> {
    let n = x.nrows();
    let mut centers: Vec<Vec<f64>> = vec![x.row(rng.random_range(0..n)).to_vec()];
    let mut nearest: Vec<f64> = (0..n).map(|i| squared_distance(x.row(i), &centers[0])).collect();
    while centers.len() < g {
        let total: f64 = nearest.iter().sum();
        let pick = if total <= 0.0 {
            rng.random_range(0..n)
        } else {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &d) in nearest.iter().enumerate() {
                if target < d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            chosen
        };
        let c = x.row(pick).to_vec();
        for (i, d) in nearest.iter_mut().enumerate() {
            *d = d.min(squared_distance(x.row(i), &c));
        }
        centers.push(c);
    }
    centers
}

/// Per-component terms of the diagonal log-density that do not depend on the sample.
fn component_terms(variances: &[Vec<f64>], weights: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let offsets = variances
        .iter()
        .zip(weights)
        .map(|(var, w)| w.ln() - 0.5 * var.iter().map(|v| (2.0 * PI * v).ln()).sum::<f64>())
        .collect();
    let half_precisions = variances
        .iter()
        .map(|var| var.iter().map(|v| 0.5 / v).collect())
        .collect();
    (offsets, half_precisions)
}

/// Fills `resp` (row-major n×g) with responsibilities and returns the log-likelihood.
fn e_step(
    rows: &[f64],
    d: usize,
    means: &[Vec<f64>],
    variances: &[Vec<f64>],
    weights: &[f64],
    resp: &mut [f64],
) -> f64 {
    let g = means.len();
    let (offsets, half_prec) = component_terms(variances, weights);
    let mut ll = 0.0;
    for (row, r) in rows.chunks_exact(d).zip(resp.chunks_exact_mut(g)) {
        for s in 0..g {
            let quad: f64 = row
                .iter()
                .zip(&means[s])
                .zip(&half_prec[s])
                .map(|((x, m), hp)| (x - m) * (x - m) * hp)
                .sum();
            r[s] = offsets[s] - quad;
        }
        let lse = log_sum_exp(r);
        ll += lse;
        r.iter_mut().for_each(|v| *v = (*v - lse).exp());
    }
    ll
}

/// EM for a `g`-component diagonal mixture.
pub fn fit_gmm(x: ArrayView2<'_, f64>, g: usize, rng: &mut DargRng) -> ClusterModel {
    let (n, d) = x.dim();
    assert!(n >= 1 && g >= 1 && g <= n, "need 1 <= g <= n");
    let rows: Vec<f64> = x.iter().copied().collect();

    let global_var: Vec<f64> = x
        .axis_iter(Axis(1))
        .map(|col| {
            let m = col.sum() / n as f64;
            (col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n as f64).max(VARIANCE_FLOOR)
        })
        .collect();
    let mut means = kmeans_pp(x, g, rng);
    let mut variances = vec![global_var; g];
    let mut weights = vec![1.0 / g as f64; g];

    let mut resp = vec![0.0; n * g];
    let mut ll = e_step(&rows, d, &means, &variances, &weights, &mut resp);
    let mut trace = vec![ll];
    let mut sums = vec![0.0; d];
    let mut squares = vec![0.0; d];
    for _ in 0..MAX_EM_ITERS {
        for s in 0..g {
            let nk: f64 = resp.chunks_exact(g).map(|r| r[s]).sum();
            weights[s] = nk / n as f64;
            if nk < 1e-12 {
                continue;
            }
            sums.iter_mut().for_each(|v| *v = 0.0);
            for (row, r) in rows.chunks_exact(d).zip(resp.chunks_exact(g)) {
                for (acc, xj) in sums.iter_mut().zip(row) {
                    *acc += r[s] * xj;
                }
            }
            for (m, acc) in means[s].iter_mut().zip(&sums) {
                *m = acc / nk;
            }
            squares.iter_mut().for_each(|v| *v = 0.0);
            for (row, r) in rows.chunks_exact(d).zip(resp.chunks_exact(g)) {
                for ((acc, xj), m) in squares.iter_mut().zip(row).zip(&means[s]) {
                    *acc += r[s] * (xj - m) * (xj - m);
                }
            }
            for (v, acc) in variances[s].iter_mut().zip(&squares) {
                *v = (acc / nk).max(VARIANCE_FLOOR);
            }
        }
        let next = e_step(&rows, d, &means, &variances, &weights, &mut resp);
        trace.push(next);
        let improved = next - ll;
        ll = next;
        if improved.abs() < LOGLIK_TOL {
            break;
        }
    }

    let assignments = resp.chunks_exact(g).map(crate::tree::argmax).collect();
    let bic = -2.0 * ll + ClusterModel::n_params(g, d) as f64 * (n as f64).ln();
    ClusterModel {
        n_components: g,
        means,
        variances,
        weights,
        assignments,
        log_likelihood: ll,
        bic,
        loglik_trace: trace,
    }
}

/// Fits `g = 1..=min(g_max, n)` components and keeps the lowest BIC; ties go to
/// the smaller `g`. Degenerate candidates (see [`ClusterModel::is_degenerate`])
/// are skipped; `g = 1` never is.
pub fn fit_gmm_bic(x: ArrayView2<'_, f64>, g_max: usize, seed: u64) -> ClusterModel {
    let n = x.nrows();
    let upper = g_max.max(1).min(n);
    let mut best: Option<ClusterModel> = None;
    for g in 1..=upper {
        let mut rng = rng_for(&[GMM_STREAM, seed, g as u64]);
        let model = fit_gmm(x, g, &mut rng);
        if model.is_degenerate() {
            continue;
        }
        if best.as_ref().is_none_or(|b| model.bic < b.bic) {
            best = Some(model);
        }
    }
    best.expect("at least one candidate")
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};

    fn blob(centers: &[(f64, f64)], per: usize, spread: f64, seed: u64) -> Array2<f64> {
        let mut rng = DargRng::seed_from_u64(seed);
        let noise = Normal::new(0.0, spread).unwrap();
        let mut v = Vec::new();
        for &(cx, cy) in centers {
            for _ in 0..per {
                v.push(cx + noise.sample(&mut rng));
                v.push(cy + noise.sample(&mut rng));
            }
        }
        Array2::from_shape_vec((centers.len() * per, 2), v).unwrap()
    }

    /// BIC computed from scratch for a fitted model, independent of the EM loop.
    fn bic_oracle(x: &Array2<f64>, m: &ClusterModel) -> f64 {
        let mut ll = 0.0;
        for row in x.axis_iter(Axis(0)) {
            let mut p = 0.0;
            for s in 0..m.n_components {
                let mut dens = m.weights[s];
                for j in 0..x.ncols() {
                    let v = m.variances[s][j];
                    dens *= (-(row[j] - m.means[s][j]).powi(2) / (2.0 * v)).exp() / (2.0 * PI * v).sqrt();
                }
                p += dens;
            }
            ll += p.ln();
        }
        let k = (2 * m.n_components * x.ncols() + m.n_components - 1) as f64;
        -2.0 * ll + k * (x.nrows() as f64).ln()
    }

    #[test]
    fn single_blob_selects_one_component() {
        let x = blob(&[(0.0, 0.0)], 80, 1.0, 1);
        let m = fit_gmm_bic(x.view(), 10, 7);
        assert_eq!(m.n_components, 1);
        let two = fit_gmm(x.view(), 2, &mut rng_for(&[GMM_STREAM, 7, 2]));
        assert!(bic_oracle(&x, &m) < bic_oracle(&x, &two));
    }

    #[test]
    fn separated_blobs_select_two_components() {
        let x = blob(&[(0.0, 0.0), (25.0, 25.0)], 60, 1.0, 2);
        let m = fit_gmm_bic(x.view(), 10, 3);
        assert_eq!(m.n_components, 2);
        assert!((bic_oracle(&x, &m) - m.bic).abs() < 1e-6 * m.bic.abs().max(1.0));
        let sizes = m.cluster_sizes();
        assert_eq!(sizes.iter().sum::<usize>(), 120);
        assert!(sizes.iter().all(|&s| s == 60));
    }

    #[test]
    fn candidates_clamped_to_sample_count() {
        let x = Array2::from_shape_vec((3, 1), vec![0.0, 5.0, 10.0]).unwrap();
        let m = fit_gmm_bic(x.view(), 10, 0);
        assert!(m.n_components <= 3);
        let one = Array2::from_shape_vec((1, 2), vec![1.0, 2.0]).unwrap();
        let m = fit_gmm_bic(one.view(), 10, 0);
        assert_eq!(m.n_components, 1);
        assert_eq!(m.means[0], vec![1.0, 2.0]);
        assert_eq!(m.variances[0], vec![VARIANCE_FLOOR; 2]);
    }

    #[test]
    fn invariants_and_monotone_loglik() {
        let x = blob(&[(0.0, 0.0), (4.0, 1.0), (1.0, 6.0)], 40, 1.2, 5);
        for g in 1..=6 {
            let m = fit_gmm(x.view(), g, &mut rng_for(&[1, g as u64]));
            assert!((m.weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(m.variances.iter().flatten().all(|&v| v >= VARIANCE_FLOOR));
            for w in m.loglik_trace.windows(2) {
                assert!(w[1] >= w[0] - 1e-9 * w[0].abs().max(1.0), "g={g}: {} -> {}", w[0], w[1]);
            }
            assert!(m.loglik_trace.len() <= MAX_EM_ITERS + 1);
        }
    }

    #[test]
    fn collapsed_components_are_not_selected() {
        let x = blob(&[(0.0, 0.0), (25.0, 25.0)], 60, 1.0, 2);
        let three = fit_gmm(x.view(), 3, &mut rng_for(&[GMM_STREAM, 3, 3]));
        let best = fit_gmm_bic(x.view(), 10, 3);
        if three.is_degenerate() {
            assert!(three.bic < best.bic, "the collapse would otherwise have won");
        }
        assert!(!best.is_degenerate());
    }

    #[test]
    fn deterministic_for_seed() {
        let x = blob(&[(0.0, 0.0), (6.0, 0.0)], 30, 1.0, 9);
        assert_eq!(fit_gmm_bic(x.view(), 10, 4), fit_gmm_bic(x.view(), 10, 4));
    }
}
