//! Region-guided dynamic oversampling.
//!
//! Each epoch, every class smaller than the largest one is clustered with a
//! BIC-selected Gaussian mixture. Inside each cluster samples are labelled dense,
//! boundary or noise from their density factor and hardness. The class deficit is
//! spread across clusters (by summed density) and epochs (by a tangent-decay
//! scheduler), and new points are interpolated from a boundary parent toward a
//! dense parent.

mod gmm;

use ndarray::ArrayView2;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use gmm::{fit_gmm, fit_gmm_bic, ClusterModel, DEFAULT_MAX_COMPONENTS, VARIANCE_FLOOR};

use crate::data::Dataset;
use crate::error::{DargError, Result};
use crate::hardness::HardnessProfile;
use crate::rng::{derive_seed, rng_for, DargRng};

const SYNTH_STREAM: u64 = 0x5A3D;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Dense,
    Boundary,
    Noise,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionPartition {
    pub regions: Vec<Region>,
}

impl RegionPartition {
    pub fn indices(&self, region: Region) -> Vec<usize> {
        self.regions
            .iter()
            .enumerate()
            .filter(|(_, &r)| r == region)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn count(&self, region: Region) -> usize {
        self.regions.iter().filter(|&&r| r == region).count()
    }
}

/// Dense if `ρ ≥ ρ0`; otherwise boundary if `H > μ_H − σ_H`; otherwise noise.
pub fn classify_region(rho: f64, hardness: f64, mean: f64, std_dev: f64, rho0: f64) -> Region {
    if rho >= rho0 {
        Region::Dense
    } else if hardness > mean - std_dev {
        Region::Boundary
    } else {
        Region::Noise
    }
}

pub fn partition_regions(
    rho: &[f64],
    hardness: &[f64],
    mean: f64,
    std_dev: f64,
    rho0: f64,
) -> Result<RegionPartition> {
    if rho.len() != hardness.len() {
        return Err(DargError::DimensionMismatch {
            expected: rho.len(),
            got: hardness.len(),
        });
    }
    Ok(RegionPartition {
        regions: rho
            .iter()
            .zip(hardness)
            .map(|(&r, &h)| classify_region(r, h, mean, std_dev, rho0))
            .collect(),
    })
}

/// `P_s ∝ mean(ρ in s) · |s|`, i.e. the summed density of each cluster. When every
/// numerator is zero the weight is spread uniformly over non-empty clusters.
pub fn cluster_weights(rho: &[f64], assignments: &[usize], n_clusters: usize) -> Vec<f64> {
    let mut mass = vec![0.0; n_clusters];
    let mut sizes = vec![0usize; n_clusters];
    for (&r, &a) in rho.iter().zip(assignments) {
        mass[a] += r;
        sizes[a] += 1;
    }
    let total: f64 = mass.iter().sum();
    if total > 0.0 {
        return mass.iter().map(|m| m / total).collect();
    }
    let occupied = sizes.iter().filter(|&&s| s > 0).count();
    if occupied == 0 {
        return vec![1.0 / n_clusters as f64; n_clusters];
    }
    sizes
        .iter()
        .map(|&s| if s > 0 { 1.0 / occupied as f64 } else { 0.0 })
        .collect()
}

/// Tangent-decay share of the oversampling budget for each of `m` epochs:
/// `O_t ∝ tan((m − t)/(m − 1) · π/4)`, with `O = [1]` for a single epoch.
pub fn scheduler_weights(m: usize) -> Vec<f64> {
    if m <= 1 {
        return vec![1.0; m];
    }
    let raw: Vec<f64> = (1..=m)
        .map(|t| ((m - t) as f64 / (m - 1) as f64 * std::f64::consts::FRAC_PI_4).tan())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|v| v / total).collect()
}

/// Guards the floor against products such as 2.9999999999999996.
const FLOOR_SLACK: f64 = 1e-9;

/// `T_st = ⌊P_s · O_t · deficit⌋` for every cluster at 1-based epoch `t`.
pub fn sampling_targets(deficit: usize, cluster_weights: &[f64], scheduler: &[f64], t: usize) -> Vec<usize> {
    assert!(t >= 1 && t <= scheduler.len(), "epoch {t} outside 1..={}", scheduler.len());
    let o = scheduler[t - 1];
    cluster_weights
        .iter()
        .map(|p| (p * o * deficit as f64 + FLOOR_SLACK).floor().max(0.0) as usize)
        .collect()
}

/// The full cluster-by-epoch allocation for one class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub cluster_weights: Vec<f64>,
    pub scheduler: Vec<f64>,
    /// `targets[s][t-1]`.
    pub targets: Vec<Vec<usize>>,
    pub deficit: usize,
}

impl SamplingPlan {
    pub fn new(deficit: usize, cluster_weights: Vec<f64>, m: usize) -> Self {
        let scheduler = scheduler_weights(m);
        let mut targets = vec![vec![0; m]; cluster_weights.len()];
        for t in 1..=m {
            for (s, v) in sampling_targets(deficit, &cluster_weights, &scheduler, t)
                .into_iter()
                .enumerate()
            {
                targets[s][t - 1] = v;
            }
        }
        Self {
            cluster_weights,
            scheduler,
            targets,
            deficit,
        }
    }

    pub fn total(&self) -> usize {
        self.targets.iter().flatten().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisRecord {
    /// Row of the boundary-side parent (or fallback parent) in the source dataset.
    pub parent_a: usize,
    /// Row of the dense-side parent (or fallback parent).
    pub parent_b: usize,
    pub lambda: f64,
    pub point: Vec<f64>,
}

pub fn interpolate(a: &[f64], b: &[f64], lambda: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(xa, xb)| xa + lambda * (xb - xa)).collect()
}

/// Draws `count` points `x_a + λ(x_b − x_a)` with `x_a` from `boundary`, `x_b` from
/// `dense` and `λ ~ U(0, 1)`. If one region is empty both parents come from the
/// other; if both are empty nothing is generated and the shortfall is `count`.
pub fn generate_samples(
    x: ArrayView2<'_, f64>,
    boundary: &[usize],
    dense: &[usize],
    count: usize,
    rng: &mut DargRng,
) -> (Vec<SynthesisRecord>, usize) {
    let (from_a, from_b) = match (boundary.is_empty(), dense.is_empty()) {
        (false, false) => (boundary, dense),
        (true, false) => (dense, dense),
        (false, true) => (boundary, boundary),
        (true, true) => return (Vec::new(), count),
    };
    let records = (0..count)
        .map(|_| {
            let a = from_a[rng.random_range(0..from_a.len())];
            let b = from_b[rng.random_range(0..from_b.len())];
            let lambda: f64 = rng.random();
            let point = interpolate(
                x.row(a).as_slice().expect("standard layout"),
                x.row(b).as_slice().expect("standard layout"),
                lambda,
            );
            SynthesisRecord {
                parent_a: a,
                parent_b: b,
                lambda,
                point,
            }
        })
        .collect();
    (records, 0)
}

/// Per-class bookkeeping carried across epochs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerState {
    pub original_counts: Vec<usize>,
    pub generated: Vec<usize>,
    pub n_epochs: usize,
    pub scheduler: Vec<f64>,
}

impl SamplerState {
    pub fn new(original_counts: Vec<usize>, n_epochs: usize) -> Self {
        let c = original_counts.len();
        Self {
            original_counts,
            generated: vec![0; c],
            n_epochs,
            scheduler: scheduler_weights(n_epochs),
        }
    }

    /// `max_c' N(c') − N(c)` over the original class counts.
    pub fn deficit(&self, class: usize) -> usize {
        let max = self.original_counts.iter().copied().max().unwrap_or(0);
        max - self.original_counts[class]
    }

    pub fn remaining(&self, class: usize) -> usize {
        self.deficit(class).saturating_sub(self.generated[class])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub size: usize,
    pub dense: usize,
    pub boundary: usize,
    pub noise: usize,
    pub weight: f64,
    pub target: usize,
    pub generated: usize,
    pub shortfall: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSamplingReport {
    pub class: usize,
    pub class_name: String,
    pub current_count: usize,
    pub deficit: usize,
    pub generated_before: usize,
    pub n_clusters: usize,
    pub clusters: Vec<ClusterReport>,
    pub generated: usize,
    pub shortfall: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochSamplingReport {
    pub epoch: usize,
    pub scheduler_weight: f64,
    pub classes: Vec<ClassSamplingReport>,
}

impl EpochSamplingReport {
    pub fn total_generated(&self) -> usize {
        self.classes.iter().map(|c| c.generated).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingParams {
    pub density_threshold: f64,
    pub max_components: usize,
    pub seed: u64,
}

/// One epoch of dynamic sampling over the current (possibly already augmented)
/// training set. Synthetic rows are appended after the existing rows, grouped by
/// class in ascending class order.
///
/// `rho` and `hardness` are this epoch's per-sample factors over `train`.
pub fn dynamic_sample_epoch(
    train: &Dataset,
    rho: &[f64],
    hardness: &HardnessProfile,
    state: &mut SamplerState,
    params: &SamplingParams,
    epoch: usize,
) -> Result<(Dataset, EpochSamplingReport)> {
    let n = train.n_samples();
    if rho.len() != n || hardness.hardness.len() != n {
        return Err(DargError::DimensionMismatch {
            expected: n,
            got: if rho.len() != n { rho.len() } else { hardness.hardness.len() },
        });
    }
    if epoch == 0 || epoch > state.n_epochs {
        return Err(DargError::InvalidArgument(format!(
            "epoch {epoch} outside 1..={}",
            state.n_epochs
        )));
    }
    let o_t = state.scheduler[epoch - 1];
    let mut augmented = train.clone();
    let mut classes = Vec::new();

    for class in 0..train.n_classes() {
        let deficit = state.deficit(class);
        let members = train.indices_of_class(class);
        if deficit == 0 || members.is_empty() {
            continue;
        }
        let generated_before = state.generated[class];
        let mut report = ClassSamplingReport {
            class,
            class_name: train.class_names[class].clone(),
            current_count: members.len(),
            deficit,
            generated_before,
            n_clusters: 0,
            clusters: Vec::new(),
            generated: 0,
            shortfall: 0,
        };
        // Zero epoch budget: every T_st is zero, skip clustering.
        if (o_t * deficit as f64 + FLOOR_SLACK).floor() < 1.0 || state.remaining(class) == 0 {
            classes.push(report);
            continue;
        }

        // Stage 1: clustering.
        let xc = train.features.select(ndarray::Axis(0), &members);
        let class_seed = derive_seed(&[params.seed, epoch as u64, class as u64]);
        let gmm = fit_gmm_bic(
            xc.view(),
            params.max_components.min(members.len()),
            class_seed,
        );
        let g = gmm.n_components;

        // Stage 2: region partition, reusing this epoch's factors.
        let rho_c: Vec<f64> = members.iter().map(|&i| rho[i]).collect();
        let h_c: Vec<f64> = members.iter().map(|&i| hardness.hardness[i]).collect();
        let partition = partition_regions(
            &rho_c,
            &h_c,
            hardness.mean,
            hardness.std_dev,
            params.density_threshold,
        )?;

        // Stage 3: allocation.
        let weights = cluster_weights(&rho_c, &gmm.assignments, g);
        let targets = sampling_targets(deficit, &weights, &state.scheduler, epoch);

        // Stage 4: generation.
        let mut rng = rng_for(&[SYNTH_STREAM, class_seed]);
        let mut new_rows = Vec::new();
        let mut budget = state.remaining(class);
        for s in 0..g {
            let in_cluster: Vec<usize> = (0..members.len()).filter(|&p| gmm.assignments[p] == s).collect();
            let pick = |r: Region| -> Vec<usize> {
                in_cluster
                    .iter()
                    .filter(|&&p| partition.regions[p] == r)
                    .map(|&p| members[p])
                    .collect()
            };
            let dense = pick(Region::Dense);
            let boundary = pick(Region::Boundary);
            let target = targets[s].min(budget);
            let (records, shortfall) =
                generate_samples(train.features.view(), &boundary, &dense, target, &mut rng);
            budget -= records.len();
            report.clusters.push(ClusterReport {
                size: in_cluster.len(),
                dense: dense.len(),
                boundary: boundary.len(),
                noise: in_cluster.len() - dense.len() - boundary.len(),
                weight: weights[s],
                target: targets[s],
                generated: records.len(),
                shortfall,
            });
            report.shortfall += shortfall;
            new_rows.extend(records.into_iter().map(|r| r.point));
        }
        report.n_clusters = g;
        report.generated = new_rows.len();
        state.generated[class] += new_rows.len();
        augmented.append_rows(&new_rows, class);
        classes.push(report);
    }

    Ok((
        augmented,
        EpochSamplingReport {
            epoch,
            scheduler_weight: o_t,
            classes,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hardness::confidence_factor;
    use ndarray::{array, Array2};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn eq7_boundaries() {
        let (mu, sd, rho0) = (0.4, 0.1, 0.5);
        assert_eq!(classify_region(0.5, 0.0, mu, sd, rho0), Region::Dense);
        assert_eq!(classify_region(0.2, mu, mu, sd, rho0), Region::Boundary);
        assert_eq!(classify_region(0.2, mu - sd, mu, sd, rho0), Region::Noise);
    }

    #[test]
    fn cluster_weight_examples() {
        assert_eq!(cluster_weights(&[0.3, 0.9], &[0, 0], 1), vec![1.0]);
        // (ρ̄ = 0.8, n = 10) and (ρ̄ = 0.2, n = 40): numerators 8 and 8.
        let mut rho = vec![0.8; 10];
        rho.extend(vec![0.2; 40]);
        let mut assign = vec![0; 10];
        assign.extend(vec![1; 40]);
        let p = cluster_weights(&rho, &assign, 2);
        assert!((p[0] - 0.5).abs() < 1e-12 && (p[1] - 0.5).abs() < 1e-12);
        assert_eq!(cluster_weights(&[0.0, 0.0, 0.0], &[0, 1, 1], 3), vec![0.5, 0.5, 0.0]);
    }

    #[test]
    fn scheduler_examples() {
        assert_eq!(scheduler_weights(1), vec![1.0]);
        let o2 = scheduler_weights(2);
        assert!((o2[0] - 1.0).abs() < 1e-15 && o2[1].abs() < 1e-15);
        let o3 = scheduler_weights(3);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((o3[0] - r).abs() < 1e-12);
        assert!((o3[1] - (1.0 - r)).abs() < 1e-12);
        assert!(o3[2].abs() < 1e-12);
    }

    #[test]
    fn target_examples() {
        assert_eq!(sampling_targets(0, &[0.5, 0.5], &[0.5, 0.5], 1), vec![0, 0]);
        assert_eq!(sampling_targets(60, &[0.5], &[0.5, 0.5], 2), vec![15]);
        assert_eq!(sampling_targets(25, &[0.3], &[0.4, 0.6], 1), vec![3]);
    }

    #[test]
    fn interpolation_endpoints() {
        let a = [0.0, 0.0];
        let b = [2.0, 4.0];
        assert_eq!(interpolate(&a, &b, 0.0), a.to_vec());
        assert_eq!(interpolate(&a, &b, 1.0), b.to_vec());
        assert_eq!(interpolate(&a, &b, 0.25), vec![0.5, 1.0]);
    }

    #[test]
    fn generation_fallbacks() {
        let x = array![[0.0], [1.0], [2.0]];
        let mut rng = DargRng::seed_from_u64(0);
        let (r, short) = generate_samples(x.view(), &[], &[1, 2], 5, &mut rng);
        assert_eq!((r.len(), short), (5, 0));
        assert!(r.iter().all(|s| s.parent_a >= 1 && s.parent_b >= 1));
        let (r, short) = generate_samples(x.view(), &[0], &[], 3, &mut rng);
        assert_eq!((r.len(), short), (3, 0));
        assert!(r.iter().all(|s| s.point == vec![0.0]));
        let (r, short) = generate_samples(x.view(), &[], &[], 4, &mut rng);
        assert_eq!((r.len(), short), (0, 4));
    }

    fn two_class(n0: usize, n1: usize, seed: u64) -> Dataset {
        let mut rng = DargRng::seed_from_u64(seed);
        let n = n0 + n1;
        let labels: Vec<usize> = (0..n).map(|i| usize::from(i >= n0)).collect();
        let features = Array2::from_shape_fn((n, 2), |(i, _)| {
            let offset = if labels[i] == 1 { 3.0 } else { 0.0 };
            offset + rng.random::<f64>()
        });
        Dataset::new(features, labels, vec!["maj".into(), "min".into()], vec!["a".into(), "b".into()]).unwrap()
    }

    fn factors(ds: &Dataset) -> (Vec<f64>, HardnessProfile) {
        let counts = crate::geometry::within_class_mutual_counts(ds.features.view(), &ds.labels, 2, 5).unwrap();
        let rho = crate::geometry::density_from_counts(counts).rho;
        let h: Vec<f64> = (0..ds.n_samples()).map(|i| (i % 7) as f64 / 7.0).collect();
        (rho, confidence_factor(h))
    }

    #[test]
    fn balanced_input_is_unchanged() {
        let ds = two_class(20, 20, 1);
        let (rho, hp) = factors(&ds);
        let mut state = SamplerState::new(ds.class_counts(), 3);
        let params = SamplingParams { density_threshold: 0.5, max_components: 10, seed: 0 };
        let (aug, report) = dynamic_sample_epoch(&ds, &rho, &hp, &mut state, &params, 1).unwrap();
        assert_eq!(aug, ds);
        assert!(report.classes.is_empty());
    }

    #[test]
    fn two_epoch_schedule_front_loads_everything() {
        let ds = two_class(90, 10, 2);
        let (rho, hp) = factors(&ds);
        let mut state = SamplerState::new(ds.class_counts(), 2);
        let params = SamplingParams { density_threshold: 0.5, max_components: 10, seed: 3 };
        let (aug, r1) = dynamic_sample_epoch(&ds, &rho, &hp, &mut state, &params, 1).unwrap();
        let g = r1.classes[0].n_clusters;
        let generated = r1.total_generated();
        assert!(generated <= 80 && generated + g >= 80, "generated {generated} with g={g}");
        assert_eq!(aug.n_samples(), 100 + generated);
        assert!(aug.labels[100..].iter().all(|&y| y == 1));
        let (rho2, hp2) = factors(&aug);
        let (aug2, r2) = dynamic_sample_epoch(&aug, &rho2, &hp2, &mut state, &params, 2).unwrap();
        assert_eq!(r2.total_generated(), 0);
        assert_eq!(aug2, aug);
    }

    #[test]
    fn fallback_when_no_dense_samples() {
        let ds = two_class(40, 8, 4);
        let (_, hp) = factors(&ds);
        // Nobody reaches the density threshold, and every minority sample is hard.
        let rho = vec![0.0; ds.n_samples()];
        let mut hp = hp;
        for i in 40..48 {
            hp.hardness[i] = 1.0;
        }
        let mut state = SamplerState::new(ds.class_counts(), 1);
        let params = SamplingParams { density_threshold: 0.9, max_components: 10, seed: 1 };
        let (_, report) = dynamic_sample_epoch(&ds, &rho, &hp, &mut state, &params, 1).unwrap();
        let c = &report.classes[0];
        assert!(c.clusters.iter().all(|k| k.dense == 0));
        assert_eq!(c.shortfall, 0);
        assert!(c.generated > 0);
    }

    proptest! {
        #[test]
        fn partition_is_exhaustive_and_monotone_in_threshold(
            rho in prop::collection::vec(0.0f64..=1.0, 1..40),
            seed in any::<u64>(),
            t0 in 0.0f64..1.0,
            t1 in 0.0f64..1.0,
        ) {
            let h: Vec<f64> = rho.iter().enumerate().map(|(i, _)| ((seed >> (i % 50)) & 0xff) as f64 / 255.0).collect();
            let prof = confidence_factor(h.clone());
            let (lo, hi) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
            let a = partition_regions(&rho, &h, prof.mean, prof.std_dev, lo).unwrap();
            let b = partition_regions(&rho, &h, prof.mean, prof.std_dev, hi).unwrap();
            prop_assert_eq!(a.count(Region::Dense) + a.count(Region::Boundary) + a.count(Region::Noise), rho.len());
            for i in 0..rho.len() {
                if b.regions[i] == Region::Dense {
                    prop_assert_eq!(a.regions[i], Region::Dense);
                }
            }
        }

        #[test]
        fn scheduler_laws(m in 1usize..200) {
            let o = scheduler_weights(m);
            prop_assert_eq!(o.len(), m);
            prop_assert!((o.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            for w in o.windows(2) {
                prop_assert!(w[1] <= w[0]);
            }
            if m >= 2 {
                prop_assert!(o[m - 1].abs() < 1e-15);
            }
        }

        #[test]
        fn plan_never_exceeds_deficit(
            deficit in 0usize..500,
            raw in prop::collection::vec(0.0f64..1.0, 1..8),
            m in 1usize..60,
        ) {
            let total: f64 = raw.iter().sum();
            prop_assume!(total > 0.0);
            let p: Vec<f64> = raw.iter().map(|v| v / total).collect();
            let plan = SamplingPlan::new(deficit, p.clone(), m);
            prop_assert!(plan.total() <= deficit);
            prop_assert!(plan.total() + p.len() * m >= deficit);
        }

        #[test]
        fn synthetic_points_lie_between_parents(seed in any::<u64>(), count in 0usize..50) {
            let mut rng = DargRng::seed_from_u64(seed);
            let x = Array2::from_shape_fn((12, 3), |(i, j)| ((i * 31 + j * 17) % 13) as f64 - 6.0);
            let (recs, _) = generate_samples(x.view(), &[0, 1, 2, 3], &[7, 8, 9], count, &mut rng);
            prop_assert_eq!(recs.len(), count);
            for r in recs {
                prop_assert!([0, 1, 2, 3].contains(&r.parent_a));
                prop_assert!([7, 8, 9].contains(&r.parent_b));
                for j in 0..3 {
                    let (a, b) = (x[[r.parent_a, j]], x[[r.parent_b, j]]);
                    prop_assert!(r.point[j] >= a.min(b) - 1e-12 && r.point[j] <= a.max(b) + 1e-12);
                }
            }
        }
    }
}
