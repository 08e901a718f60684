use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{DargError, Result};
use crate::rng::rng_for;

const SPLIT_STREAM: u64 = 0x5B11;
const FOLD_STREAM: u64 = 0xF01D;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_fraction: 0.8,
            seed: 0,
            stratified: true,
        }
    }
}

impl SplitSpec {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

/// Per-class shuffled split. Each class contributes `round(fraction * n_c)` rows to
/// train, clamped so that classes with at least two rows appear on both sides.
/// Singleton classes always go to train. Row order within each partition follows
/// the original dataset.
pub fn stratified_split(ds: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    let f = spec.train_fraction;
    if !(f > 0.0 && f < 1.0) {
        return Err(DargError::InvalidArgument(format!(
            "train_fraction must lie in (0, 1), got {f}"
        )));
    }
    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    for class in 0..ds.n_classes() {
        let mut idx = ds.indices_of_class(class);
        let n = idx.len();
        if n == 0 {
            continue;
        }
        let n_train = if n == 1 {
            1
        } else {
            ((f * n as f64).round() as usize).clamp(1, n - 1)
        };
        idx.shuffle(&mut rng_for(&[SPLIT_STREAM, spec.seed, class as u64]));
        train_idx.extend_from_slice(&idx[..n_train]);
        test_idx.extend_from_slice(&idx[n_train..]);
    }
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    Ok((ds.select(&train_idx), ds.select(&test_idx)))
}

/// Stratified fold assignment: each class is shuffled and dealt round-robin, with
/// the dealing position carried over between classes so fold sizes stay within one.
pub fn stratified_folds(labels: &[usize], n_classes: usize, folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(DargError::InvalidArgument(format!(
            "need at least 2 folds, got {folds}"
        )));
    }
    let mut assignment = vec![0; labels.len()];
    let mut next = 0;
    for class in 0..n_classes {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if idx.is_empty() {
            continue;
        }
        if idx.len() < folds {
            log::warn!(
                "class {class} has {} samples for {folds} folds; stratification is best-effort",
                idx.len()
            );
        }
        idx.shuffle(&mut rng_for(&[FOLD_STREAM, seed, class as u64]));
        for i in idx {
            assignment[i] = next % folds;
            next += 1;
        }
    }
    Ok(assignment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use proptest::prelude::*;

    fn dataset(counts: &[usize]) -> Dataset {
        let labels: Vec<usize> = counts
            .iter()
            .enumerate()
            .flat_map(|(c, &n)| std::iter::repeat_n(c, n))
            .collect();
        let n = labels.len();
        let features = Array2::from_shape_fn((n, 2), |(i, j)| (i * 2 + j) as f64);
        Dataset::new(
            features,
            labels,
            (0..counts.len()).map(|c| format!("c{c}")).collect(),
            vec!["a".into(), "b".into()],
        )
        .unwrap()
    }

    #[test]
    fn eighty_twenty_per_class() {
        let ds = dataset(&[80, 20]);
        let (tr, te) = stratified_split(&ds, &SplitSpec::with_seed(3)).unwrap();
        assert_eq!(tr.class_counts(), vec![64, 16]);
        assert_eq!(te.class_counts(), vec![16, 4]);
    }

    #[test]
    fn deterministic_for_seed() {
        let ds = dataset(&[30, 7, 3]);
        let a = stratified_split(&ds, &SplitSpec::with_seed(11)).unwrap();
        let b = stratified_split(&ds, &SplitSpec::with_seed(11)).unwrap();
        assert_eq!(a, b);
        let c = stratified_split(&ds, &SplitSpec::with_seed(12)).unwrap();
        assert_ne!(a.0.features, c.0.features);
    }

    #[test]
    fn singleton_class_goes_to_train() {
        let ds = dataset(&[10, 1]);
        let (tr, te) = stratified_split(&ds, &SplitSpec::with_seed(0)).unwrap();
        assert_eq!(tr.class_counts()[1], 1);
        assert_eq!(te.class_counts()[1], 0);
    }

    #[test]
    fn rejects_bad_fraction() {
        let ds = dataset(&[4, 4]);
        for f in [0.0, 1.0, -0.5, 1.5] {
            let spec = SplitSpec {
                train_fraction: f,
                ..SplitSpec::default()
            };
            assert!(stratified_split(&ds, &spec).is_err());
        }
    }

    #[test]
    fn folds_of_equal_size() {
        let ds = dataset(&[50, 30, 20]);
        let folds = stratified_folds(&ds.labels, 3, 5, 9).unwrap();
        let mut sizes = [0; 5];
        for f in &folds {
            sizes[*f] += 1;
        }
        assert_eq!(sizes, [20; 5]);
        assert_eq!(folds, stratified_folds(&ds.labels, 3, 5, 9).unwrap());
    }

    proptest! {
        #[test]
        fn partitions_cover_rows_exactly_once(
            counts in prop::collection::vec(1usize..25, 2..5),
            seed in any::<u64>(),
            frac in 0.05f64..0.95,
        ) {
            let ds = dataset(&counts);
            let spec = SplitSpec { train_fraction: frac, seed, stratified: true };
            let (tr, te) = stratified_split(&ds, &spec).unwrap();
            // Feature column 0 encodes the row id.
            let mut ids: Vec<usize> = tr.features.column(0).iter()
                .chain(te.features.column(0).iter())
                .map(|v| (*v as usize) / 2)
                .collect();
            ids.sort_unstable();
            prop_assert_eq!(ids, (0..ds.n_samples()).collect::<Vec<_>>());
            for (c, &n) in counts.iter().enumerate() {
                if n >= 2 {
                    prop_assert!(tr.class_counts()[c] >= 1 && te.class_counts()[c] >= 1);
                }
            }
        }
    }
}
