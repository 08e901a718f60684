//! Dataset ingestion, standardization and stratified partitioning.

mod delimited;
mod keel;
mod scale;
mod split;
mod synthetic;

use ndarray::{Array2, Axis};

use crate::error::{DargError, Result};

pub use delimited::{load_csv, LabelColumn};
pub use keel::{load_keel, parse_keel};
pub use scale::{standardize, ScalerParams};
pub use split::{stratified_folds, stratified_split, SplitSpec};
pub use synthetic::BlobSpec;

/// A labeled feature matrix.
///
/// `labels[i]` indexes into `class_names`. Loaders guarantee that every class
/// occurs at least once; partitions derived from a dataset keep the full class
/// list even when a class is absent from that partition.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Array2<f64>,
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
    pub feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        features: Array2<f64>,
        labels: Vec<usize>,
        class_names: Vec<String>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(DargError::DimensionMismatch {
                expected: features.nrows(),
                got: labels.len(),
            });
        }
        if features.ncols() != feature_names.len() {
            return Err(DargError::DimensionMismatch {
                expected: features.ncols(),
                got: feature_names.len(),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&y| y >= class_names.len()) {
            return Err(DargError::InvalidArgument(format!(
                "label {bad} out of range for {} classes",
                class_names.len()
            )));
        }
        if let Some((row, _)) = features
            .axis_iter(Axis(0))
            .enumerate()
            .find(|(_, r)| r.iter().any(|v| !v.is_finite()))
        {
            return Err(DargError::InvalidArgument(format!(
                "non-finite feature value in row {row}"
            )));
        }
        Ok(Self {
            features,
            labels,
            class_names,
            feature_names,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &y in &self.labels {
            counts[y] += 1;
        }
        counts
    }

    /// Rows of class `class`, in dataset order.
    pub fn indices_of_class(&self, class: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &y)| y == class)
            .map(|(i, _)| i)
            .collect()
    }

    /// Returns a new dataset holding `indices` in the given order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select(Axis(0), indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            class_names: self.class_names.clone(),
            feature_names: self.feature_names.clone(),
        }
    }

    /// Appends rows with a common label.
    pub fn append_rows(&mut self, rows: &[Vec<f64>], label: usize) {
        if rows.is_empty() {
            return;
        }
        let d = self.n_features();
        let mut features = Array2::zeros((self.n_samples() + rows.len(), d));
        features
            .slice_mut(ndarray::s![..self.n_samples(), ..])
            .assign(&self.features);
        for (k, row) in rows.iter().enumerate() {
            debug_assert_eq!(row.len(), d);
            for (j, &v) in row.iter().enumerate() {
                features[[self.n_samples() + k, j]] = v;
            }
        }
        self.features = features;
        self.labels.extend(std::iter::repeat_n(label, rows.len()));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn toy() -> Dataset {
        Dataset::new(
            array![[0.0, 1.0], [2.0, 3.0], [4.0, 5.0]],
            vec![0, 1, 0],
            vec!["a".into(), "b".into()],
            vec!["x".into(), "y".into()],
        )
        .unwrap()
    }

    #[test]
    fn rejects_label_out_of_range() {
        let err = Dataset::new(
            array![[0.0]],
            vec![2],
            vec!["a".into(), "b".into()],
            vec!["x".into()],
        );
        assert!(err.is_err());
    }

    #[test]
    fn rejects_non_finite() {
        let err = Dataset::new(
            array![[f64::NAN]],
            vec![0],
            vec!["a".into()],
            vec!["x".into()],
        );
        assert!(err.is_err());
    }

    #[test]
    fn select_and_append() {
        let mut ds = toy();
        assert_eq!(ds.class_counts(), vec![2, 1]);
        let sub = ds.select(&[2, 0]);
        assert_eq!(sub.labels, vec![0, 0]);
        assert_eq!(sub.features[[0, 0]], 4.0);
        ds.append_rows(&[vec![9.0, 9.0]], 1);
        assert_eq!(ds.n_samples(), 4);
        assert_eq!(ds.features[[3, 1]], 9.0);
        assert_eq!(ds.class_counts(), vec![2, 2]);
    }
}
