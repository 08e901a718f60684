use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{DargError, Result};

/// Column means and population standard deviations learned from a training set.
///
/// Constant columns store a standard deviation of 1, so they map to zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub means: Vec<f64>,
    pub std_devs: Vec<f64>,
}

const CONSTANT_EPS: f64 = 1e-12;

impl ScalerParams {
    pub fn fit(features: ArrayView2<'_, f64>) -> Self {
        let n = features.nrows().max(1) as f64;
        let mut means = Vec::with_capacity(features.ncols());
        let mut std_devs = Vec::with_capacity(features.ncols());
        for col in features.axis_iter(Axis(1)) {
            let mean = col.sum() / n;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            let sd = var.sqrt();
            means.push(mean);
            std_devs.push(if sd > CONSTANT_EPS { sd } else { 1.0 });
        }
        Self { means, std_devs }
    }

    pub fn identity(d: usize) -> Self {
        Self {
            means: vec![0.0; d],
            std_devs: vec![1.0; d],
        }
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    pub fn transform(&self, features: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if features.ncols() != self.dim() {
            return Err(DargError::DimensionMismatch {
                expected: self.dim(),
                got: features.ncols(),
            });
        }
        let mut out = features.to_owned();
        for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            let (m, s) = (self.means[j], self.std_devs[j]);
            col.mapv_inplace(|v| (v - m) / s);
        }
        Ok(out)
    }
}

/// Standardizes `train` to zero mean and unit population variance per column and
/// applies the same transform to `test`.
pub fn standardize(train: &Dataset, test: &Dataset) -> Result<(Dataset, Dataset, ScalerParams)> {
    if train.n_features() != test.n_features() {
        return Err(DargError::DimensionMismatch {
            expected: train.n_features(),
            got: test.n_features(),
        });
    }
    let params = ScalerParams::fit(train.features.view());
    let mut train_out = train.clone();
    train_out.features = params.transform(train.features.view())?;
    let mut test_out = test.clone();
    test_out.features = params.transform(test.features.view())?;
    Ok((train_out, test_out, params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    fn ds(features: Array2<f64>) -> Dataset {
        let n = features.nrows();
        let d = features.ncols();
        Dataset::new(
            features,
            vec![0; n],
            vec!["a".into()],
            (0..d).map(|j| format!("f{j}")).collect(),
        )
        .unwrap()
    }

    #[test]
    fn population_std_scaling() {
        let (tr, te, p) = standardize(&ds(array![[1.0], [2.0], [3.0]]), &ds(array![[4.0]])).unwrap();
        let expected = 1.0 / (2.0f64 / 3.0).sqrt();
        assert!((tr.features[[0, 0]] + expected).abs() < 1e-12);
        assert_eq!(tr.features[[1, 0]], 0.0);
        assert!((tr.features[[2, 0]] - 1.224_744_871_391_589).abs() < 1e-12);
        assert!((p.std_devs[0] - 0.816_496_580_927_726).abs() < 1e-12);
        // (4 - 2) / 0.8165
        assert!((te.features[[0, 0]] - 2.449_489_742_783_178).abs() < 1e-12);
    }

    #[test]
    fn constant_column_maps_to_zero() {
        let (tr, _, p) = standardize(&ds(array![[5.0], [5.0], [5.0]]), &ds(array![[5.0]])).unwrap();
        assert_eq!(p.std_devs, vec![1.0]);
        assert!(tr.features.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn dimension_mismatch() {
        assert!(standardize(&ds(array![[1.0, 2.0]]), &ds(array![[1.0]])).is_err());
    }

    proptest! {
        #[test]
        fn standardized_columns_have_zero_mean_unit_std(
            rows in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 3), 2..40)
        ) {
            let n = rows.len();
            let flat: Vec<f64> = rows.into_iter().flatten().collect();
            let x = Array2::from_shape_vec((n, 3), flat).unwrap();
            let p = ScalerParams::fit(x.view());
            let z = p.transform(x.view()).unwrap();
            for (j, col) in z.axis_iter(Axis(1)).enumerate() {
                let mean = col.sum() / n as f64;
                prop_assert!(mean.abs() < 1e-9);
                if p.std_devs[j] != 1.0 || col.iter().any(|v| *v != 0.0) {
                    let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
                    prop_assert!((sd - 1.0).abs() < 1e-9, "sd {}", sd);
                }
            }
        }
    }
}
