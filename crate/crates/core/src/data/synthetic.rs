use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::Dataset;
use crate::error::{DargError, Result};
use crate::rng::rng_for;

const BLOB_STREAM: u64 = 0xB10B;

/// Isotropic Gaussian blobs, one per class, with optional symmetric label noise.
#[derive(Debug, Clone, PartialEq)]
pub struct BlobSpec {
    pub counts: Vec<usize>,
    pub centers: Vec<Vec<f64>>,
    pub spread: f64,
    /// Fraction of rows whose label is replaced by a different, uniformly drawn class.
    pub label_noise: f64,
}

impl BlobSpec {
    /// Classes on the corners of a simplex-like layout in `d` dimensions, `separation`
    /// apart along one axis each.
    pub fn imbalanced(counts: &[usize], d: usize, separation: f64, spread: f64, label_noise: f64) -> Self {
        let centers = (0..counts.len())
            .map(|c| {
                let mut v = vec![0.0; d];
                if c > 0 {
                    v[(c - 1) % d] = separation * (1 + (c - 1) / d) as f64;
                }
                v
            })
            .collect();
        Self {
            counts: counts.to_vec(),
            centers,
            spread,
            label_noise,
        }
    }

    pub fn generate(&self, seed: u64) -> Result<Dataset> {
        let c = self.counts.len();
        if c == 0 || self.centers.len() != c {
            return Err(DargError::InvalidArgument("one center per class required".into()));
        }
        let d = self.centers[0].len();
        if d == 0 || self.centers.iter().any(|m| m.len() != d) {
            return Err(DargError::InvalidArgument("centers must share a positive dimension".into()));
        }
        if !(0.0..=1.0).contains(&self.label_noise) || self.spread.is_nan() || self.spread <= 0.0 {
            return Err(DargError::InvalidArgument("bad spread or label noise".into()));
        }
        let mut rng = rng_for(&[BLOB_STREAM, seed]);
        let normal = Normal::new(0.0, self.spread).expect("positive spread");
        let n: usize = self.counts.iter().sum();
        let mut features = Array2::zeros((n, d));
        let mut labels = Vec::with_capacity(n);
        let mut row = 0;
        for (class, &count) in self.counts.iter().enumerate() {
            for _ in 0..count {
                for j in 0..d {
                    features[[row, j]] = self.centers[class][j] + normal.sample(&mut rng);
                }
                labels.push(class);
                row += 1;
            }
        }
        if c > 1 {
            for y in labels.iter_mut() {
                if rng.random::<f64>() < self.label_noise {
                    let shift = rng.random_range(1..c);
                    *y = (*y + shift) % c;
                }
            }
        }
        Dataset::new(
            features,
            labels,
            (0..c).map(|k| format!("c{k}")).collect(),
            (0..d).map(|j| format!("x{j}")).collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_determinism() {
        let spec = BlobSpec::imbalanced(&[50, 10, 5], 3, 4.0, 1.0, 0.0);
        let a = spec.generate(3).unwrap();
        assert_eq!(a.class_counts(), vec![50, 10, 5]);
        assert_eq!(a, spec.generate(3).unwrap());
        assert_ne!(a, spec.generate(4).unwrap());
    }

    #[test]
    fn label_noise_changes_some_labels() {
        let spec = BlobSpec::imbalanced(&[500, 500], 2, 4.0, 1.0, 0.2);
        let ds = spec.generate(0).unwrap();
        let flipped = (0..1000).filter(|&i| ds.labels[i] != usize::from(i >= 500)).count();
        assert!((120..=280).contains(&flipped), "flipped {flipped}");
    }
}
