//! k-nearest-neighbor and mutual-nearest-neighbor graphs, and the density factor
//! derived from mutual-neighbor counts.

use ndarray::{ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{DargError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeighborGraph {
    pub k: usize,
    /// Neighbor lists. For a directed graph they are sorted by ascending distance;
    /// a mutual graph keeps the directed order of the surviving entries.
    pub adjacency: Vec<Vec<usize>>,
    pub mutual: bool,
}

impl NeighborGraph {
    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    /// Number of stored adjacency entries. A mutual edge counts once per endpoint.
    pub fn entry_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum()
    }

    /// Undirected edge count of a mutual graph.
    pub fn undirected_edge_count(&self) -> usize {
        self.entry_count() / 2
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].contains(&j)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityProfile {
    pub counts: Vec<usize>,
    pub rho: Vec<f64>,
}

fn squared_distance(a: ndarray::ArrayView1<'_, f64>, b: ndarray::ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Brute-force Euclidean kNN. Distance ties go to the lower sample index; the
/// effective neighbor count is `min(k, N - 1)`.
pub fn knn_graph(x: ArrayView2<'_, f64>, k: usize) -> Result<NeighborGraph> {
    let n = x.nrows();
    if n < 2 {
        return Err(DargError::InvalidArgument(format!(
            "kNN graph needs at least 2 points, got {n}"
        )));
    }
    if k == 0 {
        return Err(DargError::InvalidArgument("k must be positive".into()));
    }
    let k_eff = k.min(n - 1);
    let adjacency: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = x.index_axis(Axis(0), i);
            let mut cand: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (squared_distance(xi, x.index_axis(Axis(0), j)), j))
                .collect();
            let by_dist = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
            if k_eff < cand.len() {
                cand.select_nth_unstable_by(k_eff - 1, by_dist);
                cand.truncate(k_eff);
            }
            cand.sort_unstable_by(by_dist);
            cand.into_iter().map(|(_, j)| j).collect()
        })
        .collect();
    Ok(NeighborGraph {
        k,
        adjacency,
        mutual: false,
    })
}

/// Keeps edge (i, j) only when each endpoint lists the other.
pub fn mutual_graph(g: &NeighborGraph) -> NeighborGraph {
    let adjacency = g
        .adjacency
        .iter()
        .enumerate()
        .map(|(i, nbrs)| {
            nbrs.iter()
                .copied()
                .filter(|&j| g.adjacency[j].contains(&i))
                .collect()
        })
        .collect();
    NeighborGraph {
        k: g.k,
        adjacency,
        mutual: true,
    }
}

/// Min-max normalized mutual-neighbor counts. If every count is equal, all
/// densities are 1.
pub fn density_from_counts(counts: Vec<usize>) -> DensityProfile {
    let min = counts.iter().copied().min().unwrap_or(0);
    let max = counts.iter().copied().max().unwrap_or(0);
    let rho = if max == min {
        vec![1.0; counts.len()]
    } else {
        let span = (max - min) as f64;
        counts.iter().map(|&c| (c - min) as f64 / span).collect()
    };
    DensityProfile { counts, rho }
}

pub fn density_factor(g: &NeighborGraph) -> DensityProfile {
    density_from_counts(g.adjacency.iter().map(Vec::len).collect())
}

/// Mutual-neighbor counts over the whole sample set.
pub fn global_mutual_counts(x: ArrayView2<'_, f64>, k: usize) -> Result<Vec<usize>> {
    if x.nrows() < 2 {
        return Ok(vec![0; x.nrows()]);
    }
    let g = mutual_graph(&knn_graph(x, k)?);
    Ok(g.adjacency.iter().map(Vec::len).collect())
}

/// Mutual-neighbor counts where each sample only sees samples of its own class.
/// Singleton classes get a count of 0.
pub fn within_class_mutual_counts(
    x: ArrayView2<'_, f64>,
    labels: &[usize],
    n_classes: usize,
    k: usize,
) -> Result<Vec<usize>> {
    let mut counts = vec![0; labels.len()];
    for class in 0..n_classes {
        let idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if idx.len() < 2 {
            continue;
        }
        let sub = x.select(Axis(0), &idx);
        let local = global_mutual_counts(sub.view(), k)?;
        for (pos, &i) in idx.iter().enumerate() {
            counts[i] = local[pos];
        }
    }
    Ok(counts)
}
