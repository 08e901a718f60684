//! Weighted CART classification tree (Gini impurity) with leaf class distributions.

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{DargError, Result};

/// Splits must reduce normalized weighted Gini impurity by more than this.
const MIN_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        distribution: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    /// Node 0 is the root.
    pub nodes: Vec<Node>,
    pub max_depth: usize,
    pub n_features: usize,
    pub n_classes: usize,
}

struct Builder<'a> {
    x: ArrayView2<'a, f64>,
    y: &'a [usize],
    w: &'a [f64],
    n_classes: usize,
    max_depth: usize,
    nodes: Vec<Node>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    score: f64,
}

/// Fits a tree by greedy weighted-Gini splitting.
///
/// Candidate thresholds are midpoints between consecutive distinct values among
/// the node's positive-weight samples. Zero-weight samples never influence the
/// structure. Equal-gain candidates resolve to the lowest feature index, then
/// the lowest threshold.
pub fn fit_tree(
    x: ArrayView2<'_, f64>,
    y: &[usize],
    w: &[f64],
    n_classes: usize,
    max_depth: usize,
) -> Result<DecisionTree> {
    let n = x.nrows();
    if n == 0 {
        return Err(DargError::Fit("cannot fit a tree on zero samples".into()));
    }
    if y.len() != n || w.len() != n {
        return Err(DargError::DimensionMismatch {
            expected: n,
            got: if y.len() != n { y.len() } else { w.len() },
        });
    }
    if n_classes == 0 || y.iter().any(|&c| c >= n_classes) {
        return Err(DargError::InvalidArgument("label outside class range".into()));
    }
    if w.iter().any(|&v| !v.is_finite() || v < 0.0) {
        return Err(DargError::InvalidArgument(
            "sample weights must be finite and non-negative".into(),
        ));
    }
    let active: Vec<usize> = (0..n).filter(|&i| w[i] > 0.0).collect();
    if active.is_empty() {
        return Err(DargError::Fit("all sample weights are zero".into()));
    }
    let mut builder = Builder {
        x,
        y,
        w,
        n_classes,
        max_depth,
        nodes: Vec::new(),
    };
    builder.grow(active, 0);
    Ok(DecisionTree {
        nodes: builder.nodes,
        max_depth,
        n_features: x.ncols(),
        n_classes,
    })
}

impl Builder<'_> {
    fn class_weights(&self, idx: &[usize]) -> Vec<f64> {
        let mut cw = vec![0.0; self.n_classes];
        for &i in idx {
            cw[self.y[i]] += self.w[i];
        }
        cw
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> usize {
        let cw = self.class_weights(&idx);
        let total: f64 = cw.iter().sum();
        let pure = cw.iter().filter(|&&v| v > 0.0).count() <= 1;
        let split = if depth >= self.max_depth || pure || idx.len() < 2 {
            None
        } else {
            self.best_split(&idx, &cw, total)
        };
        let node_id = self.nodes.len();
        match split {
            None => {
                let distribution = cw.iter().map(|v| v / total).collect();
                self.nodes.push(Node::Leaf { distribution });
            }
            Some(best) => {
                self.nodes.push(Node::Leaf {
                    distribution: Vec::new(),
                });
                let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = idx
                    .into_iter()
                    .partition(|&i| self.x[[i, best.feature]] <= best.threshold);
                let left = self.grow(left_idx, depth + 1);
                let right = self.grow(right_idx, depth + 1);
                self.nodes[node_id] = Node::Split {
                    feature: best.feature,
                    threshold: best.threshold,
                    left,
                    right,
                };
            }
        }
        node_id
    }

    /// Maximizes `Σ_k L_k²/W_L + Σ_k R_k²/W_R`, which is equivalent to minimizing
    /// the weighted child Gini impurity.
    fn best_split(&self, idx: &[usize], cw: &[f64], total: f64) -> Option<BestSplit> {
        let parent_score: f64 = cw.iter().map(|v| v * v).sum::<f64>() / total;
        let mut best: Option<BestSplit> = None;
        let mut order = idx.to_vec();
        let mut left = vec![0.0; self.n_classes];
        for f in 0..self.x.ncols() {
            order.sort_by(|&a, &b| self.x[[a, f]].total_cmp(&self.x[[b, f]]).then(a.cmp(&b)));
            left.iter_mut().for_each(|v| *v = 0.0);
            let mut w_left = 0.0;
            for pos in 0..order.len() - 1 {
                let i = order[pos];
                left[self.y[i]] += self.w[i];
                w_left += self.w[i];
                let (lo, hi) = (self.x[[i, f]], self.x[[order[pos + 1], f]]);
                if lo >= hi {
                    continue;
                }
                let w_right = total - w_left;
                if w_left <= 0.0 || w_right <= 0.0 {
                    continue;
                }
                let mut sl = 0.0;
                let mut sr = 0.0;
                for k in 0..self.n_classes {
                    let r = cw[k] - left[k];
                    sl += left[k] * left[k];
                    sr += r * r;
                }
                let score = sl / w_left + sr / w_right;
                if best.as_ref().is_none_or(|b| score > b.score) {
                    let mut threshold = lo + (hi - lo) / 2.0;
                    if threshold >= hi {
                        threshold = lo;
                    }
                    best = Some(BestSplit {
                        feature: f,
                        threshold,
                        score,
                    });
                }
            }
        }
        best.filter(|b| (b.score - parent_score) / total > MIN_GAIN)
    }
}

impl DecisionTree {
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], id: usize) -> usize {
            match &nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn leaf_distribution(&self, row: ArrayView1<'_, f64>) -> &[f64] {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                Node::Leaf { distribution } => return distribution,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => id = if row[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    fn check_dim(&self, x: &ArrayView2<'_, f64>) -> Result<()> {
        if x.ncols() != self.n_features {
            return Err(DargError::DimensionMismatch {
                expected: self.n_features,
                got: x.ncols(),
            });
        }
        Ok(())
    }

    pub fn predict_proba(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.check_dim(&x)?;
        let mut out = Array2::zeros((x.nrows(), self.n_classes));
        for (i, row) in x.axis_iter(Axis(0)).enumerate() {
            for (k, &p) in self.leaf_distribution(row).iter().enumerate() {
                out[[i, k]] = p;
            }
        }
        Ok(out)
    }

    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Vec<usize>> {
        self.check_dim(&x)?;
        Ok(x.axis_iter(Axis(0))
            .map(|row| argmax(self.leaf_distribution(row)))
            .collect())
    }
}

/// Index of the largest value; the lowest index wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = k;
        }
    }
    best
}
