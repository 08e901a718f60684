use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::{DargError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub weighted_f1: f64,
    pub g_mean: f64,
    pub auc: f64,
    /// `confusion[true][pred]`.
    pub confusion: Vec<Vec<usize>>,
    /// Recall per class; 0 for classes absent from the truth.
    pub per_class_recall: Vec<f64>,
}

/// Accuracy, support-weighted F1, G-Mean over classes present in the truth, and
/// macro one-vs-rest AUC with midrank ties.
pub fn compute_metrics(y_true: &[usize], y_pred: &[usize], scores: ArrayView2<'_, f64>) -> Result<MetricsReport> {
    let n = y_true.len();
    if y_pred.len() != n || scores.nrows() != n {
        return Err(DargError::DimensionMismatch {
            expected: n,
            got: if y_pred.len() != n { y_pred.len() } else { scores.nrows() },
        });
    }
    if n == 0 {
        return Err(DargError::InvalidArgument("no samples to evaluate".into()));
    }
    let c = scores.ncols();
    if y_true.iter().chain(y_pred).any(|&k| k >= c) {
        return Err(DargError::InvalidArgument(format!(
            "label outside the {c} score columns"
        )));
    }
    for (i, row) in scores.rows().into_iter().enumerate() {
        if (row.sum() - 1.0).abs() > 1e-6 {
            return Err(DargError::InvalidArgument(format!("score row {i} does not sum to 1")));
        }
    }

    let mut confusion = vec![vec![0usize; c]; c];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        confusion[t][p] += 1;
    }
    let support: Vec<usize> = confusion.iter().map(|r| r.iter().sum()).collect();
    let predicted: Vec<usize> = (0..c).map(|k| confusion.iter().map(|r| r[k]).sum()).collect();
    let correct: usize = (0..c).map(|k| confusion[k][k]).sum();
    let accuracy = correct as f64 / n as f64;

    let per_class_recall: Vec<f64> = (0..c)
        .map(|k| if support[k] > 0 { confusion[k][k] as f64 / support[k] as f64 } else { 0.0 })
        .collect();

    let mut weighted_f1 = 0.0;
    for k in 0..c {
        let tp = confusion[k][k] as f64;
        let denom = (support[k] + predicted[k]) as f64;
        let f1 = if denom > 0.0 { 2.0 * tp / denom } else { 0.0 };
        weighted_f1 += f1 * support[k] as f64 / n as f64;
    }

    let present: Vec<usize> = (0..c).filter(|&k| support[k] > 0).collect();
    let g_mean = if present.iter().any(|&k| per_class_recall[k] == 0.0) {
        0.0
    } else {
        let log_sum: f64 = present.iter().map(|&k| per_class_recall[k].ln()).sum();
        (log_sum / present.len() as f64).exp()
    };

    let mut aucs = Vec::new();
    for &k in &present {
        let positives = support[k];
        if positives == n {
            continue;
        }
        let col: Vec<f64> = scores.column(k).to_vec();
        let is_pos: Vec<bool> = y_true.iter().map(|&t| t == k).collect();
        aucs.push(binary_auc(&col, &is_pos));
    }
    let auc = if aucs.is_empty() {
        0.5
    } else {
        aucs.iter().sum::<f64>() / aucs.len() as f64
    };

    Ok(MetricsReport {
        accuracy,
        weighted_f1,
        g_mean,
        auc,
        confusion,
        per_class_recall,
    })
}

/// Mann-Whitney AUC: `(R_pos − n_pos(n_pos+1)/2) / (n_pos · n_neg)` with midranks.
pub fn binary_auc(scores: &[f64], is_positive: &[bool]) -> f64 {
    let n = scores.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = mid;
        }
        i = j + 1;
    }
    let n_pos = is_positive.iter().filter(|&&p| p).count() as f64;
    let n_neg = n as f64 - n_pos;
    if n_pos == 0.0 || n_neg == 0.0 {
        return 0.5;
    }
    let rank_sum: f64 = (0..n).filter(|&i| is_positive[i]).map(|i| ranks[i]).sum();
    (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg)
}
