//! Accuracy statistics over a confusion matrix and mutual-information
//! feature ranking.
//!
//! Confusion matrices follow the convention rows = reference (true) labels,
//! columns = predicted labels. Producer's accuracy is therefore per-row
//! recall and user's accuracy per-column precision.

use std::collections::BTreeMap;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::ensure;
use crate::Result;

/// Version tag carried by every JSON report.
pub const REPORT_VERSION: &str = "1.0";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    classes: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    /// Builds a matrix from nested rows (reference label `i + 1` on row `i`).
    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        let k = rows.len();
        ensure!(k >= 1, InvalidInput, "confusion matrix needs at least one class");
        ensure!(rows.iter().all(|r| r.len() == k), ShapeMismatch, "confusion matrix must be square");
        Ok(Self {
            classes: k,
            counts: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    /// Count for reference label `truth` and predicted label `pred`, both 1-based.
    pub fn get(&self, truth: usize, pred: usize) -> u64 {
        self.counts[(truth - 1) * self.classes + (pred - 1)]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes).map(|i| self.counts[i * self.classes + i]).sum()
    }

    pub fn row_sum(&self, class: usize) -> u64 {
        let i = class - 1;
        self.counts[i * self.classes..(i + 1) * self.classes].iter().sum()
    }

    pub fn col_sum(&self, class: usize) -> u64 {
        let j = class - 1;
        (0..self.classes).map(|i| self.counts[i * self.classes + j]).sum()
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.counts.chunks(self.classes).map(<[u64]>::to_vec).collect()
    }

    pub fn scaled(&self, factor: u64) -> Self {
        Self {
            classes: self.classes,
            counts: self.counts.iter().map(|c| c * factor).collect(),
        }
    }
}

/// Tallies `(truth, prediction)` pairs over labels `1..=k`. Pairs whose
/// reference label is 0 (unlabeled) are skipped.
pub fn confusion(y_true: &[u16], y_pred: &[u16], k: usize) -> Result<ConfusionMatrix> {
    ensure!(
        y_true.len() == y_pred.len(),
        ShapeMismatch,
        "{} reference labels vs {} predictions",
        y_true.len(),
        y_pred.len()
    );
    ensure!(k >= 1, InvalidInput, "class count must be positive");
    let mut counts = vec![0u64; k * k];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        if t == 0 {
            continue;
        }
        ensure!(
            (t as usize) <= k && p >= 1 && (p as usize) <= k,
            InvalidInput,
            "label pair ({t}, {p}) outside 1..={k}"
        );
        counts[(t as usize - 1) * k + (p as usize - 1)] += 1;
    }
    Ok(ConfusionMatrix { classes: k, counts })
}

fn nonempty(m: &ConfusionMatrix) -> Result<f64> {
    let n = m.total();
    ensure!(n >= 1, InvalidInput, "confusion matrix is empty");
    Ok(n as f64)
}

pub fn overall_accuracy(m: &ConfusionMatrix) -> Result<f64> {
    let n = nonempty(m)?;
    Ok(m.trace() as f64 / n)
}

/// Cohen's kappa, `(p_o − p_e)/(1 − p_e)`; 0 when `p_e = 1`.
pub fn kappa(m: &ConfusionMatrix) -> Result<f64> {
    let n = nonempty(m)?;
    let p_o = m.trace() as f64 / n;
    let p_e = (1..=m.classes())
        .map(|k| m.row_sum(k) as f64 * m.col_sum(k) as f64)
        .sum::<f64>()
        / (n * n);
    if p_e >= 1.0 {
        return Ok(0.0);
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassAccuracy {
    /// `M[k,k] / rowsum_k` (recall).
    pub producers: f64,
    /// `M[k,k] / colsum_k` (precision).
    pub users: f64,
    /// The class never occurs in the reference labels.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub empty_reference: bool,
    /// The class is never predicted.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub empty_prediction: bool,
}

/// Producer's and user's accuracy per class; 0/0 is reported as 0 with the
/// matching emptiness flag set.
pub fn class_accuracies(m: &ConfusionMatrix) -> Vec<ClassAccuracy> {
    (1..=m.classes())
        .map(|k| {
            let diag = m.get(k, k) as f64;
            let (row, col) = (m.row_sum(k), m.col_sum(k));
            ClassAccuracy {
                producers: if row > 0 { diag / row as f64 } else { 0.0 },
                users: if col > 0 { diag / col as f64 } else { 0.0 },
                empty_reference: row == 0,
                empty_prediction: col == 0,
            }
        })
        .collect()
}

/// Fraction of units that never won (zero count).
pub fn dead_fraction(win_counts: &[u64]) -> f64 {
    if win_counts.is_empty() {
        return 0.0;
    }
    win_counts.iter().filter(|&&c| c == 0).count() as f64 / win_counts.len() as f64
}

/// Default bin count of the mutual-information estimator.
pub const DEFAULT_MI_BINS: usize = 32;

/// Mutual information (nats) between a real feature, quantized into `bins`
/// equal-width bins over its range, and a discrete label sequence. A
/// constant feature carries no information.
pub fn mutual_information(feature: &[f64], labels: &[u16], bins: usize) -> Result<f64> {
    ensure!(
        feature.len() == labels.len(),
        ShapeMismatch,
        "{} feature values vs {} labels",
        feature.len(),
        labels.len()
    );
    ensure!(feature.len() >= 2, InvalidInput, "need at least two samples");
    ensure!(bins >= 2, InvalidInput, "need at least two bins");
    ensure!(feature.iter().all(|v| v.is_finite()), InvalidInput, "feature has non-finite values");
    let (lo, hi) = feature
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if hi <= lo {
        return Ok(0.0);
    }
    let class_index: BTreeMap<u16, usize> = labels
        .iter()
        .copied()
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(i, l)| (l, i))
        .collect();
    let k = class_index.len();
    let mut joint = vec![0u64; bins * k];
    for (&v, l) in feature.iter().zip(labels) {
        let b = (((v - lo) / (hi - lo)) * bins as f64).floor() as usize;
        joint[b.min(bins - 1) * k + class_index[l]] += 1;
    }
    let n = feature.len() as f64;
    let p_bin: Vec<f64> = joint.chunks(k).map(|r| r.iter().sum::<u64>() as f64 / n).collect();
    let p_class: Vec<f64> = (0..k)
        .map(|c| (0..bins).map(|b| joint[b * k + c]).sum::<u64>() as f64 / n)
        .collect();
    let mut mi = 0.0;
    for b in 0..bins {
        for c in 0..k {
            let count = joint[b * k + c];
            if count > 0 {
                let p = count as f64 / n;
                mi += p * (p / (p_bin[b] * p_class[c])).ln();
            }
        }
    }
    Ok(mi.max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureScore {
    pub index: usize,
    pub mutual_information: f64,
}

/// Scores every column of `features` (`M × F`) against `labels` and sorts
/// by decreasing mutual information, ties to the lower column index.
pub fn rank_features(features: ArrayView2<'_, f64>, labels: &[u16], bins: usize) -> Result<Vec<FeatureScore>> {
    ensure!(
        features.nrows() == labels.len(),
        ShapeMismatch,
        "{} feature rows vs {} labels",
        features.nrows(),
        labels.len()
    );
    let mut scores = features
        .columns()
        .into_iter()
        .enumerate()
        .map(|(index, col)| {
            let col = col.to_vec();
            Ok(FeatureScore {
                index,
                mutual_information: mutual_information(&col, labels, bins)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    scores.sort_by(|a, b| b.mutual_information.total_cmp(&a.mutual_information));
    Ok(scores)
}

/// Evaluation report written by the pipeline commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub spec_version: String,
    pub oa: f64,
    pub kappa: f64,
    pub per_class: Vec<ClassAccuracy>,
    pub confusion: Vec<Vec<u64>>,
}

impl EvaluationReport {
    pub fn from_confusion(m: &ConfusionMatrix) -> Result<Self> {
        Ok(Self {
            spec_version: REPORT_VERSION.to_string(),
            oa: overall_accuracy(m)?,
            kappa: kappa(m)?,
            per_class: class_accuracies(m),
            confusion: m.rows(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[u64]]) -> ConfusionMatrix {
        ConfusionMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn kappa_examples() {
        assert_eq!(kappa(&m(&[&[50, 0], &[0, 50]])).unwrap(), 1.0);
        assert_eq!(kappa(&m(&[&[25, 25], &[25, 25]])).unwrap(), 0.0);
        assert!((kappa(&m(&[&[40, 10], &[20, 30]])).unwrap() - 0.4).abs() < 1e-12);
        assert_eq!(overall_accuracy(&m(&[&[25, 25], &[25, 25]])).unwrap(), 0.5);
        // p_e = 1: everything in one cell
        assert_eq!(kappa(&m(&[&[10, 0], &[0, 0]])).unwrap(), 0.0);
    }

    #[test]
    fn empty_matrix_errors() {
        let z = m(&[&[0, 0], &[0, 0]]);
        assert!(overall_accuracy(&z).is_err());
        assert!(kappa(&z).is_err());
    }

    #[test]
    fn confusion_rules() {
        let c = confusion(&[1, 2, 3, 0, 2], &[1, 2, 3, 1, 2], 3).unwrap();
        assert_eq!(c.rows(), vec![vec![1, 0, 0], vec![0, 2, 0], vec![0, 0, 1]]);
        let c = confusion(&[1; 5], &[2; 5], 2).unwrap();
        assert_eq!(c.get(1, 2), 5);
        assert_eq!(c.total(), 5);
        assert!(confusion(&[1, 2], &[1], 2).is_err());
        assert!(confusion(&[1, 3], &[1, 1], 2).is_err());
    }

    #[test]
    fn class_accuracy_examples() {
        let acc = class_accuracies(&m(&[&[0, 10], &[0, 5]]));
        assert_eq!(acc[0].producers, 0.0);
        assert!(acc[1].users < 1.0);
        assert!(acc[0].empty_prediction);
        let acc = class_accuracies(&m(&[&[3, 0], &[0, 4]]));
        assert!(acc.iter().all(|a| a.producers == 1.0 && a.users == 1.0));
    }

    #[test]
    fn mi_of_labels_is_entropy() {
        let labels: Vec<u16> = (0..90).map(|i| (i % 3 + 1) as u16).collect();
        let f: Vec<f64> = labels.iter().map(|&l| l as f64).collect();
        let mi = mutual_information(&f, &labels, 32).unwrap();
        assert!((mi - 3f64.ln()).abs() < 1e-12);
        assert_eq!(mutual_information(&[2.0; 90], &labels, 32).unwrap(), 0.0);
    }

    #[test]
    fn ranking_puts_label_copy_first() {
        let labels: Vec<u16> = (0..40).map(|i| (i % 2 + 1) as u16).collect();
        let feats = ndarray::Array2::from_shape_fn((40, 3), |(i, j)| match j {
            0 => 1.0,
            1 => (labels[i] as usize + i % 3) as f64,
            _ => labels[i] as f64,
        });
        let ranked = rank_features(feats.view(), &labels, 8).unwrap();
        assert_eq!(ranked[0].index, 2);
        assert_eq!(ranked[2].index, 0);
        assert_eq!(ranked[2].mutual_information, 0.0);
    }
}
