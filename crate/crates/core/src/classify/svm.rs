//! One-vs-rest linear SVM trained by dual coordinate descent.
//!
//! Each binary problem minimizes `½‖w‖² + C Σ max(0, 1 − yᵢ(w·xᵢ + b))`
//! with the bias folded in as an extra constant feature (so `b` is
//! regularized together with `w`). Features are standardized with the
//! training mean and standard deviation before fitting.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::LabeledFeatures;
use crate::error::ensure;
use crate::util::{derive_seed, dot, rng};
use crate::Result;

pub const SVM_MAX_PASSES: usize = 1000;
/// Stop once `primal − dual ≤ SVM_TOLERANCE · max(1, primal)`.
pub const SVM_TOLERANCE: f64 = 1e-4;
pub const DEFAULT_C_GRID: [f64; 5] = [0.01, 0.1, 1.0, 10.0, 100.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    /// Class label of each weight row, ascending.
    pub classes: Vec<u16>,
    /// `K × F` weights over standardized features.
    pub weights: Array2<f64>,
    pub intercepts: Array1<f64>,
    pub c: f64,
    pub scaler_mean: Array1<f64>,
    pub scaler_std: Array1<f64>,
}

impl SvmModel {
    fn standardize(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        (&x - &self.scaler_mean) / &self.scaler_std
    }

    /// `K` decision values per row.
    pub fn decision_function(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        ensure!(
            x.ncols() == self.scaler_mean.len(),
            ShapeMismatch,
            "data has {} features, model expects {}",
            x.ncols(),
            self.scaler_mean.len()
        );
        Ok(self.standardize(x).dot(&self.weights.t()) + &self.intercepts)
    }
}

/// Dual objective in minimization form, `½‖w‖² − Σα`, after each pass of
/// each one-vs-rest subproblem.
pub type ObjectiveTrace = Vec<Vec<f64>>;

struct BinarySolution {
    w: Vec<f64>,
    trace: Vec<f64>,
}

/// Coordinate descent on the box-constrained dual of one binary problem.
/// `x` rows are augmented with a trailing 1.
fn solve_binary(x: &Array2<f64>, y: &[f64], c: f64, order: &[usize]) -> BinarySolution {
    let (m, f) = x.dim();
    let flat = x.as_slice().expect("standard layout");
    let rows: Vec<&[f64]> = flat.chunks_exact(f).collect();
    let q: Vec<f64> = rows.iter().map(|r| dot(r, r)).collect();
    let mut alpha = vec![0.0; m];
    let mut w = vec![0.0; f];
    let mut trace = Vec::new();
    for _ in 0..SVM_MAX_PASSES {
        for &i in order {
            if q[i] <= 0.0 {
                continue;
            }
            let g = y[i] * dot(&w, rows[i]) - 1.0;
            let new = (alpha[i] - g / q[i]).clamp(0.0, c);
            let delta = new - alpha[i];
            if delta != 0.0 {
                alpha[i] = new;
                let step = delta * y[i];
                w.iter_mut().zip(rows[i]).for_each(|(wj, xj)| *wj += step * xj);
            }
        }
        let half_norm = 0.5 * dot(&w, &w);
        let dual = half_norm - alpha.iter().sum::<f64>();
        trace.push(dual);
        let hinge: f64 = rows
            .iter()
            .zip(y)
            .map(|(r, yi)| (1.0 - yi * dot(&w, r)).max(0.0))
            .sum();
        let primal = half_norm + c * hinge;
        if primal + dual <= SVM_TOLERANCE * primal.max(1.0) {
            break;
        }
    }
    BinarySolution { w, trace }
}

/// Trains the one-vs-rest model and returns the per-class dual objective
/// trace alongside it.
pub fn svm_train_traced(train: &LabeledFeatures, c: f64, seed: u64) -> Result<(SvmModel, ObjectiveTrace)> {
    ensure!(c > 0.0 && c.is_finite(), InvalidInput, "C must be positive, got {c}");
    let classes = train.classes();
    ensure!(classes.len() >= 2, InvalidInput, "SVM needs at least two classes, got {}", classes.len());
    let (m, f) = (train.len(), train.features());
    let mean = train.x().mean_axis(Axis(0)).expect("non-empty");
    let std = train
        .x()
        .var_axis(Axis(0), 0.0)
        .mapv(|v| if v > 0.0 { v.sqrt() } else { 1.0 });
    let mut aug = Array2::ones((m, f + 1));
    aug.slice_mut(ndarray::s![.., ..f]).assign(&((&train.x() - &mean) / &std));

    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut rng(derive_seed(seed, 0x5f3)));

    let mut weights = Array2::zeros((classes.len(), f));
    let mut intercepts = Array1::zeros(classes.len());
    let mut traces = Vec::with_capacity(classes.len());
    for (k, &class) in classes.iter().enumerate() {
        let y: Vec<f64> = train.y().iter().map(|&l| if l == class { 1.0 } else { -1.0 }).collect();
        let sol = solve_binary(&aug, &y, c, &order);
        weights.row_mut(k).assign(&ndarray::ArrayView1::from(&sol.w[..f]));
        intercepts[k] = sol.w[f];
        traces.push(sol.trace);
    }
    Ok((
        SvmModel {
            classes,
            weights,
            intercepts,
            c,
            scaler_mean: mean,
            scaler_std: std,
        },
        traces,
    ))
}

pub fn svm_train(train: &LabeledFeatures, c: f64, seed: u64) -> Result<SvmModel> {
    svm_train_traced(train, c, seed).map(|(m, _)| m)
}

/// `argmax_k` of the decision values, ties to the lowest class label.
pub fn svm_predict(model: &SvmModel, x: ArrayView2<'_, f64>) -> Result<Vec<u16>> {
    let scores = model.decision_function(x)?;
    Ok(scores
        .rows()
        .into_iter()
        .map(|row| {
            let mut best = 0;
            for (k, &s) in row.iter().enumerate() {
                if s > row[best] {
                    best = k;
                }
            }
            model.classes[best]
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub best_c: f64,
    /// `(C, mean validation accuracy)` in grid order.
    pub scores: Vec<(f64, f64)>,
}

/// Stratified k-fold selection of `C`; ties go to the smallest `C`.
pub fn cv_select_c(train: &LabeledFeatures, grid: &[f64], folds: usize, seed: u64) -> Result<CvResult> {
    ensure!(!grid.is_empty(), InvalidInput, "empty C grid");
    ensure!(folds >= 2, InvalidInput, "need at least two folds");
    let mut fold_of = vec![0usize; train.len()];
    let mut g = rng(derive_seed(seed, 0xf01d));
    for class in train.classes() {
        let mut idx: Vec<usize> = (0..train.len()).filter(|&i| train.y()[i] == class).collect();
        ensure!(
            idx.len() >= folds,
            InvalidInput,
            "class {class} has {} samples, fewer than {folds} folds",
            idx.len()
        );
        idx.shuffle(&mut g);
        for (pos, i) in idx.into_iter().enumerate() {
            fold_of[i] = pos % folds;
        }
    }
    let splits: Vec<(LabeledFeatures, LabeledFeatures)> = (0..folds)
        .map(|fold| {
            let (val, tr): (Vec<usize>, Vec<usize>) = (0..train.len()).partition(|&i| fold_of[i] == fold);
            Ok((train.subset(&tr)?, train.subset(&val)?))
        })
        .collect::<Result<_>>()?;
    let mut scores = Vec::with_capacity(grid.len());
    for &c in grid {
        let mut acc = 0.0;
        for (tr, val) in &splits {
            let model = svm_train(tr, c, seed)?;
            let pred = svm_predict(&model, val.x())?;
            let hits = pred.iter().zip(val.y()).filter(|(a, b)| a == b).count();
            acc += hits as f64 / val.len() as f64;
        }
        scores.push((c, acc / folds as f64));
    }
    let best_c = scores
        .iter()
        .fold(None::<(f64, f64)>, |best, &(c, a)| match best {
            Some((bc, ba)) if ba > a || (ba == a && bc <= c) => Some((bc, ba)),
            _ => Some((c, a)),
        })
        .map(|(c, _)| c)
        .expect("non-empty grid");
    Ok(CvResult { best_c, scores })
}
