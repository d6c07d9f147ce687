//! Classifiers applied to extracted features.

mod knn;
mod svm;

use ndarray::{Array2, ArrayView2, Axis};

use crate::error::ensure;
use crate::Result;

pub use knn::knn1_predict;
pub use svm::{cv_select_c, svm_train, svm_train_traced, svm_predict, CvResult, SvmModel, DEFAULT_C_GRID, SVM_MAX_PASSES, SVM_TOLERANCE};

/// Feature rows with class labels in `1..=K` (label 0 is not allowed).
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledFeatures {
    x: Array2<f64>,
    y: Vec<u16>,
}

impl LabeledFeatures {
    pub fn new(x: Array2<f64>, y: Vec<u16>) -> Result<Self> {
        ensure!(x.nrows() >= 1, InvalidInput, "no labeled samples");
        ensure!(
            x.nrows() == y.len(),
            ShapeMismatch,
            "{} feature rows vs {} labels",
            x.nrows(),
            y.len()
        );
        ensure!(!y.contains(&0), InvalidInput, "label 0 (unlabeled) cannot be used for training");
        ensure!(x.iter().all(|v| v.is_finite()), InvalidInput, "features must be finite");
        let x = if x.is_standard_layout() { x } else { x.as_standard_layout().into_owned() };
        Ok(Self { x, y })
    }

    pub fn x(&self) -> ArrayView2<'_, f64> {
        self.x.view()
    }

    pub fn y(&self) -> &[u16] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn features(&self) -> usize {
        self.x.ncols()
    }

    /// Distinct labels, ascending.
    pub fn classes(&self) -> Vec<u16> {
        let mut c = self.y.clone();
        c.sort_unstable();
        c.dedup();
        c
    }

    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        Self::new(
            self.x.select(Axis(0), indices),
            indices.iter().map(|&i| self.y[i]).collect(),
        )
    }
}
