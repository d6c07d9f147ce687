use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::{column_means, sorted_eigen};
use crate::error::ensure;
use crate::Result;

/// Top principal directions of the training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Array1<f64>,
    /// `N_f × D`, orthonormal rows.
    pub components: Array2<f64>,
    /// Variances along each component (sample covariance, `M − 1`
    /// denominator), non-increasing.
    pub eigenvalues: Array1<f64>,
}

impl PcaModel {
    pub fn n_components(&self) -> usize {
        self.components.nrows()
    }

    /// Maps scores back to input space.
    pub fn inverse_transform(&self, scores: ArrayView2<'_, f64>) -> Array2<f64> {
        scores.dot(&self.components) + &self.mean
    }
}

/// Eigendecomposition of the sample covariance, keeping `n_components`
/// directions.
pub fn pca_fit(x: ArrayView2<'_, f64>, n_components: usize) -> Result<PcaModel> {
    let (m, d) = x.dim();
    ensure!(m >= 2, InvalidInput, "PCA needs at least two samples");
    ensure!(
        n_components >= 1 && n_components <= m.min(d),
        InvalidInput,
        "component count {n_components} outside 1..={}",
        m.min(d)
    );
    let mean = column_means(x);
    let centered = &x - &mean;
    let cov = centered.t().dot(&centered) / (m - 1) as f64;
    let (values, vectors) = sorted_eigen(&cov);
    Ok(PcaModel {
        mean,
        components: vectors.slice(ndarray::s![..n_components, ..]).to_owned(),
        eigenvalues: values.slice(ndarray::s![..n_components]).mapv(|v| v.max(0.0)),
    })
}

/// `(X − mean) · componentsᵀ`.
pub fn pca_transform(model: &PcaModel, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    ensure!(
        x.ncols() == model.mean.len(),
        ShapeMismatch,
        "data has {} columns, model expects {}",
        x.ncols(),
        model.mean.len()
    );
    Ok((&x - &model.mean.view().insert_axis(Axis(0))).dot(&model.components.t()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn rank_one_line() {
        let x = array![[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [-1.0, -1.0]];
        let m = pca_fit(x.view(), 2).unwrap();
        let s = 1.0 / 2f64.sqrt();
        assert!((m.components[[0, 0]] - s).abs() < 1e-12);
        assert!((m.components[[0, 1]] - s).abs() < 1e-12);
        assert!(m.eigenvalues[1].abs() < 1e-12);
    }

    #[test]
    fn mean_maps_to_zero() {
        let x = array![[1.0, 2.0, 0.5], [3.0, -1.0, 2.0], [0.0, 0.0, 1.0], [2.0, 5.0, -3.0]];
        let m = pca_fit(x.view(), 2).unwrap();
        let z = pca_transform(&m, m.mean.view().insert_axis(Axis(0))).unwrap();
        assert!(z.iter().all(|v| v.abs() < 1e-12));
        assert!(pca_fit(x.view(), 4).is_err());
        assert!(pca_transform(&m, array![[1.0, 2.0]].view()).is_err());
    }
}
