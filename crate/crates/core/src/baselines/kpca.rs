use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::sorted_eigen;
use crate::error::ensure;
use crate::util::{rng, squared_distance};
use crate::{Error, Result};

/// Training-set cap for the dense kernel eigenproblem.
pub const DEFAULT_KPCA_SAMPLES: usize = 2000;

/// RBF kernel PCA fitted on a (possibly subsampled) training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpcaModel {
    pub samples: Array2<f64>,
    pub lengthscale: f64,
    /// `M × N_f`; column `k` is the `k`-th centered-kernel eigenvector divided by `√λ_k`.
    pub alphas: Array2<f64>,
    pub eigenvalues: Array1<f64>,
    /// Column means of the training kernel matrix.
    kernel_col_means: Array1<f64>,
    kernel_grand_mean: f64,
}

impl KpcaModel {
    pub fn n_components(&self) -> usize {
        self.alphas.ncols()
    }
}

/// Mean Euclidean distance over all unordered pairs of rows.
pub fn mean_pairwise_distance(x: ArrayView2<'_, f64>) -> f64 {
    let m = x.nrows();
    if m < 2 {
        return 0.0;
    }
    let rows: Vec<&[f64]> = x.rows().into_iter().map(|r| r.to_slice().expect("contiguous")).collect();
    let mut total = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            total += squared_distance(rows[i], rows[j]).sqrt();
        }
    }
    total / (m * (m - 1) / 2) as f64
}

fn rbf(a: &[f64], b: &[f64], lengthscale: f64) -> f64 {
    (-squared_distance(a, b) / (2.0 * lengthscale * lengthscale)).exp()
}

fn cross_kernel(x: ArrayView2<'_, f64>, samples: &Array2<f64>, lengthscale: f64) -> Array2<f64> {
    let x = x.as_standard_layout();
    let mut k = Array2::zeros((x.nrows(), samples.nrows()));
    for (i, xi) in x.rows().into_iter().enumerate() {
        let xi = xi.to_slice().expect("contiguous");
        for (j, sj) in samples.rows().into_iter().enumerate() {
            k[[i, j]] = rbf(xi, sj.to_slice().expect("contiguous"), lengthscale);
        }
    }
    k
}

/// Fits kernel PCA with `k(x, y) = exp(−‖x − y‖² / 2ℓ²)`. With
/// `lengthscale = None`, `ℓ` is the mean pairwise distance of the samples.
pub fn kpca_fit(x: ArrayView2<'_, f64>, n_components: usize, lengthscale: Option<f64>) -> Result<KpcaModel> {
    let m = x.nrows();
    ensure!(m >= 2, InvalidInput, "kernel PCA needs at least two samples");
    ensure!(
        n_components >= 1 && n_components < m,
        InvalidInput,
        "component count {n_components} outside 1..={}",
        m - 1
    );
    let samples = x.as_standard_layout().into_owned();
    let ell = match lengthscale {
        Some(l) => l,
        None => mean_pairwise_distance(samples.view()),
    };
    if !(ell.is_finite() && ell > 0.0) {
        return Err(Error::InvalidInput(format!(
            "degenerate lengthscale {ell} (identical samples?)"
        )));
    }
    let k = cross_kernel(samples.view(), &samples, ell);
    let col_means = k.mean_axis(Axis(0)).expect("non-empty");
    let row_means = k.mean_axis(Axis(1)).expect("non-empty");
    let grand = col_means.mean().expect("non-empty");
    let mut centered = k;
    for i in 0..m {
        for j in 0..m {
            centered[[i, j]] += grand - row_means[i] - col_means[j];
        }
    }
    let (values, vectors) = sorted_eigen(&centered);
    let tol = 1e-12 * values[0].abs().max(1e-300);
    let kept = values.iter().take(n_components).take_while(|&&v| v > tol).count();
    ensure!(kept >= 1, Numeric, "centered kernel has no positive eigenvalue");
    let mut alphas = Array2::zeros((m, kept));
    for c in 0..kept {
        let scale = 1.0 / values[c].sqrt();
        for i in 0..m {
            alphas[[i, c]] = vectors[[c, i]] * scale;
        }
    }
    Ok(KpcaModel {
        samples,
        lengthscale: ell,
        alphas,
        eigenvalues: values.slice(ndarray::s![..kept]).to_owned(),
        kernel_col_means: col_means,
        kernel_grand_mean: grand,
    })
}

/// [`kpca_fit`] on at most `max_samples` rows drawn without replacement.
pub fn kpca_fit_subsampled(
    x: ArrayView2<'_, f64>,
    n_components: usize,
    lengthscale: Option<f64>,
    max_samples: usize,
    seed: u64,
) -> Result<KpcaModel> {
    if x.nrows() <= max_samples {
        return kpca_fit(x, n_components, lengthscale);
    }
    let mut idx = sample(&mut rng(seed), x.nrows(), max_samples).into_vec();
    idx.sort_unstable();
    kpca_fit(x.select(Axis(0), &idx).view(), n_components, lengthscale)
}

/// Projects new points: the cross-kernel is centered with the training
/// statistics, then multiplied by the scaled eigenvectors.
pub fn kpca_transform(model: &KpcaModel, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    ensure!(
        x.ncols() == model.samples.ncols(),
        ShapeMismatch,
        "data has {} columns, model expects {}",
        x.ncols(),
        model.samples.ncols()
    );
    let mut k = cross_kernel(x, &model.samples, model.lengthscale);
    let row_means = k.mean_axis(Axis(1)).expect("non-empty");
    for (i, mut row) in k.rows_mut().into_iter().enumerate() {
        row.iter_mut()
            .zip(model.kernel_col_means.iter())
            .for_each(|(v, cm)| *v += model.kernel_grand_mean - row_means[i] - cm);
    }
    Ok(k.dot(&model.alphas))
}
