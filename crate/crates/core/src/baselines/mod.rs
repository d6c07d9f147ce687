//! Unsupervised extractors used as comparison points: linear PCA, RBF
//! kernel PCA and OMP-1 dictionary learning.

mod kpca;
mod omp1;
mod pca;

pub use kpca::{kpca_fit, kpca_fit_subsampled, kpca_transform, mean_pairwise_distance, KpcaModel, DEFAULT_KPCA_SAMPLES};
pub use omp1::{omp1_encode, omp1_fit, Omp1Fit, Omp1Model};
pub use pca::{pca_fit, pca_transform, PcaModel};

use nalgebra::DMatrix;
use ndarray::{Array1, Array2, ArrayView2};

/// Eigenpairs of a symmetric matrix sorted by decreasing eigenvalue (stable
/// on ties), each eigenvector flipped so its largest-magnitude coordinate
/// is positive.
pub(crate) fn sorted_eigen(sym: &Array2<f64>) -> (Array1<f64>, Array2<f64>) {
    let n = sym.nrows();
    let m = DMatrix::from_fn(n, n, |i, j| 0.5 * (sym[[i, j]] + sym[[j, i]]));
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = Array1::from_iter(order.iter().map(|&i| eig.eigenvalues[i]));
    // vectors as rows
    let mut vectors = Array2::zeros((n, n));
    for (row, &i) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(i);
        for j in 0..n {
            vectors[[row, j]] = col[j];
        }
    }
    for mut v in vectors.rows_mut() {
        fix_sign(v.as_slice_mut().expect("contiguous"));
    }
    (values, vectors)
}

/// Flips `v` so that its largest-magnitude coordinate (first on ties) is positive.
pub(crate) fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

pub(crate) fn column_means(x: ArrayView2<'_, f64>) -> Array1<f64> {
    x.mean_axis(ndarray::Axis(0)).expect("non-empty")
}
