use ndarray::ArrayView2;
use rayon::prelude::*;

use super::LabeledFeatures;
use crate::error::ensure;
use crate::util::squared_distance;
use crate::Result;

/// 1-nearest-neighbor labels under Euclidean distance; the earliest
/// training row wins ties.
pub fn knn1_predict(train: &LabeledFeatures, x_test: ArrayView2<'_, f64>) -> Result<Vec<u16>> {
    ensure!(!train.is_empty(), InvalidInput, "empty training set");
    ensure!(
        x_test.ncols() == train.features(),
        ShapeMismatch,
        "test rows have {} features, training rows {}",
        x_test.ncols(),
        train.features()
    );
    let train_x = train.x();
    let train_flat = train_x.as_slice().expect("standard layout");
    let f = train.features();
    let test = x_test.as_standard_layout();
    let rows: Vec<&[f64]> = test.rows().into_iter().map(|r| r.to_slice().expect("contiguous")).collect();
    Ok(rows
        .par_iter()
        .map(|x| {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (i, t) in train_flat.chunks_exact(f.max(1)).enumerate() {
                let d = squared_distance(t, x);
                if d < best_d {
                    best_d = d;
                    best = i;
                }
            }
            train.y()[best]
        })
        .collect())
}
