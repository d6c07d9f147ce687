use ndarray::Array2;
use rand::Rng;

use super::{FeatureMap, PatchMatrix};
use crate::error::ensure;
use crate::util::rng;
use crate::Result;

/// Contrast-normalization regularizer for unit-scaled data.
pub const DEFAULT_NORMALIZATION_EPS: f64 = 1e-2;

/// Top-left corner of an `r × r` window inside one of several maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PatchLocation {
    pub map: usize,
    pub row: usize,
    pub col: usize,
}

/// Number of valid `r × r` windows in a map.
pub fn window_count(map: &FeatureMap, r: usize) -> usize {
    if map.rows() < r || map.cols() < r {
        0
    } else {
        (map.rows() - r + 1) * (map.cols() - r + 1)
    }
}

/// Samples `n` windows uniformly with replacement over every valid
/// `(map, row, col)` triple, then vectorizes them.
pub fn extract_patches(maps: &[FeatureMap], r: usize, n: usize, seed: u64) -> Result<PatchMatrix> {
    let locations = sample_locations(maps, r, n, seed)?;
    extract_patches_at(maps, r, &locations)
}

pub(crate) fn sample_locations(
    maps: &[FeatureMap],
    r: usize,
    n: usize,
    seed: u64,
) -> Result<Vec<PatchLocation>> {
    ensure!(!maps.is_empty(), InvalidInput, "no maps to sample patches from");
    ensure!(n >= 1, InvalidInput, "patch count must be positive");
    ensure!(r >= 1, InvalidInput, "receptive field must be positive");
    let channels = maps[0].channels();
    for (i, m) in maps.iter().enumerate() {
        ensure!(
            m.rows() >= r && m.cols() >= r,
            InvalidInput,
            "receptive field {r} exceeds map {i} of size {}x{}",
            m.rows(),
            m.cols()
        );
        ensure!(
            m.channels() == channels,
            ShapeMismatch,
            "map {i} has {} channels, expected {channels}",
            m.channels()
        );
    }
    // cumulative window counts so each triple is equally likely
    let mut cumulative = Vec::with_capacity(maps.len());
    let mut total = 0usize;
    for m in maps {
        total += window_count(m, r);
        cumulative.push(total);
    }
    let mut rng = rng(seed);
    let locations = (0..n)
        .map(|_| {
            let u = rng.random_range(0..total);
            let map = cumulative.partition_point(|&c| c <= u);
            let offset = u - if map == 0 { 0 } else { cumulative[map - 1] };
            let width = maps[map].cols() - r + 1;
            PatchLocation {
                map,
                row: offset / width,
                col: offset % width,
            }
        })
        .collect();
    Ok(locations)
}

/// Vectorizes the windows at the given locations.
pub fn extract_patches_at(
    maps: &[FeatureMap],
    r: usize,
    locations: &[PatchLocation],
) -> Result<PatchMatrix> {
    ensure!(!maps.is_empty(), InvalidInput, "no maps to extract patches from");
    let channels = maps[0].channels();
    let d = r * r * channels;
    let mut out = Array2::zeros((locations.len(), d));
    for (i, loc) in locations.iter().enumerate() {
        let m = maps
            .get(loc.map)
            .ok_or_else(|| crate::Error::InvalidInput(format!("no map {}", loc.map)))?;
        ensure!(
            loc.row + r <= m.rows() && loc.col + r <= m.cols(),
            InvalidInput,
            "window at ({}, {}) does not fit map {}",
            loc.row,
            loc.col,
            loc.map
        );
        ensure!(m.channels() == channels, ShapeMismatch, "channel count differs across maps");
        let src = m.as_slice();
        let row_stride = m.cols() * channels;
        let dst = out.row_mut(i).into_slice().expect("contiguous row");
        for dy in 0..r {
            let start = (loc.row + dy) * row_stride + loc.col * channels;
            dst[dy * r * channels..(dy + 1) * r * channels]
                .copy_from_slice(&src[start..start + r * channels]);
        }
    }
    PatchMatrix::new(out)
}

/// Shifts a vector to zero mean and divides by `std + eps` (population std).
/// A vector whose `std + eps` is zero becomes all zeros.
pub fn normalize_in_place(v: &mut [f64], eps: f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let denom = var.sqrt() + eps;
    if denom > 0.0 {
        v.iter_mut().for_each(|x| *x = (*x - mean) / denom);
    } else {
        v.iter_mut().for_each(|x| *x = 0.0);
    }
}

/// Per-patch brightness and contrast normalization.
pub fn normalize_patches(patches: &PatchMatrix, eps: f64) -> PatchMatrix {
    let mut data = patches.view().to_owned();
    for mut row in data.rows_mut() {
        normalize_in_place(row.as_slice_mut().expect("contiguous row"), eps);
    }
    PatchMatrix { data }
}
