//! Raster and label I/O, classification map rendering, patch sampling and
//! the synthetic scene generator.
//!
//! All tensors are stored row-major over `(row, col, channel)` with the
//! channel index fastest. Patch vectorization and convolution both rely on
//! this order, so a patch vector dotted with a filter row gives exactly the
//! convolution pre-activation at that window.

mod patches;
mod raster;
mod render;
mod synth;

use ndarray::{Array2, Array3, ArrayView1, ArrayView2, ArrayView3};

use crate::error::ensure;
use crate::Result;

pub use patches::{
    extract_patches, extract_patches_at, normalize_in_place, normalize_patches, window_count,
    PatchLocation, DEFAULT_NORMALIZATION_EPS,
};
pub use raster::{read_labels, read_raster, write_labels, write_raster};
pub use render::{encode_feature_ppm, encode_ppm, render_map, PALETTE};
pub use synth::{
    reference_signature, synth_dataset, tile_scenes, ClassGenerator, Region, SynthSpec, TexturePattern,
};

/// A `rows × cols × channels` real-valued tensor: an input image or the
/// output of a network layer.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    data: Array3<f64>,
}

impl FeatureMap {
    /// Wraps an array after checking that every dimension is non-zero and
    /// every value is finite.
    pub fn from_array(data: Array3<f64>) -> Result<Self> {
        let (r, c, k) = data.dim();
        ensure!(
            r >= 1 && c >= 1 && k >= 1,
            InvalidInput,
            "feature map dimensions must be positive, got {r}x{c}x{k}"
        );
        ensure!(
            data.iter().all(|v| v.is_finite()),
            InvalidInput,
            "feature map contains non-finite values"
        );
        let data = if data.is_standard_layout() {
            data
        } else {
            data.as_standard_layout().into_owned()
        };
        Ok(Self { data })
    }

    pub fn from_vec(rows: usize, cols: usize, channels: usize, values: Vec<f64>) -> Result<Self> {
        ensure!(
            values.len() == rows * cols * channels,
            ShapeMismatch,
            "{} values for a {rows}x{cols}x{channels} map",
            values.len()
        );
        let data = Array3::from_shape_vec((rows, cols, channels), values)
            .map_err(|e| crate::Error::ShapeMismatch(e.to_string()))?;
        Self::from_array(data)
    }

    pub fn zeros(rows: usize, cols: usize, channels: usize) -> Result<Self> {
        Self::from_array(Array3::zeros((rows, cols, channels)))
    }

    /// Internal constructor for arrays produced by this crate's own kernels.
    pub(crate) fn from_array_unchecked(data: Array3<f64>) -> Self {
        debug_assert!(data.is_standard_layout());
        Self { data }
    }

    pub fn rows(&self) -> usize {
        self.data.dim().0
    }

    pub fn cols(&self) -> usize {
        self.data.dim().1
    }

    pub fn channels(&self) -> usize {
        self.data.dim().2
    }

    pub fn dim(&self) -> (usize, usize, usize) {
        self.data.dim()
    }

    pub fn get(&self, row: usize, col: usize, channel: usize) -> f64 {
        self.data[[row, col, channel]]
    }

    /// Channel vector of one pixel.
    pub fn pixel(&self, row: usize, col: usize) -> ArrayView1<'_, f64> {
        self.data.slice(ndarray::s![row, col, ..])
    }

    pub fn view(&self) -> ArrayView3<'_, f64> {
        self.data.view()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.data.as_slice().expect("standard layout")
    }

    pub fn into_array(self) -> Array3<f64> {
        self.data
    }

    /// Reshapes to a `(rows·cols) × channels` matrix, one row per pixel.
    pub fn pixel_matrix(&self) -> ArrayView2<'_, f64> {
        let (r, c, k) = self.dim();
        ArrayView2::from_shape((r * c, k), self.as_slice()).expect("standard layout")
    }
}

/// Ground-truth or predicted class raster. Label 0 marks unlabeled pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    rows: usize,
    cols: usize,
    labels: Vec<u16>,
}

impl LabelMap {
    pub fn new(rows: usize, cols: usize, labels: Vec<u16>) -> Result<Self> {
        ensure!(
            rows >= 1 && cols >= 1,
            InvalidInput,
            "label map dimensions must be positive, got {rows}x{cols}"
        );
        ensure!(
            labels.len() == rows * cols,
            ShapeMismatch,
            "{} labels for a {rows}x{cols} map",
            labels.len()
        );
        Ok(Self { rows, cols, labels })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> u16 {
        self.labels[row * self.cols + col]
    }

    pub fn labels(&self) -> &[u16] {
        &self.labels
    }

    /// Largest label present (the class count `K` when labels are dense).
    pub fn num_classes(&self) -> usize {
        self.labels.iter().copied().max().unwrap_or(0) as usize
    }

    /// Pixel count per label, indexed `0..=K`.
    pub fn histogram(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes() + 1];
        for &l in &self.labels {
            counts[l as usize] += 1;
        }
        counts
    }
}

/// `N × D` matrix of vectorized patches, one patch per row.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchMatrix {
    data: Array2<f64>,
}

impl PatchMatrix {
    pub fn new(data: Array2<f64>) -> Result<Self> {
        let (n, d) = data.dim();
        ensure!(
            n >= 1 && d >= 1,
            InvalidInput,
            "patch matrix must be non-empty, got {n}x{d}"
        );
        let data = if data.is_standard_layout() {
            data
        } else {
            data.as_standard_layout().into_owned()
        };
        Ok(Self { data })
    }

    pub fn len(&self) -> usize {
        self.data.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.data.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.data.as_slice().expect("standard layout")[i * d..(i + 1) * d]
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.data.view()
    }

    pub fn into_array(self) -> Array2<f64> {
        self.data
    }
}
