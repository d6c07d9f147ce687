//! Forward computation of convolutional feature extractors.
//!
//! A layer computes `pool(σ(O ⋆ W + b))`. "Convolution" here is a valid
//! (unpadded) multi-channel cross-correlation: filters are learned, so the
//! flip is immaterial. The composition order is fixed as
//! convolution → encoder nonlinearity → optional polarity split → optional
//! max pooling.

pub(crate) mod extract;
mod ops;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::ensure;
use crate::imageio::DEFAULT_NORMALIZATION_EPS;
use crate::Result;

pub use extract::{extract_features, forward_layer, layer_output_dims, Features, Mode};
pub use ops::{
    apply_nonlinearity, bilinear_upsample, convolve_normalized, convolve_valid, max_pool,
    polarity_split, quadrant_sum_pool,
};

/// Pointwise activation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Nonlinearity {
    #[default]
    Logistic,
    Identity,
    Rectifier,
}

impl Nonlinearity {
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Nonlinearity::Logistic => 1.0 / (1.0 + (-z).exp()),
            Nonlinearity::Identity => z,
            Nonlinearity::Rectifier => z.max(0.0),
        }
    }

    /// Derivative at pre-activation `z`, given the activation `h = σ(z)`.
    /// The rectifier uses the subgradient 0 at `z = 0`.
    pub fn derivative(self, z: f64, h: f64) -> f64 {
        match self {
            Nonlinearity::Logistic => h * (1.0 - h),
            Nonlinearity::Identity => 1.0,
            Nonlinearity::Rectifier => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Target value for a selected output.
    pub fn active_value(self) -> f64 {
        1.0
    }

    /// Target value for an unselected output.
    pub fn inactive_value(self) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pooling {
    #[default]
    None,
    /// Non-overlapping `P × P` max pooling, partial border windows included.
    Max(usize),
}

fn one() -> usize {
    1
}

/// Hyper-parameters of one convolutional layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerSpec {
    pub outputs: usize,
    pub receptive_field: usize,
    #[serde(default = "one")]
    pub stride: usize,
    /// Nonlinearity used while training the layer.
    #[serde(default)]
    pub nonlinearity: Nonlinearity,
    /// Nonlinearity used for feature extraction. `None` means the natural
    /// encoding (same as training).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub encoder: Option<Nonlinearity>,
    #[serde(default)]
    pub pooling: Pooling,
    #[serde(default)]
    pub polarity_split: bool,
}

impl LayerSpec {
    /// Logistic layer with natural encoding, stride 1, no pooling.
    pub fn new(outputs: usize, receptive_field: usize) -> Self {
        Self {
            outputs,
            receptive_field,
            stride: 1,
            nonlinearity: Nonlinearity::Logistic,
            encoder: None,
            pooling: Pooling::None,
            polarity_split: false,
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride;
        self
    }

    pub fn with_encoder(mut self, encoder: Nonlinearity) -> Self {
        self.encoder = Some(encoder);
        self
    }

    pub fn with_pooling(mut self, pooling: Pooling) -> Self {
        self.pooling = pooling;
        self
    }

    pub fn with_polarity_split(mut self) -> Self {
        self.polarity_split = true;
        self
    }

    pub fn encoder(&self) -> Nonlinearity {
        self.encoder.unwrap_or(self.nonlinearity)
    }

    pub fn output_channels(&self) -> usize {
        if self.polarity_split {
            2 * self.outputs
        } else {
            self.outputs
        }
    }

    fn validate(&self, index: usize) -> Result<()> {
        let l = index + 1;
        ensure!(self.outputs >= 1, Config, "layer {l}: outputs must be positive");
        ensure!(self.receptive_field >= 1, Config, "layer {l}: receptive field must be positive");
        ensure!(self.stride >= 1, Config, "layer {l}: stride must be positive");
        if let Pooling::Max(p) = self.pooling {
            ensure!(p >= 2, Config, "layer {l}: max pooling size must be at least 2, got {p}");
        }
        Ok(())
    }
}

fn default_normalization() -> Option<f64> {
    Some(DEFAULT_NORMALIZATION_EPS)
}

/// An ordered stack of layers over an input with `input_channels` bands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchitectureSpec {
    pub input_channels: usize,
    pub layers: Vec<LayerSpec>,
    /// Contrast-normalization regularizer applied to every first-layer input
    /// window, both for training patches and at extraction time. `null`
    /// disables it.
    #[serde(default = "default_normalization")]
    pub input_normalization: Option<f64>,
}

impl ArchitectureSpec {
    pub fn new(input_channels: usize, layers: Vec<LayerSpec>) -> Self {
        Self {
            input_channels,
            layers,
            input_normalization: default_normalization(),
        }
    }

    pub fn without_input_normalization(mut self) -> Self {
        self.input_normalization = None;
        self
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    /// Channels entering layer `index` (0-based).
    pub fn input_channels_of(&self, index: usize) -> usize {
        if index == 0 {
            self.input_channels
        } else {
            self.layers[index - 1].output_channels()
        }
    }

    /// Patch dimensionality `r²·channels` of layer `index`.
    pub fn input_dim_of(&self, index: usize) -> usize {
        let r = self.layers[index].receptive_field;
        r * r * self.input_channels_of(index)
    }

    pub fn output_channels(&self) -> usize {
        self.layers.last().map_or(self.input_channels, LayerSpec::output_channels)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(self.input_channels >= 1, Config, "input channel count must be positive");
        ensure!(!self.layers.is_empty(), Config, "architecture has no layers");
        let top = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            layer.validate(i)?;
            ensure!(
                !layer.polarity_split || i == top,
                Config,
                "layer {}: polarity split is only allowed on the topmost layer",
                i + 1
            );
        }
        if let Some(eps) = self.input_normalization {
            ensure!(eps.is_finite() && eps >= 0.0, Config, "input normalization eps must be >= 0");
        }
        Ok(())
    }
}

/// Parameters of one layer: `N_h` filters of length `D = r²·channels` plus
/// `N_h` biases. Filter rows use the patch vectorization order.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    weights: Array2<f64>,
    biases: Array1<f64>,
    receptive_field: usize,
    input_channels: usize,
}

impl FilterBank {
    pub fn new(
        weights: Array2<f64>,
        biases: Array1<f64>,
        receptive_field: usize,
        input_channels: usize,
    ) -> Result<Self> {
        let (n_h, d) = weights.dim();
        ensure!(n_h >= 1, InvalidInput, "filter bank needs at least one filter");
        ensure!(
            receptive_field >= 1 && input_channels >= 1,
            InvalidInput,
            "receptive field and channel count must be positive"
        );
        ensure!(
            d == receptive_field * receptive_field * input_channels,
            ShapeMismatch,
            "filter length {d} != {receptive_field}²·{input_channels}"
        );
        ensure!(
            biases.len() == n_h,
            ShapeMismatch,
            "{} biases for {n_h} filters",
            biases.len()
        );
        ensure!(
            weights.iter().chain(biases.iter()).all(|v| v.is_finite()),
            Numeric,
            "filter bank has non-finite entries"
        );
        let weights = if weights.is_standard_layout() {
            weights
        } else {
            weights.as_standard_layout().into_owned()
        };
        Ok(Self {
            weights,
            biases,
            receptive_field,
            input_channels,
        })
    }

    pub fn zeros(outputs: usize, receptive_field: usize, input_channels: usize) -> Result<Self> {
        let d = receptive_field * receptive_field * input_channels;
        Self::new(
            Array2::zeros((outputs, d)),
            Array1::zeros(outputs),
            receptive_field,
            input_channels,
        )
    }

    pub fn outputs(&self) -> usize {
        self.weights.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn receptive_field(&self) -> usize {
        self.receptive_field
    }

    pub fn input_channels(&self) -> usize {
        self.input_channels
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn biases(&self) -> &Array1<f64> {
        &self.biases
    }

    pub fn filter(&self, k: usize) -> &[f64] {
        let d = self.input_dim();
        &self.weights.as_slice().expect("standard layout")[k * d..(k + 1) * d]
    }

    pub(crate) fn params_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (
            self.weights.as_slice_mut().expect("standard layout"),
            self.biases.as_slice_mut().expect("contiguous"),
        )
    }

    /// Pre-activations `x · W_k + b_k` for one vectorized patch.
    pub fn pre_activations(&self, x: &[f64], out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate() {
            *o = crate::util::dot(self.filter(k), x) + self.biases[k];
        }
    }

    fn check_layer(&self, layer: &LayerSpec, in_channels: usize, index: usize) -> Result<()> {
        ensure!(
            self.outputs() == layer.outputs
                && self.receptive_field == layer.receptive_field
                && self.input_channels == in_channels,
            ShapeMismatch,
            "layer {}: filter bank is {}x{} (r={}, channels={}) but the layer expects {} outputs, r={}, channels={}",
            index + 1,
            self.outputs(),
            self.input_dim(),
            self.receptive_field,
            self.input_channels,
            layer.outputs,
            layer.receptive_field,
            in_channels
        );
        Ok(())
    }
}
