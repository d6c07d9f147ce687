use serde::{Deserialize, Serialize};

use super::ops::{bilinear_upsample, forward_impl, quadrant_sum_pool, valid_len};
use super::{ArchitectureSpec, FilterBank, LayerSpec, Pooling};
use crate::error::ensure;
use crate::imageio::FeatureMap;
use crate::{Error, Result};

/// Per-image or per-pixel feature extraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Upsample the top map back to the input size: one vector per pixel.
    Pixel,
    /// Sum-pool the top map into four quadrants: one vector per image.
    Scene,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Features {
    Map(FeatureMap),
    Vector(Vec<f64>),
}

impl Features {
    pub fn into_map(self) -> Option<FeatureMap> {
        match self {
            Features::Map(m) => Some(m),
            Features::Vector(_) => None,
        }
    }

    pub fn into_vector(self) -> Option<Vec<f64>> {
        match self {
            Features::Vector(v) => Some(v),
            Features::Map(_) => None,
        }
    }
}

/// Spatial size after one layer, or `None` if the receptive field does not fit.
pub fn layer_output_dims(rows: usize, cols: usize, spec: &LayerSpec) -> Option<(usize, usize)> {
    let r = spec.receptive_field;
    if rows < r || cols < r {
        return None;
    }
    let (h, w) = (valid_len(rows, r, spec.stride), valid_len(cols, r, spec.stride));
    Some(match spec.pooling {
        Pooling::None => (h, w),
        Pooling::Max(p) => (h.div_ceil(p), w.div_ceil(p)),
    })
}

/// One layer: convolution (stride `s`), encoder nonlinearity, optional
/// polarity split, optional max pooling.
pub fn forward_layer(input: &FeatureMap, filters: &FilterBank, spec: &LayerSpec) -> Result<FeatureMap> {
    forward_impl(input, filters, spec, None)
}

/// Runs layer `index` of `arch`, applying the first-layer window
/// normalization when configured.
pub(crate) fn forward_arch_layer(
    input: &FeatureMap,
    arch: &ArchitectureSpec,
    params: &FilterBank,
    index: usize,
) -> Result<FeatureMap> {
    let spec = &arch.layers[index];
    params.check_layer(spec, arch.input_channels_of(index), index)?;
    ensure!(
        input.channels() == arch.input_channels_of(index),
        ShapeMismatch,
        "layer {}: input has {} channels, expected {}",
        index + 1,
        input.channels(),
        arch.input_channels_of(index)
    );
    ensure!(
        input.rows() >= spec.receptive_field && input.cols() >= spec.receptive_field,
        ShapeMismatch,
        "layer {}: receptive field {} exceeds its {}x{} input map",
        index + 1,
        spec.receptive_field,
        input.rows(),
        input.cols()
    );
    let normalize = if index == 0 { arch.input_normalization } else { None };
    forward_impl(input, params, spec, normalize)
}

/// Runs the whole stack, then pools (scene mode) or upsamples (pixel mode).
pub fn extract_features(
    image: &FeatureMap,
    arch: &ArchitectureSpec,
    params: &[FilterBank],
    mode: Mode,
) -> Result<Features> {
    arch.validate()?;
    ensure!(
        params.len() == arch.len(),
        ShapeMismatch,
        "{} filter banks for a {}-layer architecture",
        params.len(),
        arch.len()
    );
    let mut current = forward_arch_layer(image, arch, &params[0], 0)?;
    for (i, bank) in params.iter().enumerate().skip(1) {
        current = forward_arch_layer(&current, arch, bank, i)?;
    }
    match mode {
        Mode::Scene => quadrant_sum_pool(&current)
            .map(Features::Vector)
            .map_err(|e| Error::ShapeMismatch(format!("top layer map too small for quadrant pooling: {e}"))),
        Mode::Pixel => bilinear_upsample(&current, image.rows(), image.cols()).map(Features::Map),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{convolve_valid, max_pool, apply_nonlinearity, Nonlinearity};
    use ndarray::{Array1, Array2, Array3};
    use rand::Rng;

    fn map(rows: usize, cols: usize, ch: usize, seed: u64) -> FeatureMap {
        let mut g = crate::util::rng(seed);
        FeatureMap::from_array(Array3::from_shape_fn((rows, cols, ch), |_| g.random::<f64>())).unwrap()
    }

    fn bank(n: usize, r: usize, ch: usize, seed: u64) -> FilterBank {
        let mut g = crate::util::rng(seed);
        FilterBank::new(
            Array2::from_shape_fn((n, r * r * ch), |_| g.random::<f64>() - 0.5),
            Array1::from_shape_fn(n, |_| g.random::<f64>() - 0.5),
            r,
            ch,
        )
        .unwrap()
    }

    #[test]
    fn identity_layer_is_convolution() {
        let m = map(9, 8, 3, 1);
        let f = bank(4, 3, 3, 2);
        let spec = LayerSpec::new(4, 3).with_encoder(Nonlinearity::Identity);
        assert_eq!(forward_layer(&m, &f, &spec).unwrap(), convolve_valid(&m, &f, 1).unwrap());
    }

    #[test]
    fn logistic_pool_composition() {
        let m = map(11, 10, 2, 3);
        let f = bank(5, 3, 2, 4);
        let spec = LayerSpec::new(5, 3).with_pooling(Pooling::Max(2));
        let expect = max_pool(&apply_nonlinearity(&convolve_valid(&m, &f, 1).unwrap(), Nonlinearity::Logistic), 2)
            .unwrap();
        assert_eq!(forward_layer(&m, &f, &spec).unwrap(), expect);
    }

    #[test]
    fn zero_filters_give_half() {
        let m = map(6, 6, 2, 3);
        let f = FilterBank::zeros(3, 3, 2).unwrap();
        let out = forward_layer(&m, &f, &LayerSpec::new(3, 3)).unwrap();
        assert!(out.as_slice().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn single_layer_pixel_mode_native_resolution() {
        let m = map(7, 7, 2, 5);
        let arch = ArchitectureSpec::new(2, vec![LayerSpec::new(3, 1)]);
        let f = bank(3, 1, 2, 6);
        let out = extract_features(&m, &arch, &[f], Mode::Pixel).unwrap().into_map().unwrap();
        assert_eq!(out.dim(), (7, 7, 3));
    }

    #[test]
    fn two_layer_dims_follow_ceil_rule() {
        // 33 -conv5-> 29 -pool2-> 15 -conv5-> 11 -pool2-> 6, then back up to 33
        let spec1 = LayerSpec::new(4, 5).with_pooling(Pooling::Max(2));
        let spec2 = LayerSpec::new(4, 5).with_pooling(Pooling::Max(2));
        assert_eq!(layer_output_dims(33, 33, &spec1), Some((15, 15)));
        assert_eq!(layer_output_dims(15, 15, &spec2), Some((6, 6)));
        let arch = ArchitectureSpec::new(2, vec![spec1, spec2]);
        let m = map(33, 33, 2, 7);
        let params = [bank(4, 5, 2, 8), bank(4, 5, 4, 9)];
        let out = extract_features(&m, &arch, &params, Mode::Pixel).unwrap().into_map().unwrap();
        assert_eq!(out.dim(), (33, 33, 4));
    }

    #[test]
    fn scene_vector_length() {
        let m = map(16, 16, 3, 1);
        let arch = ArchitectureSpec::new(3, vec![LayerSpec::new(6, 4).with_stride(2).with_polarity_split()]);
        let v = extract_features(&m, &arch, &[bank(6, 4, 3, 2)], Mode::Scene)
            .unwrap()
            .into_vector()
            .unwrap();
        assert_eq!(v.len(), 4 * 12);
    }

    #[test]
    fn oversized_second_layer_names_layer() {
        let m = map(8, 8, 1, 1);
        let arch = ArchitectureSpec::new(
            1,
            vec![LayerSpec::new(2, 3).with_pooling(Pooling::Max(2)), LayerSpec::new(2, 5)],
        );
        let err = extract_features(&m, &arch, &[bank(2, 3, 1, 1), bank(2, 5, 2, 2)], Mode::Pixel).unwrap_err();
        assert!(err.to_string().contains("layer 2"), "{err}");
    }
}
