use ndarray::Array3;
use rayon::prelude::*;

use super::{FilterBank, LayerSpec, Nonlinearity, Pooling};
use crate::error::ensure;
use crate::imageio::{normalize_in_place, FeatureMap};
use crate::Result;

/// Output side length of a valid correlation.
pub(crate) fn valid_len(n: usize, r: usize, stride: usize) -> usize {
    (n - r) / stride + 1
}

/// `x · W_k` at every window (no bias). When `normalize` is set, each window
/// is contrast-normalized with that eps before the dot products.
fn correlate(
    input: &FeatureMap,
    filters: &FilterBank,
    stride: usize,
    normalize: Option<f64>,
) -> Result<Array3<f64>> {
    let (rows, cols, ch) = input.dim();
    let r = filters.receptive_field();
    ensure!(stride >= 1, InvalidInput, "stride must be positive");
    ensure!(
        ch == filters.input_channels(),
        ShapeMismatch,
        "input has {ch} channels, filters expect {}",
        filters.input_channels()
    );
    ensure!(
        rows >= r && cols >= r,
        ShapeMismatch,
        "receptive field {r} exceeds {rows}x{cols} input"
    );
    let (out_rows, out_cols) = (valid_len(rows, r, stride), valid_len(cols, r, stride));
    let n_h = filters.outputs();
    let src = input.as_slice();
    let row_stride = cols * ch;
    let seg = r * ch;
    let mut out = vec![0.0; out_rows * out_cols * n_h];
    out.par_chunks_mut(out_cols * n_h)
        .enumerate()
        .for_each(|(y, out_row)| {
            let mut patch = vec![0.0; seg * r];
            for x in 0..out_cols {
                for dy in 0..r {
                    let start = (y * stride + dy) * row_stride + x * stride * ch;
                    patch[dy * seg..(dy + 1) * seg].copy_from_slice(&src[start..start + seg]);
                }
                if let Some(eps) = normalize {
                    normalize_in_place(&mut patch, eps);
                }
                for (k, o) in out_row[x * n_h..(x + 1) * n_h].iter_mut().enumerate() {
                    *o = crate::util::dot(filters.filter(k), &patch);
                }
            }
        });
    Ok(Array3::from_shape_vec((out_rows, out_cols, n_h), out).expect("shape"))
}

fn add_bias(mut z: Array3<f64>, filters: &FilterBank, sign: f64) -> Array3<f64> {
    let b = filters.biases();
    for mut px in z.lanes_mut(ndarray::Axis(2)) {
        px.iter_mut().zip(b.iter()).for_each(|(v, bk)| *v = sign * *v + bk);
    }
    z
}

/// Valid multi-channel cross-correlation plus bias: the layer pre-activation.
///
/// Output is `floor((R−r)/s)+1 × floor((C−r)/s)+1 × N_h`.
pub fn convolve_valid(input: &FeatureMap, filters: &FilterBank, stride: usize) -> Result<FeatureMap> {
    let z = correlate(input, filters, stride, None)?;
    Ok(FeatureMap::from_array_unchecked(add_bias(z, filters, 1.0)))
}

/// Like [`convolve_valid`], but every input window is contrast-normalized
/// (zero mean, divided by `std + eps`) before the dot products. This is the
/// extraction-time counterpart of training on normalized patches.
pub fn convolve_normalized(
    input: &FeatureMap,
    filters: &FilterBank,
    stride: usize,
    eps: f64,
) -> Result<FeatureMap> {
    let z = correlate(input, filters, stride, Some(eps))?;
    Ok(FeatureMap::from_array_unchecked(add_bias(z, filters, 1.0)))
}

pub fn apply_nonlinearity(map: &FeatureMap, kind: Nonlinearity) -> FeatureMap {
    FeatureMap::from_array_unchecked(map.view().mapv(|z| kind.apply(z)))
}

/// Non-overlapping `P × P` max pooling per channel. Partial windows at the
/// bottom and right borders are kept, so the output is `⌈R/P⌉ × ⌈C/P⌉`.
pub fn max_pool(map: &FeatureMap, p: usize) -> Result<FeatureMap> {
    ensure!(p >= 2, InvalidInput, "pooling size must be at least 2, got {p}");
    let (rows, cols, ch) = map.dim();
    let (out_rows, out_cols) = (rows.div_ceil(p), cols.div_ceil(p));
    let mut out = Array3::from_elem((out_rows, out_cols, ch), f64::NEG_INFINITY);
    let src = map.view();
    for r in 0..rows {
        for c in 0..cols {
            for k in 0..ch {
                let o = &mut out[[r / p, c / p, k]];
                let v = src[[r, c, k]];
                if v > *o {
                    *o = v;
                }
            }
        }
    }
    Ok(FeatureMap::from_array_unchecked(out))
}

/// Sums each channel over the four quadrants of the map.
///
/// Rows split at `⌊R/2⌋` and columns at `⌊C/2⌋`; an odd middle row or column
/// goes to the bottom/right quadrants. The result is ordered
/// `[TL, TR, BL, BR]`, each block holding one sum per channel.
pub fn quadrant_sum_pool(map: &FeatureMap) -> Result<Vec<f64>> {
    let (rows, cols, ch) = map.dim();
    ensure!(
        rows >= 2 && cols >= 2,
        InvalidInput,
        "quadrant pooling needs at least 2x2, got {rows}x{cols}"
    );
    let (mr, mc) = (rows / 2, cols / 2);
    let mut out = vec![0.0; 4 * ch];
    let src = map.view();
    for r in 0..rows {
        for c in 0..cols {
            let q = 2 * usize::from(r >= mr) + usize::from(c >= mc);
            for k in 0..ch {
                out[q * ch + k] += src[[r, c, k]];
            }
        }
    }
    Ok(out)
}

fn pool(map: FeatureMap, pooling: Pooling) -> Result<FeatureMap> {
    match pooling {
        Pooling::None => Ok(map),
        Pooling::Max(p) => max_pool(&map, p),
    }
}

pub(crate) fn polarity_split_impl(
    input: &FeatureMap,
    filters: &FilterBank,
    spec: &LayerSpec,
    normalize: Option<f64>,
) -> Result<FeatureMap> {
    let p = correlate(input, filters, spec.stride, normalize)?;
    let (rows, cols, n_h) = p.dim();
    let sigma = spec.encoder();
    let b = filters.biases();
    let mut out = Array3::zeros((rows, cols, 2 * n_h));
    for r in 0..rows {
        for c in 0..cols {
            for k in 0..n_h {
                let v = p[[r, c, k]];
                out[[r, c, k]] = sigma.apply(v + b[k]);
                out[[r, c, n_h + k]] = sigma.apply(-v + b[k]);
            }
        }
    }
    pool(FeatureMap::from_array_unchecked(out), spec.pooling)
}

/// Concatenates `pool(σ(x ⋆ W + b))` and `pool(σ(x ⋆ (−W) + b))` along the
/// channel axis, giving `2·N_h` channels. Both halves share the same bias.
pub fn polarity_split(input: &FeatureMap, filters: &FilterBank, spec: &LayerSpec) -> Result<FeatureMap> {
    polarity_split_impl(input, filters, spec, None)
}

pub(crate) fn forward_impl(
    input: &FeatureMap,
    filters: &FilterBank,
    spec: &LayerSpec,
    normalize: Option<f64>,
) -> Result<FeatureMap> {
    if spec.polarity_split {
        return polarity_split_impl(input, filters, spec, normalize);
    }
    let z = add_bias(correlate(input, filters, spec.stride, normalize)?, filters, 1.0);
    let sigma = spec.encoder();
    let h = if sigma == Nonlinearity::Identity {
        z
    } else {
        z.mapv_into(|v| sigma.apply(v))
    };
    pool(FeatureMap::from_array_unchecked(h), spec.pooling)
}

/// Per-channel bilinear interpolation to `rows × cols` with half-pixel
/// centers: target index `t` samples source coordinate
/// `(t + 0.5)·R/R_target − 0.5`, clamped to the valid range.
pub fn bilinear_upsample(map: &FeatureMap, rows: usize, cols: usize) -> Result<FeatureMap> {
    let (src_rows, src_cols, ch) = map.dim();
    ensure!(
        rows >= src_rows && cols >= src_cols,
        InvalidInput,
        "upsampling target {rows}x{cols} is smaller than source {src_rows}x{src_cols}"
    );
    if rows == src_rows && cols == src_cols {
        return Ok(map.clone());
    }
    let axis = |n_src: usize, n_dst: usize| -> Vec<(usize, usize, f64)> {
        (0..n_dst)
            .map(|t| {
                let x = ((t as f64 + 0.5) * n_src as f64 / n_dst as f64 - 0.5)
                    .clamp(0.0, (n_src - 1) as f64);
                let i0 = x.floor() as usize;
                let i1 = (i0 + 1).min(n_src - 1);
                (i0, i1, x - i0 as f64)
            })
            .collect()
    };
    let ys = axis(src_rows, rows);
    let xs = axis(src_cols, cols);
    let src = map.view();
    let mut out = Array3::zeros((rows, cols, ch));
    for (ty, &(y0, y1, fy)) in ys.iter().enumerate() {
        for (tx, &(x0, x1, fx)) in xs.iter().enumerate() {
            for k in 0..ch {
                let top = src[[y0, x0, k]] + fx * (src[[y0, x1, k]] - src[[y0, x0, k]]);
                let bottom = src[[y1, x0, k]] + fx * (src[[y1, x1, k]] - src[[y1, x0, k]]);
                let v = top + fy * (bottom - top);
                out[[ty, tx, k]] = v;
            }
        }
    }
    Ok(FeatureMap::from_array_unchecked(out))
}
