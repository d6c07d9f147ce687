use std::path::Path;

use super::{FeatureMap, LabelMap};
use crate::error::ensure;
use crate::util::write_atomic;
use crate::Result;

/// Fixed 16-color palette. Index 0 (background) is black.
pub const PALETTE: [[u8; 3]; 16] = [
    [0, 0, 0],
    [230, 25, 75],
    [60, 180, 75],
    [255, 225, 25],
    [0, 130, 200],
    [245, 130, 48],
    [145, 30, 180],
    [70, 240, 240],
    [240, 50, 230],
    [210, 245, 60],
    [250, 190, 212],
    [0, 128, 128],
    [220, 190, 255],
    [170, 110, 40],
    [128, 0, 0],
    [255, 255, 255],
];

/// Binary PPM (P6) bytes for a label map, one pixel per cell.
pub fn encode_ppm(labels: &LabelMap) -> Result<Vec<u8>> {
    let k = labels.num_classes();
    ensure!(
        k < PALETTE.len(),
        InvalidInput,
        "label {k} exceeds the {}-color palette",
        PALETTE.len()
    );
    let mut bytes = format!("P6\n{} {}\n255\n", labels.cols(), labels.rows()).into_bytes();
    for &l in labels.labels() {
        bytes.extend_from_slice(&PALETTE[l as usize]);
    }
    Ok(bytes)
}

pub fn render_map(labels: &LabelMap, path: impl AsRef<Path>) -> Result<()> {
    let bytes = encode_ppm(labels)?;
    write_atomic(path.as_ref(), &bytes)
}

/// Grayscale PPM of one channel of a feature map, min-max stretched to
/// `0..=255`. A constant channel renders black.
pub fn encode_feature_ppm(map: &FeatureMap, channel: usize) -> Result<Vec<u8>> {
    ensure!(
        channel < map.channels(),
        InvalidInput,
        "channel {channel} out of range for a {}-channel map",
        map.channels()
    );
    let values: Vec<f64> = map.as_slice().iter().skip(channel).step_by(map.channels()).copied().collect();
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let span = hi - lo;
    let mut bytes = format!("P6\n{} {}\n255\n", map.cols(), map.rows()).into_bytes();
    for v in values {
        let g = if span > 0.0 { ((v - lo) / span * 255.0).round() as u8 } else { 0 };
        bytes.extend_from_slice(&[g, g, g]);
    }
    Ok(bytes)
}
