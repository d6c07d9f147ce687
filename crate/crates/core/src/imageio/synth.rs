//! Synthetic labeled scenes.
//!
//! The image is cut into a `grid_rows × grid_cols` grid of rectangular
//! regions and each region is filled by one class generator. Spectral
//! classes are a constant signature per pixel. Texture classes alternate two
//! signatures in a spatial pattern, so two texture classes built from the
//! same pair of signatures have identical per-pixel value distributions and
//! differ only in their spatial arrangement.

use ndarray::{s, Array3};
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{FeatureMap, LabelMap};
use crate::error::ensure;
use crate::util::rng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum TexturePattern {
    HorizontalStripes { width: usize },
    VerticalStripes { width: usize },
    Checkerboard { size: usize },
}

impl TexturePattern {
    /// Whether the pixel at global coordinates `(row, col)` takes the first signature.
    pub fn first_at(&self, row: usize, col: usize) -> bool {
        match *self {
            TexturePattern::HorizontalStripes { width } => (row / width).is_multiple_of(2),
            TexturePattern::VerticalStripes { width } => (col / width).is_multiple_of(2),
            TexturePattern::Checkerboard { size } => (row / size + col / size).is_multiple_of(2),
        }
    }

    fn period(&self) -> usize {
        match *self {
            TexturePattern::HorizontalStripes { width } | TexturePattern::VerticalStripes { width } => width,
            TexturePattern::Checkerboard { size } => size,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClassGenerator {
    Spectral { signature: Vec<f64> },
    Texture { pattern: TexturePattern, first: Vec<f64>, second: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub rows: usize,
    pub cols: usize,
    pub channels: usize,
    pub noise_sigma: f64,
    pub grid_rows: usize,
    pub grid_cols: usize,
    pub classes: Vec<ClassGenerator>,
    /// Class (1-based) of each grid region in row-major order. Defaults to
    /// `(grid_row + grid_col) mod K + 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<Vec<u16>>,
}

/// One labeled rectangle of the layout, half-open row/col ranges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Region {
    pub rows: (usize, usize),
    pub cols: (usize, usize),
    pub class: u16,
}

impl Region {
    pub fn area(&self) -> usize {
        (self.rows.1 - self.rows.0) * (self.cols.1 - self.cols.0)
    }
}

/// Smooth, clearly distinct spectral curves in `[0.2, 0.8]`.
pub fn reference_signature(index: usize, channels: usize) -> Vec<f64> {
    let phase = index as f64 * 1.3;
    let freq = 0.5 + 0.35 * index as f64;
    (0..channels)
        .map(|b| {
            let t = b as f64 / channels.max(1) as f64;
            0.5 + 0.3 * (std::f64::consts::TAU * freq * t + phase).cos()
        })
        .collect()
}

impl SynthSpec {
    /// 128×128×8, four classes (two spectral, two texture sharing one pair
    /// of signatures), σ = 0.1, 4×4 region grid.
    pub fn acceptance_default() -> Self {
        let ch = 8;
        Self {
            rows: 128,
            cols: 128,
            channels: ch,
            noise_sigma: 0.1,
            grid_rows: 4,
            grid_cols: 4,
            classes: vec![
                ClassGenerator::Spectral { signature: reference_signature(0, ch) },
                ClassGenerator::Spectral { signature: reference_signature(1, ch) },
                ClassGenerator::Texture {
                    pattern: TexturePattern::HorizontalStripes { width: 2 },
                    first: reference_signature(2, ch),
                    second: reference_signature(3, ch),
                },
                ClassGenerator::Texture {
                    pattern: TexturePattern::VerticalStripes { width: 2 },
                    first: reference_signature(2, ch),
                    second: reference_signature(3, ch),
                },
            ],
            layout: None,
        }
    }

    /// Texture-only task: three classes built from the same two signatures
    /// (horizontal stripes, vertical stripes, checkerboard), so single-pixel
    /// spectra carry no class information.
    pub fn texture_task() -> Self {
        let ch = 8;
        let (a, b) = (reference_signature(2, ch), reference_signature(3, ch));
        let texture = |pattern| ClassGenerator::Texture {
            pattern,
            first: a.clone(),
            second: b.clone(),
        };
        Self {
            rows: 128,
            cols: 128,
            channels: ch,
            noise_sigma: 0.1,
            grid_rows: 4,
            grid_cols: 4,
            classes: vec![
                texture(TexturePattern::HorizontalStripes { width: 2 }),
                texture(TexturePattern::VerticalStripes { width: 2 }),
                texture(TexturePattern::Checkerboard { size: 2 }),
            ],
            layout: None,
        }
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.classes.len();
        ensure!(k >= 1, InvalidInput, "synthetic spec needs at least one class");
        ensure!(k <= u16::MAX as usize, InvalidInput, "too many classes");
        ensure!(self.channels >= 1, InvalidInput, "channel count must be positive");
        ensure!(
            self.grid_rows >= 1 && self.grid_cols >= 1,
            InvalidInput,
            "region grid must be at least 1x1"
        );
        ensure!(
            self.rows >= self.grid_rows && self.cols >= self.grid_cols,
            InvalidInput,
            "image {}x{} is smaller than the {}x{} region grid",
            self.rows,
            self.cols,
            self.grid_rows,
            self.grid_cols
        );
        ensure!(
            self.noise_sigma.is_finite() && self.noise_sigma >= 0.0,
            InvalidInput,
            "noise sigma must be a non-negative finite number"
        );
        for (i, c) in self.classes.iter().enumerate() {
            let sigs: Vec<&Vec<f64>> = match c {
                ClassGenerator::Spectral { signature } => vec![signature],
                ClassGenerator::Texture { pattern, first, second } => {
                    ensure!(pattern.period() >= 1, InvalidInput, "class {} has a zero texture period", i + 1);
                    vec![first, second]
                }
            };
            for s in sigs {
                ensure!(
                    s.len() == self.channels,
                    InvalidInput,
                    "class {} signature has {} bands, expected {}",
                    i + 1,
                    s.len(),
                    self.channels
                );
                ensure!(s.iter().all(|v| v.is_finite()), InvalidInput, "class {} signature is not finite", i + 1);
            }
        }
        if let Some(layout) = &self.layout {
            ensure!(
                layout.len() == self.grid_rows * self.grid_cols,
                InvalidInput,
                "layout has {} entries for a {}x{} grid",
                layout.len(),
                self.grid_rows,
                self.grid_cols
            );
            ensure!(
                layout.iter().all(|&l| l >= 1 && (l as usize) <= k),
                InvalidInput,
                "layout references a class outside 1..={k}"
            );
        }
        Ok(())
    }

    /// The labeled rectangles, row-major over the grid.
    pub fn regions(&self) -> Vec<Region> {
        let k = self.classes.len().max(1);
        let mut out = Vec::with_capacity(self.grid_rows * self.grid_cols);
        for gi in 0..self.grid_rows {
            for gj in 0..self.grid_cols {
                let class = match &self.layout {
                    Some(l) => l[gi * self.grid_cols + gj],
                    None => ((gi + gj) % k + 1) as u16,
                };
                out.push(Region {
                    rows: (gi * self.rows / self.grid_rows, (gi + 1) * self.rows / self.grid_rows),
                    cols: (gj * self.cols / self.grid_cols, (gj + 1) * self.cols / self.grid_cols),
                    class,
                });
            }
        }
        out
    }
}

/// Renders the scene described by `spec`, adding i.i.d. Gaussian noise.
pub fn synth_dataset(spec: &SynthSpec, seed: u64) -> Result<(FeatureMap, LabelMap)> {
    spec.validate()?;
    let (rows, cols, ch) = (spec.rows, spec.cols, spec.channels);
    let mut data = Array3::<f64>::zeros((rows, cols, ch));
    let mut labels = vec![0u16; rows * cols];
    for region in spec.regions() {
        let generator = &spec.classes[region.class as usize - 1];
        for r in region.rows.0..region.rows.1 {
            for c in region.cols.0..region.cols.1 {
                labels[r * cols + c] = region.class;
                let sig = match generator {
                    ClassGenerator::Spectral { signature } => signature,
                    ClassGenerator::Texture { pattern, first, second } => {
                        if pattern.first_at(r, c) {
                            first
                        } else {
                            second
                        }
                    }
                };
                data.slice_mut(s![r, c, ..])
                    .iter_mut()
                    .zip(sig)
                    .for_each(|(d, v)| *d = *v);
            }
        }
    }
    if spec.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, spec.noise_sigma).map_err(|e| Error::InvalidInput(e.to_string()))?;
        let mut g = rng(seed);
        data.iter_mut().for_each(|v| *v += normal.sample(&mut g));
    }
    Ok((FeatureMap::from_array(data)?, LabelMap::new(rows, cols, labels)?))
}

/// Cuts non-overlapping `tile × tile` scenes whose pixels all carry the same
/// non-zero label.
pub fn tile_scenes(image: &FeatureMap, labels: &LabelMap, tile: usize) -> Result<Vec<(FeatureMap, u16)>> {
    ensure!(tile >= 1, InvalidInput, "tile size must be positive");
    ensure!(
        image.rows() == labels.rows() && image.cols() == labels.cols(),
        ShapeMismatch,
        "image and labels differ in size"
    );
    let mut out = Vec::new();
    for r0 in (0..=image.rows().saturating_sub(tile)).step_by(tile) {
        for c0 in (0..=image.cols().saturating_sub(tile)).step_by(tile) {
            if r0 + tile > image.rows() || c0 + tile > image.cols() {
                continue;
            }
            let l = labels.get(r0, c0);
            let uniform = (r0..r0 + tile).all(|r| (c0..c0 + tile).all(|c| labels.get(r, c) == l));
            if l != 0 && uniform {
                let view = image.view().slice(s![r0..r0 + tile, c0..c0 + tile, ..]).to_owned();
                out.push((FeatureMap::from_array(view)?, l));
            }
        }
    }
    Ok(out)
}
