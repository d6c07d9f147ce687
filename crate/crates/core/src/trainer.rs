//! Greedy layer-wise pre-training.
//!
//! Each layer is trained on its own, on random patches of the previous
//! layer's output maps, by regressing its outputs onto EPLS sparse targets
//! with mini-batch SGD. Once trained, the layer is applied to every map to
//! produce the input of the next layer.

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::epls::{build_target, epls_loss, loss_gradient, BatchOutput, Gradient, Inhibitor};
use crate::error::ensure;
use crate::imageio::{extract_patches, normalize_patches, FeatureMap, PatchMatrix};
use crate::network::extract::forward_arch_layer;
use crate::network::{ArchitectureSpec, FilterBank, LayerSpec};
use crate::util::{derive_seed, rng};
use crate::{Error, Result};

const SEED_PATCHES: u64 = 1;
const SEED_INIT: u64 = 2;
const SEED_SHUFFLE: u64 = 3;

/// Regularizer in the adaptive learning-rate denominator.
pub const RATE_EPS: f64 = 1e-8;

fn default_min_epochs() -> usize {
    20
}
fn default_tolerance() -> f64 {
    1e-3
}
fn default_learning_rate() -> f64 {
    1e-2
}
fn default_ema_decay() -> f64 {
    0.95
}
fn default_init_std() -> f64 {
    1e-4
}
fn default_true() -> bool {
    true
}

/// Training schedule of one layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSchedule {
    /// Patches per epoch (`N`).
    pub patches: usize,
    #[serde(default = "default_min_epochs")]
    pub min_epochs: usize,
    /// Defaults to the layer's output count, raised to `min_epochs` if lower.
    #[serde(default)]
    pub max_epochs: Option<usize>,
    /// Stop once the relative epoch-error decrease falls below this.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Initial mini-batch size; defaults to `round(N / N_h)`.
    #[serde(default)]
    pub batch_size: Option<usize>,
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "default_ema_decay")]
    pub ema_decay: f64,
    #[serde(default = "default_init_std")]
    pub init_std: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_true")]
    pub shuffle: bool,
}

impl TrainSchedule {
    pub fn new(patches: usize, seed: u64) -> Self {
        Self {
            patches,
            min_epochs: default_min_epochs(),
            max_epochs: None,
            tolerance: default_tolerance(),
            batch_size: None,
            learning_rate: default_learning_rate(),
            ema_decay: default_ema_decay(),
            init_std: default_init_std(),
            seed,
            shuffle: true,
        }
    }

    pub fn with_epochs(mut self, min: usize, max: usize) -> Self {
        self.min_epochs = min;
        self.max_epochs = Some(max);
        self
    }

    pub fn max_epochs_for(&self, outputs: usize) -> usize {
        self.max_epochs.unwrap_or_else(|| outputs.max(self.min_epochs))
    }

    pub fn initial_batch_for(&self, outputs: usize) -> usize {
        let n = self.patches.max(1);
        let b = self
            .batch_size
            .unwrap_or_else(|| (self.patches as f64 / outputs.max(1) as f64).round() as usize);
        b.clamp(1, n)
    }

    pub fn validate(&self, outputs: usize) -> Result<()> {
        ensure!(self.patches >= 1, Config, "schedule needs at least one patch");
        ensure!(
            self.min_epochs <= self.max_epochs_for(outputs),
            Config,
            "min_epochs {} exceeds max_epochs {}",
            self.min_epochs,
            self.max_epochs_for(outputs)
        );
        ensure!(self.max_epochs_for(outputs) >= 1, Config, "max_epochs must be positive");
        if let Some(b) = self.batch_size {
            ensure!(b >= 1 && b <= self.patches, Config, "batch size {b} outside [1, {}]", self.patches);
        }
        ensure!(self.tolerance > 0.0, Config, "tolerance must be positive");
        ensure!(self.learning_rate > 0.0, Config, "learning rate must be positive");
        ensure!(
            self.ema_decay > 0.0 && self.ema_decay < 1.0,
            Config,
            "ema decay must lie in (0, 1)"
        );
        ensure!(self.init_std > 0.0, Config, "init std must be positive");
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSummary {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

/// Per-epoch training trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochReport {
    pub epoch: usize,
    /// Target loss summed over the epoch, divided by the patch count.
    pub mean_error: f64,
    pub batch_size: usize,
    /// Effective per-parameter learning rates, averaged over the epoch's updates.
    pub learning_rate: RateSummary,
    /// How many times each output won a target row during the epoch.
    pub selections: Vec<u64>,
}

/// Gaussian initialization, mean 0 and standard deviation `schedule.init_std`.
pub fn init_params(layer: &LayerSpec, input_dim: usize, schedule: &TrainSchedule) -> Result<FilterBank> {
    let r2 = layer.receptive_field * layer.receptive_field;
    ensure!(input_dim >= 1, InvalidInput, "input dimensionality must be positive");
    ensure!(
        r2 >= 1 && input_dim.is_multiple_of(r2),
        ShapeMismatch,
        "patch dimensionality {input_dim} is not a multiple of r² = {r2}"
    );
    let normal = Normal::new(0.0, schedule.init_std).map_err(|e| Error::Config(e.to_string()))?;
    let mut g = rng(derive_seed(schedule.seed, SEED_INIT));
    let w = Array2::from_shape_simple_fn((layer.outputs, input_dim), || normal.sample(&mut g));
    let b = Array1::from_shape_simple_fn(layer.outputs, || normal.sample(&mut g));
    FilterBank::new(w, b, layer.receptive_field, input_dim / r2)
}

/// Exponential moving averages of each parameter's gradient and squared gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct SgdState {
    mean: Vec<f64>,
    mean_sq: Vec<f64>,
}

impl SgdState {
    pub fn new(len: usize) -> Self {
        Self {
            mean: vec![0.0; len],
            mean_sq: vec![0.0; len],
        }
    }

    pub fn for_filters(params: &FilterBank) -> Self {
        Self::new(params.outputs() * (params.input_dim() + 1))
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn mean_sq(&self) -> &[f64] {
        &self.mean_sq
    }
}

/// Adaptive step on a flat parameter vector.
///
/// Per parameter: `m ← ρm + (1−ρ)g`, `v ← ρv + (1−ρ)g²`,
/// `η = clamp(η₀·m²/(v + ε), 0, η₀)`, `θ ← θ − η·g`. Consistent gradients
/// drive `m²/v` toward 1 (full rate); oscillating ones drive it toward 0.
pub fn adaptive_step(
    params: &mut [f64],
    grads: &[f64],
    state_mean: &mut [f64],
    state_mean_sq: &mut [f64],
    base_rate: f64,
    decay: f64,
) -> RateSummary {
    debug_assert_eq!(params.len(), grads.len());
    let mut summary = RateSummary {
        min: f64::INFINITY,
        mean: 0.0,
        max: 0.0,
    };
    for (((p, &g), m), v) in params
        .iter_mut()
        .zip(grads)
        .zip(state_mean.iter_mut())
        .zip(state_mean_sq.iter_mut())
    {
        *m = decay * *m + (1.0 - decay) * g;
        *v = decay * *v + (1.0 - decay) * g * g;
        let rate = (base_rate * *m * *m / (*v + RATE_EPS)).clamp(0.0, base_rate);
        *p -= rate * g;
        summary.min = summary.min.min(rate);
        summary.max = summary.max.max(rate);
        summary.mean += rate;
    }
    if !params.is_empty() {
        summary.mean /= params.len() as f64;
    } else {
        summary.min = 0.0;
    }
    summary
}

/// Applies [`adaptive_step`] to a filter bank; weights first, then biases.
pub fn sgd_update(
    params: &mut FilterBank,
    grads: &Gradient,
    state: &mut SgdState,
    schedule: &TrainSchedule,
) -> Result<RateSummary> {
    ensure!(
        grads.weights.dim() == params.weights().dim() && grads.biases.len() == params.outputs(),
        ShapeMismatch,
        "gradient shape differs from the parameters"
    );
    ensure!(state.len() == params.outputs() * (params.input_dim() + 1), ShapeMismatch, "optimizer state has the wrong size");
    let nw = params.weights().len();
    let (w, b) = params.params_mut();
    let (mean_w, mean_b) = state.mean.split_at_mut(nw);
    let (sq_w, sq_b) = state.mean_sq.split_at_mut(nw);
    let gw = grads.weights.as_slice().expect("standard layout");
    let gb = grads.biases.as_slice().expect("contiguous");
    let sw = adaptive_step(w, gw, mean_w, sq_w, schedule.learning_rate, schedule.ema_decay);
    let sb = adaptive_step(b, gb, mean_b, sq_b, schedule.learning_rate, schedule.ema_decay);
    let total = (nw + gb.len()) as f64;
    Ok(RateSummary {
        min: sw.min.min(sb.min),
        mean: (sw.mean * nw as f64 + sb.mean * gb.len() as f64) / total,
        max: sw.max.max(sb.max),
    })
}

/// One SGD step on a fixed batch: forward, target, gradient of the summed
/// batch loss, update. Returns the batch loss before the update.
pub(crate) fn train_step(
    rows: ndarray::ArrayView2<'_, f64>,
    params: &mut FilterBank,
    layer: &LayerSpec,
    inhibitor: &mut Inhibitor,
    state: &mut SgdState,
    schedule: &TrainSchedule,
) -> Result<(f64, RateSummary)> {
    let batch = BatchOutput::forward(rows, params, layer.nonlinearity)?;
    let target = build_target(batch.outputs.view(), inhibitor, layer.nonlinearity)?;
    let loss = epls_loss(batch.outputs.view(), &target)?;
    let grad = loss_gradient(&batch, &target, layer.nonlinearity)?;
    let rates = sgd_update(params, &grad, state, schedule)?;
    Ok((loss, rates))
}

/// Trains one layer on a patch matrix and returns its parameters together
/// with the per-epoch trace.
pub fn pretrain_layer(
    patches: &PatchMatrix,
    layer: &LayerSpec,
    schedule: &TrainSchedule,
) -> Result<(FilterBank, Vec<EpochReport>)> {
    schedule.validate(layer.outputs)?;
    let n = patches.len();
    ensure!(
        n == schedule.patches,
        ShapeMismatch,
        "{n} patches supplied, schedule expects {}",
        schedule.patches
    );
    let mut params = init_params(layer, patches.dim(), schedule)?;
    let mut state = SgdState::for_filters(&params);
    let mut inhibitor = Inhibitor::new(layer.outputs, n)?;
    let max_epochs = schedule.max_epochs_for(layer.outputs);
    let mut batch_size = schedule.initial_batch_for(layer.outputs);
    let mut order: Vec<usize> = (0..n).collect();
    let mut shuffle_rng = rng(derive_seed(schedule.seed, SEED_SHUFFLE));
    let mut reports: Vec<EpochReport> = Vec::new();
    let mut batch_rows = Array2::zeros((0, patches.dim()));

    for epoch in 1..=max_epochs {
        if schedule.shuffle {
            order.shuffle(&mut shuffle_rng);
        }
        inhibitor.reset();
        let mut total = 0.0;
        let mut rate_sum = 0.0;
        let mut rate_min = f64::INFINITY;
        let mut rate_max: f64 = 0.0;
        let mut steps = 0usize;
        for chunk in order.chunks(batch_size) {
            if batch_rows.nrows() != chunk.len() {
                batch_rows = Array2::zeros((chunk.len(), patches.dim()));
            }
            for (dst, &src) in batch_rows.rows_mut().into_iter().zip(chunk) {
                dst.into_slice().expect("contiguous").copy_from_slice(patches.row(src));
            }
            let (loss, rates) = train_step(batch_rows.view(), &mut params, layer, &mut inhibitor, &mut state, schedule)?;
            total += loss;
            rate_sum += rates.mean;
            rate_min = rate_min.min(rates.min);
            rate_max = rate_max.max(rates.max);
            steps += 1;
        }
        let mean_error = total / n as f64;
        ensure!(mean_error.is_finite(), Numeric, "training error diverged at epoch {epoch}");
        reports.push(EpochReport {
            epoch,
            mean_error,
            batch_size,
            learning_rate: RateSummary {
                min: rate_min,
                mean: rate_sum / steps as f64,
                max: rate_max,
            },
            selections: inhibitor.counts().to_vec(),
        });
        if reports.len() >= 2 {
            let prev = reports[reports.len() - 2].mean_error;
            let decrease = if prev > 0.0 { (prev - mean_error) / prev } else { 0.0 };
            if epoch >= schedule.min_epochs && decrease < schedule.tolerance {
                break;
            }
            if mean_error > prev {
                batch_size = (batch_size * 2).min(n);
            }
        }
    }
    Ok((params, reports))
}

/// Result of stacking all layers of an architecture.
#[derive(Debug, Clone, PartialEq)]
pub struct Pretrained {
    pub filters: Vec<FilterBank>,
    /// Per-layer epoch traces.
    pub reports: Vec<Vec<EpochReport>>,
}

/// Greedy layer-wise pre-training of every layer of `arch`.
///
/// Layer `l` draws fresh random patches from the maps produced by layers
/// `1..l` (first-layer patches are contrast-normalized when the
/// architecture asks for it), trains, then encodes every map with the
/// layer's encoder to feed layer `l + 1`.
pub fn pretrain_network(
    images: &[FeatureMap],
    arch: &ArchitectureSpec,
    schedules: &[TrainSchedule],
) -> Result<Pretrained> {
    arch.validate()?;
    ensure!(!images.is_empty(), InvalidInput, "no training images");
    ensure!(
        schedules.len() == arch.len(),
        Config,
        "{} schedules for {} layers",
        schedules.len(),
        arch.len()
    );
    for (i, img) in images.iter().enumerate() {
        ensure!(
            img.channels() == arch.input_channels,
            ShapeMismatch,
            "image {i} has {} channels, architecture expects {}",
            img.channels(),
            arch.input_channels
        );
    }
    let mut maps: Vec<FeatureMap> = images.to_vec();
    let mut filters = Vec::with_capacity(arch.len());
    let mut reports = Vec::with_capacity(arch.len());
    for (l, (layer, schedule)) in arch.layers.iter().zip(schedules).enumerate() {
        let r = layer.receptive_field;
        if let Some(m) = maps.iter().find(|m| m.rows() < r || m.cols() < r) {
            return Err(Error::ShapeMismatch(format!(
                "layer {}: receptive field {r} exceeds its {}x{} input map",
                l + 1,
                m.rows(),
                m.cols()
            )));
        }
        let mut patches = extract_patches(&maps, r, schedule.patches, derive_seed(schedule.seed, SEED_PATCHES))?;
        if l == 0 {
            if let Some(eps) = arch.input_normalization {
                patches = normalize_patches(&patches, eps);
            }
        }
        let (bank, trace) = pretrain_layer(&patches, layer, schedule)?;
        if l + 1 < arch.len() {
            maps = maps
                .iter()
                .map(|m| forward_arch_layer(m, arch, &bank, l))
                .collect::<Result<_>>()?;
        }
        filters.push(bank);
        reports.push(trace);
    }
    Ok(Pretrained { filters, reports })
}
