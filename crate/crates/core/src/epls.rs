//! Sparse target construction and the target-regression objective.
//!
//! For each mini-batch of layer outputs `H` (`N_b × N_h`), [`build_target`]
//! picks exactly one output per row (population sparsity). Each pick raises
//! that output's inhibitor by `N_h / N`, so over an epoch of `N` patches no
//! output can keep winning (lifetime sparsity). The layer is then fitted to
//! the target by minimizing `‖H − T‖²`.

use ndarray::{Array1, Array2, ArrayView2};

use crate::error::ensure;
use crate::network::{FilterBank, Nonlinearity};
use crate::Result;

/// Per-output inhibition accumulated over an epoch.
///
/// Selections are kept as integer counts; the inhibition of output `j` is
/// `count_j · N_h / N`, so the total after `m` selections is `m · N_h / N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inhibitor {
    counts: Vec<u64>,
    budget: usize,
}

impl Inhibitor {
    /// Zero inhibition for `outputs` units over an epoch of `budget` patches.
    pub fn new(outputs: usize, budget: usize) -> Result<Self> {
        ensure!(outputs >= 1, InvalidInput, "inhibitor needs at least one output");
        ensure!(budget >= 1, InvalidInput, "epoch patch budget must be positive");
        Ok(Self {
            counts: vec![0; outputs],
            budget,
        })
    }

    pub fn outputs(&self) -> usize {
        self.counts.len()
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    /// Increment applied per selection, `N_h / N`.
    pub fn step(&self) -> f64 {
        self.counts.len() as f64 / self.budget as f64
    }

    pub fn value(&self, j: usize) -> f64 {
        self.counts[j] as f64 * self.counts.len() as f64 / self.budget as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.counts.len()).map(|j| self.value(j)).collect()
    }

    /// Number of times each output has been selected since the last reset.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total_selections(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn reset(&mut self) {
        self.counts.iter_mut().for_each(|c| *c = 0);
    }
}

/// One-hot target rows remapped to the active/inactive values of a
/// nonlinearity.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseTarget {
    matrix: Array2<f64>,
    winners: Vec<usize>,
}

impl SparseTarget {
    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    /// Selected output of each row.
    pub fn winners(&self) -> &[usize] {
        &self.winners
    }
}

/// Inputs, pre-activations and outputs of a layer for one mini-batch.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchOutput {
    pub inputs: Array2<f64>,
    pub pre_activations: Array2<f64>,
    pub outputs: Array2<f64>,
}

impl BatchOutput {
    /// Forward pass of `rows` (`N_b × D`) through a filter bank.
    pub fn forward(rows: ArrayView2<'_, f64>, filters: &FilterBank, nonlinearity: Nonlinearity) -> Result<Self> {
        ensure!(
            rows.ncols() == filters.input_dim(),
            ShapeMismatch,
            "patches have dimension {}, filters expect {}",
            rows.ncols(),
            filters.input_dim()
        );
        let mut z = rows.dot(&filters.weights().t());
        z += filters.biases();
        let h = z.mapv(|v| nonlinearity.apply(v));
        Ok(Self {
            inputs: rows.to_owned(),
            pre_activations: z,
            outputs: h,
        })
    }

    pub fn len(&self) -> usize {
        self.outputs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.nrows() == 0
    }
}

/// Builds the sparse target for one mini-batch and advances the inhibitor.
///
/// `H` is first rescaled to `[0, 1]` by its global min and max (all zeros if
/// constant). Rows are processed in order; row `n` activates
/// `k = argmax_j (h_j − a_j)`, ties going to the smallest inhibitor and then
/// the smallest index, and `a_k` grows by `N_h / N`.
pub fn build_target(
    h: ArrayView2<'_, f64>,
    inhibitor: &mut Inhibitor,
    nonlinearity: Nonlinearity,
) -> Result<SparseTarget> {
    let (n_b, n_h) = h.dim();
    ensure!(n_b >= 1, InvalidInput, "empty mini-batch");
    ensure!(
        n_h == inhibitor.outputs(),
        ShapeMismatch,
        "batch has {n_h} outputs, inhibitor has {}",
        inhibitor.outputs()
    );
    let (lo, hi) = h
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = hi - lo;
    let scale = |v: f64| if range > 0.0 { (v - lo) / range } else { 0.0 };

    let (on, off) = (nonlinearity.active_value(), nonlinearity.inactive_value());
    let mut matrix = Array2::from_elem((n_b, n_h), off);
    let mut winners = Vec::with_capacity(n_b);
    for (n, row) in h.rows().into_iter().enumerate() {
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        let mut best_a = f64::INFINITY;
        for (j, &v) in row.iter().enumerate() {
            let a = inhibitor.value(j);
            let score = scale(v) - a;
            if score > best_score || (score == best_score && a < best_a) {
                best = j;
                best_score = score;
                best_a = a;
            }
        }
        matrix[[n, best]] = on;
        inhibitor.counts[best] += 1;
        winners.push(best);
    }
    Ok(SparseTarget { matrix, winners })
}

/// `Σ (H − T)²` over the batch.
pub fn epls_loss(h: ArrayView2<'_, f64>, target: &SparseTarget) -> Result<f64> {
    ensure!(
        h.dim() == target.matrix.dim(),
        ShapeMismatch,
        "outputs are {:?}, target is {:?}",
        h.dim(),
        target.matrix.dim()
    );
    Ok(h.iter()
        .zip(target.matrix.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum())
}

/// Gradient of [`epls_loss`] with respect to the filter weights and biases,
/// holding the target fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub weights: Array2<f64>,
    pub biases: Array1<f64>,
}

impl Gradient {
    pub fn scale(&mut self, factor: f64) {
        self.weights *= factor;
        self.biases *= factor;
    }
}

pub fn loss_gradient(batch: &BatchOutput, target: &SparseTarget, nonlinearity: Nonlinearity) -> Result<Gradient> {
    let (n_b, n_h) = batch.outputs.dim();
    ensure!(
        target.matrix.dim() == (n_b, n_h) && batch.pre_activations.dim() == (n_b, n_h),
        ShapeMismatch,
        "batch and target dimensions differ"
    );
    ensure!(batch.inputs.nrows() == n_b, ShapeMismatch, "batch inputs have the wrong row count");
    // delta_{n,k} = 2 (H − T) σ'(Z)
    let mut delta = Array2::zeros((n_b, n_h));
    ndarray::Zip::from(&mut delta)
        .and(&batch.outputs)
        .and(&target.matrix)
        .and(&batch.pre_activations)
        .for_each(|d, &h, &t, &z| *d = 2.0 * (h - t) * nonlinearity.derivative(z, h));
    Ok(Gradient {
        weights: delta.t().dot(&batch.inputs),
        biases: delta.sum_axis(ndarray::Axis(0)),
    })
}
