//! OMP-1: gain-shape vector quantization. Every sample is coded by the
//! single atom with the largest absolute correlation.

use ndarray::{Array2, ArrayView2};
use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::error::ensure;
use crate::util::{dot, rng};
use crate::Result;

/// Unit-norm dictionary, one atom per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Omp1Model {
    pub dictionary: Array2<f64>,
}

/// A fitted dictionary with its training diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Omp1Fit {
    pub model: Omp1Model,
    /// `Σ ‖x − s·d_{k*}‖²` for the initial dictionary and after every epoch.
    pub training_error: Vec<f64>,
    /// Atoms that received no sample in each epoch's assignment step,
    /// counted before they were re-seeded.
    pub dead_before_reseed: Vec<usize>,
}

impl Omp1Fit {
    /// Dead-atom fraction of the final epoch, before re-seeding.
    pub fn final_dead_fraction(&self) -> f64 {
        let n = self.model.atoms() as f64;
        self.dead_before_reseed.last().map_or(0.0, |&d| d as f64 / n)
    }
}

impl Omp1Model {
    pub fn atoms(&self) -> usize {
        self.dictionary.nrows()
    }

    /// Best atom and its coefficient for one sample; ties go to the lower index.
    pub fn assign(&self, x: &[f64]) -> (usize, f64) {
        best_atom(&self.dictionary, x)
    }

    /// How many samples each atom codes.
    pub fn win_counts(&self, x: ArrayView2<'_, f64>) -> Result<Vec<u64>> {
        check_dim(self, x)?;
        let x = x.as_standard_layout();
        let mut counts = vec![0u64; self.atoms()];
        for row in x.rows() {
            counts[self.assign(row.to_slice().expect("contiguous")).0] += 1;
        }
        Ok(counts)
    }
}

fn best_atom(dictionary: &Array2<f64>, x: &[f64]) -> (usize, f64) {
    let d = x.len();
    let flat = dictionary.as_slice().expect("standard layout");
    let mut best = (0, 0.0);
    let mut best_abs = -1.0;
    for (k, atom) in flat.chunks_exact(d).enumerate() {
        let s = dot(atom, x);
        if s.abs() > best_abs {
            best_abs = s.abs();
            best = (k, s);
        }
    }
    best
}

fn check_dim(model: &Omp1Model, x: ArrayView2<'_, f64>) -> Result<()> {
    ensure!(
        x.ncols() == model.dictionary.ncols(),
        ShapeMismatch,
        "data has {} columns, dictionary atoms have {}",
        x.ncols(),
        model.dictionary.ncols()
    );
    Ok(())
}

fn normalized(v: &[f64]) -> Option<Vec<f64>> {
    let norm = dot(v, v).sqrt();
    (norm > 0.0 && norm.is_finite()).then(|| v.iter().map(|x| x / norm).collect())
}

fn coding_error(dictionary: &Array2<f64>, rows: &[&[f64]]) -> f64 {
    rows.iter()
        .map(|x| {
            let (_, s) = best_atom(dictionary, x);
            (dot(x, x) - s * s).max(0.0)
        })
        .sum()
}

/// Alternating minimization. Atoms start as `n_atoms` distinct random
/// non-zero rows (unit-normalized). Each epoch assigns every sample to its
/// best atom, replaces each atom by the normalized sum `Σ s·x` of its
/// samples, and re-seeds atoms that received nothing from the samples with
/// the largest residual.
pub fn omp1_fit(x: ArrayView2<'_, f64>, n_atoms: usize, epochs: usize, seed: u64) -> Result<Omp1Fit> {
    let (m, d) = x.dim();
    ensure!(n_atoms >= 1, InvalidInput, "need at least one atom");
    ensure!(d >= 1, InvalidInput, "samples must have at least one dimension");
    let x = x.as_standard_layout();
    let rows: Vec<&[f64]> = x.rows().into_iter().map(|r| r.to_slice().expect("contiguous")).collect();
    let usable: Vec<usize> = (0..m).filter(|&i| dot(rows[i], rows[i]) > 0.0).collect();
    ensure!(
        n_atoms <= usable.len(),
        InvalidInput,
        "{n_atoms} atoms requested but only {} non-zero samples",
        usable.len()
    );
    let picks = sample(&mut rng(seed), usable.len(), n_atoms).into_vec();
    let mut dictionary = Array2::zeros((n_atoms, d));
    for (k, &p) in picks.iter().enumerate() {
        let atom = normalized(rows[usable[p]]).expect("non-zero row");
        dictionary.row_mut(k).iter_mut().zip(atom).for_each(|(a, v)| *a = v);
    }

    let mut training_error = vec![coding_error(&dictionary, &rows)];
    let mut dead_before_reseed = Vec::with_capacity(epochs);
    for _ in 0..epochs {
        let mut sums = Array2::<f64>::zeros((n_atoms, d));
        let mut counts = vec![0usize; n_atoms];
        let mut residuals = Vec::with_capacity(m);
        for (i, x) in rows.iter().enumerate() {
            let (k, s) = best_atom(&dictionary, x);
            counts[k] += 1;
            sums.row_mut(k).iter_mut().zip(x.iter()).for_each(|(a, v)| *a += s * v);
            residuals.push(((dot(x, x) - s * s).max(0.0), i));
        }
        let mut dead = Vec::new();
        for k in 0..n_atoms {
            let updated = if counts[k] > 0 {
                normalized(sums.row(k).as_slice().expect("contiguous"))
            } else {
                None
            };
            match updated {
                Some(atom) => dictionary.row_mut(k).iter_mut().zip(atom).for_each(|(a, v)| *a = v),
                None => dead.push(k),
            }
        }
        dead_before_reseed.push(counts.iter().filter(|&&c| c == 0).count());
        if !dead.is_empty() {
            // largest residual first, lower sample index on ties
            residuals.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            let mut candidates = residuals.iter().filter_map(|&(_, i)| normalized(rows[i]));
            for k in dead {
                if let Some(atom) = candidates.next() {
                    dictionary.row_mut(k).iter_mut().zip(atom).for_each(|(a, v)| *a = v);
                }
            }
        }
        training_error.push(coding_error(&dictionary, &rows));
    }
    Ok(Omp1Fit {
        model: Omp1Model { dictionary },
        training_error,
        dead_before_reseed,
    })
}

/// One non-zero per row: position of the best atom, value `d_k · x`.
pub fn omp1_encode(model: &Omp1Model, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    check_dim(model, x)?;
    let x = x.as_standard_layout();
    let mut codes = Array2::zeros((x.nrows(), model.atoms()));
    for (i, row) in x.rows().into_iter().enumerate() {
        let (k, s) = model.assign(row.to_slice().expect("contiguous"));
        codes[[i, k]] = s;
    }
    Ok(codes)
}
