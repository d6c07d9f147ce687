//! Brute-force reference implementations shared by the integration tests.
//!
//! Everything here is written as plain index loops straight from the
//! definitions, without calling into the library's numerics.

#![allow(dead_code)]

use featlearn::{FeatureMap, FilterBank};
use ndarray::{Array1, Array2, Array3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_map(g: &mut ChaCha8Rng, rows: usize, cols: usize, ch: usize) -> FeatureMap {
    FeatureMap::from_array(Array3::from_shape_fn((rows, cols, ch), |_| g.random_range(-1.0..1.0))).unwrap()
}

pub fn random_bank(g: &mut ChaCha8Rng, outputs: usize, r: usize, ch: usize) -> FilterBank {
    FilterBank::new(
        Array2::from_shape_fn((outputs, r * r * ch), |_| g.random_range(-1.0..1.0)),
        Array1::from_shape_fn(outputs, |_| g.random_range(-1.0..1.0)),
        r,
        ch,
    )
    .unwrap()
}

/// `z[y][x][k] = b_k + Σ_{dy,dx,c} I[y·s+dy][x·s+dx][c] · W_k[(dy·r + dx)·C + c]`.
pub fn naive_conv(input: &FeatureMap, bank: &FilterBank, stride: usize) -> Array3<f64> {
    let (rows, cols, ch) = input.dim();
    let r = bank.receptive_field();
    let out_r = (rows - r) / stride + 1;
    let out_c = (cols - r) / stride + 1;
    let w = bank.weights();
    let b = bank.biases();
    let mut out = Array3::zeros((out_r, out_c, bank.outputs()));
    for y in 0..out_r {
        for x in 0..out_c {
            for k in 0..bank.outputs() {
                let mut acc = b[k];
                for dy in 0..r {
                    for dx in 0..r {
                        for c in 0..ch {
                            acc += input.get(y * stride + dy, x * stride + dx, c) * w[[k, (dy * r + dx) * ch + c]];
                        }
                    }
                }
                out[[y, x, k]] = acc;
            }
        }
    }
    out
}

/// Max over each `p × p` block, border blocks truncated.
pub fn naive_max_pool(map: &FeatureMap, p: usize) -> Array3<f64> {
    let (rows, cols, ch) = map.dim();
    let (out_r, out_c) = (rows.div_ceil(p), cols.div_ceil(p));
    let mut out = Array3::zeros((out_r, out_c, ch));
    for y in 0..out_r {
        for x in 0..out_c {
            for c in 0..ch {
                let mut best = f64::NEG_INFINITY;
                for r in y * p..((y + 1) * p).min(rows) {
                    for q in x * p..((x + 1) * p).min(cols) {
                        best = best.max(map.get(r, q, c));
                    }
                }
                out[[y, x, c]] = best;
            }
        }
    }
    out
}

/// `[TL, TR, BL, BR]` sums per channel, split at `⌊R/2⌋`, `⌊C/2⌋`.
pub fn naive_quadrants(map: &FeatureMap) -> Vec<f64> {
    let (rows, cols, ch) = map.dim();
    let (mr, mc) = (rows / 2, cols / 2);
    let ranges = [(0, mr, 0, mc), (0, mr, mc, cols), (mr, rows, 0, mc), (mr, rows, mc, cols)];
    let mut out = Vec::new();
    for (r0, r1, c0, c1) in ranges {
        for c in 0..ch {
            let mut s = 0.0;
            for r in r0..r1 {
                for q in c0..c1 {
                    s += map.get(r, q, c);
                }
            }
            out.push(s);
        }
    }
    out
}

/// Label of the first training row at minimal Euclidean distance.
pub fn naive_knn1(train_x: &Array2<f64>, train_y: &[u16], test_x: &Array2<f64>) -> Vec<u16> {
    (0..test_x.nrows())
        .map(|i| {
            let mut best = (f64::INFINITY, 0u16);
            for j in 0..train_x.nrows() {
                let mut d = 0.0;
                for f in 0..train_x.ncols() {
                    d += (train_x[[j, f]] - test_x[[i, f]]).powi(2);
                }
                if d < best.0 {
                    best = (d, train_y[j]);
                }
            }
            best.1
        })
        .collect()
}

/// Counts `m[t-1][p-1]`, skipping reference label 0.
pub fn naive_confusion(truth: &[u16], pred: &[u16], k: usize) -> Vec<Vec<u64>> {
    let mut m = vec![vec![0u64; k]; k];
    for i in 0..truth.len() {
        if truth[i] != 0 {
            m[truth[i] as usize - 1][pred[i] as usize - 1] += 1;
        }
    }
    m
}

pub fn naive_oa(m: &[Vec<u64>]) -> f64 {
    let n: u64 = m.iter().flatten().sum();
    let d: u64 = (0..m.len()).map(|i| m[i][i]).sum();
    d as f64 / n as f64
}

pub fn naive_kappa(m: &[Vec<u64>]) -> f64 {
    let k = m.len();
    let n: f64 = m.iter().flatten().sum::<u64>() as f64;
    let po = (0..k).map(|i| m[i][i]).sum::<u64>() as f64 / n;
    let mut pe = 0.0;
    for i in 0..k {
        let row: u64 = m[i].iter().sum();
        let col: u64 = (0..k).map(|j| m[j][i]).sum();
        pe += row as f64 * col as f64;
    }
    pe /= n * n;
    if pe >= 1.0 {
        0.0
    } else {
        (po - pe) / (1.0 - pe)
    }
}

/// Recall of class `c` (1-based) counted from label pairs.
pub fn recall(truth: &[u16], pred: &[u16], c: u16) -> Option<f64> {
    let relevant = truth.iter().filter(|&&t| t == c).count();
    let hit = truth.iter().zip(pred).filter(|(&t, &p)| t == c && p == c).count();
    (relevant > 0).then(|| hit as f64 / relevant as f64)
}

/// Precision of class `c` (1-based) counted from label pairs.
pub fn precision(truth: &[u16], pred: &[u16], c: u16) -> Option<f64> {
    let predicted = truth.iter().zip(pred).filter(|(&t, &p)| t != 0 && p == c).count();
    let hit = truth.iter().zip(pred).filter(|(&t, &p)| t == c && p == c).count();
    (predicted > 0).then(|| hit as f64 / predicted as f64)
}

/// Cyclic Jacobi eigensolver for a symmetric matrix. Returns eigenvalues in
/// decreasing order and the matching unit eigenvectors as columns.
pub fn jacobi_eigen(a: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = a.nrows();
    let mut a = a.clone();
    let mut v = Array2::<f64>::eye(n);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[[i, j]] * a[[i, j]])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[[p, q]].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * a[[p, q]]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[[k, p]], a[[k, q]]);
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[[p, k]], a[[q, k]]);
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[[k, p]], v[[k, q]]);
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[[j, j]].total_cmp(&a[[i, i]]));
    let values = order.iter().map(|&i| a[[i, i]]).collect();
    let vectors = Array2::from_shape_fn((n, n), |(r, c)| v[[r, order[c]]]);
    (values, vectors)
}

/// Dense RBF kernel PCA projections of the training points,
/// `√λ_k · v_k`, from the centered Gram matrix `H K H`.
pub fn dense_kpca_projections(x: &Array2<f64>, ell: f64, comps: usize) -> Array2<f64> {
    let m = x.nrows();
    let mut k = Array2::zeros((m, m));
    for i in 0..m {
        for j in 0..m {
            let mut d = 0.0;
            for f in 0..x.ncols() {
                d += (x[[i, f]] - x[[j, f]]).powi(2);
            }
            k[[i, j]] = (-d / (2.0 * ell * ell)).exp();
        }
    }
    let h = Array2::from_shape_fn((m, m), |(i, j)| if i == j { 1.0 } else { 0.0 } - 1.0 / m as f64);
    let kc = h.dot(&k).dot(&h);
    let (vals, vecs) = jacobi_eigen(&kc);
    Array2::from_shape_fn((m, comps), |(i, c)| vals[c].sqrt() * vecs[[i, c]])
}

/// Hand-rolled mean of all pairwise Euclidean distances.
pub fn hand_mean_distance(x: &Array2<f64>) -> f64 {
    let m = x.nrows();
    let mut total = 0.0;
    let mut pairs = 0;
    for i in 0..m {
        for j in 0..i {
            let d: f64 = (0..x.ncols()).map(|f| (x[[i, f]] - x[[j, f]]).powi(2)).sum();
            total += d.sqrt();
            pairs += 1;
        }
    }
    total / pairs as f64
}

/// Exact minimum of the box-constrained dual `½αᵀQα − Σα`, `0 ≤ α ≤ C`,
/// by enumerating which coordinates sit at 0, at C, or strictly inside and
/// solving the linear system for the free ones. Only for a handful of
/// samples. Returns `(objective, α)`.
pub fn brute_force_box_qp(q: &Array2<f64>, c: f64) -> (f64, Vec<f64>) {
    let m = q.nrows();
    let mut best = (f64::INFINITY, vec![0.0; m]);
    let total = 3usize.pow(m as u32);
    for code in 0..total {
        let mut state = vec![0u8; m];
        let mut rest = code;
        for s in state.iter_mut() {
            *s = (rest % 3) as u8;
            rest /= 3;
        }
        let free: Vec<usize> = (0..m).filter(|&i| state[i] == 2).collect();
        let mut alpha: Vec<f64> = state.iter().map(|&s| if s == 1 { c } else { 0.0 }).collect();
        if !free.is_empty() {
            // Q_FF α_F = 1 − Q_FB α_B
            let nf = free.len();
            let mut a = vec![vec![0.0; nf + 1]; nf];
            for (r, &i) in free.iter().enumerate() {
                for (s, &j) in free.iter().enumerate() {
                    a[r][s] = q[[i, j]];
                }
                let fixed: f64 = (0..m).filter(|j| state[*j] == 1).map(|j| q[[i, j]] * c).sum();
                a[r][nf] = 1.0 - fixed;
            }
            let Some(sol) = gauss_solve(a) else { continue };
            for (r, &i) in free.iter().enumerate() {
                alpha[i] = sol[r];
            }
            if sol.iter().any(|&v| v < -1e-12 || v > c + 1e-12) {
                continue;
            }
        }
        let mut obj = 0.0;
        for i in 0..m {
            for j in 0..m {
                obj += 0.5 * alpha[i] * q[[i, j]] * alpha[j];
            }
            obj -= alpha[i];
        }
        if obj < best.0 {
            best = (obj, alpha);
        }
    }
    best
}

fn gauss_solve(mut a: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let n = a.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                for k in col..=n {
                    a[r][k] -= f * a[col][k];
                }
            }
        }
    }
    Some((0..n).map(|i| a[i][n] / a[i][i]).collect())
}

/// Central finite difference of `f` at `x` along every coordinate.
pub fn finite_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], step: f64) -> Vec<f64> {
    let mut p = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = p[i];
            p[i] = orig + step;
            let up = f(&p);
            p[i] = orig - step;
            let down = f(&p);
            p[i] = orig;
            (up - down) / (2.0 * step)
        })
        .collect()
}
