//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sparsetrial_core::nalgebra::{DMatrix, DVector};
use sparsetrial_core::SymMatrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// `B·Bᵀ/M + 0.1·I` for Gaussian `B`.
pub fn random_spd(rng: &mut ChaCha8Rng, m: usize) -> SymMatrix {
    let b = gaussian(rng, m, m);
    let s = &b * b.transpose() / m as f64 + DMatrix::identity(m, m) * 0.1;
    SymMatrix::symmetrize(s)
}

/// Random matrix with condition number exactly `cond` (orthogonal factors from QR).
pub fn mixing_with_condition(rng: &mut ChaCha8Rng, m: usize, cond: f64) -> DMatrix<f64> {
    let u = gaussian(rng, m, m).qr().q();
    let v = gaussian(rng, m, m).qr().q();
    let s = DVector::from_fn(m, |i, _| {
        if m == 1 {
            1.0
        } else {
            cond.powf(i as f64 / (m - 1) as f64)
        }
    });
    u * DMatrix::from_diagonal(&s) * v.transpose()
}

/// Double-loop lagged covariance, symmetrized, with denominator `N - τ - 1`.
pub fn brute_lagged_cov(x: &DMatrix<f64>, tau: usize) -> DMatrix<f64> {
    let (m, n) = x.shape();
    let mut c = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let mut ij = 0.0;
            let mut ji = 0.0;
            for t in 0..n - tau {
                ij += x[(i, t)] * x[(j, t + tau)];
                ji += x[(j, t)] * x[(i, t + tau)];
            }
            c[(i, j)] = 0.5 * (ij + ji) / (n - tau - 1) as f64;
        }
    }
    c
}

pub fn off_diag_sq(m: &DMatrix<f64>) -> f64 {
    let mut s = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j {
                s += m[(i, j)] * m[(i, j)];
            }
        }
    }
    s
}

/// Σ_k off(V C_k Vᵀ)².
pub fn joint_cost(v: &DMatrix<f64>, mats: &[DMatrix<f64>]) -> f64 {
    mats.iter()
        .map(|c| off_diag_sq(&(v * c * v.transpose())))
        .sum()
}

/// Amari index of `P = V·A`, normalized to `[0, 1]`.
pub fn amari(v: &DMatrix<f64>, a: &DMatrix<f64>) -> f64 {
    let p = (v * a).map(f64::abs);
    let n = p.nrows();
    let mut s = 0.0;
    for i in 0..n {
        let row_max = p.row(i).max();
        s += p.row(i).sum() / row_max - 1.0;
    }
    for j in 0..n {
        let col_max = p.column(j).max();
        s += p.column(j).sum() / col_max - 1.0;
    }
    s / (2.0 * n as f64 * (n as f64 - 1.0))
}

/// `G_ij = tr(Q_i Q_jᵀ)` by explicit summation.
pub fn gram(mats: &[DMatrix<f64>]) -> DMatrix<f64> {
    let k = mats.len();
    DMatrix::from_fn(k, k, |i, j| {
        mats[i].iter().zip(mats[j].iter()).map(|(a, b)| a * b).sum()
    })
}

/// Weight objective: `α/Σp · Σ p_k|w_k| + ½ (w − 1/K)ᵀ G (w − 1/K) / tr G`.
pub fn weight_objective(p: &[f64], g: &DMatrix<f64>, alpha: f64, w: &[f64]) -> f64 {
    let k = p.len();
    let psum: f64 = p.iter().sum();
    let tr: f64 = (0..k).map(|i| g[(i, i)]).sum();
    let l1: f64 = p.iter().zip(w).map(|(p, w)| p * w.abs()).sum();
    let mut quad = 0.0;
    for i in 0..k {
        for j in 0..k {
            quad += (w[i] - 1.0 / k as f64) * g[(i, j)] * (w[j] - 1.0 / k as f64);
        }
    }
    alpha / psum * l1 + 0.5 * quad / tr
}

/// Exhaustive search over the simplex grid `{w : w_k = n_k·step, Σ n_k = 1/step}`
/// for K ≤ 4. Returns the best objective and its grid point.
pub fn grid_oracle(p: &[f64], g: &DMatrix<f64>, alpha: f64, step: f64) -> (f64, Vec<f64>) {
    let k = p.len();
    assert!((1..=4).contains(&k), "grid oracle supports 1 ≤ K ≤ 4");
    let n = (1.0 / step).round() as usize;
    let mut best = (f64::INFINITY, vec![0.0; k]);
    let mut consider = |counts: &[usize]| {
        let w: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
        let f = weight_objective(p, g, alpha, &w);
        if f < best.0 {
            best = (f, w);
        }
    };
    match k {
        1 => consider(&[n]),
        2 => (0..=n).for_each(|a| consider(&[a, n - a])),
        3 => {
            for a in 0..=n {
                for b in 0..=n - a {
                    consider(&[a, b, n - a - b]);
                }
            }
        }
        _ => return grid_oracle_4(p, g, alpha, n),
    }
    best
}

/// K = 4: for each (w1, w2) the objective along the remaining edge is an
/// explicit quadratic in w3, evaluated at every grid point.
fn grid_oracle_4(p: &[f64], g: &DMatrix<f64>, alpha: f64, n: usize) -> (f64, Vec<f64>) {
    let psum: f64 = p.iter().sum();
    let tr = g.trace();
    let lin = |w: &[f64; 4]| alpha / psum * (0..4).map(|i| p[i] * w[i]).sum::<f64>();
    let quad = |w: &[f64; 4]| {
        let d: Vec<f64> = w.iter().map(|x| x - 0.25).collect();
        let mut s = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                s += d[i] * g[(i, j)] * d[j];
            }
        }
        0.5 * s / tr
    };
    // direction e3 − e4
    let dir_quad = 0.5 * (g[(2, 2)] - 2.0 * g[(2, 3)] + g[(3, 3)]) / tr;
    let h = 1.0 / n as f64;
    let mut best = (f64::INFINITY, vec![0.0; 4]);
    for a in 0..=n {
        for b in 0..=n - a {
            let rest = n - a - b;
            let base = [a as f64 * h, b as f64 * h, 0.0, rest as f64 * h];
            let f0 = lin(&base) + quad(&base);
            let d: Vec<f64> = base.iter().map(|x| x - 0.25).collect();
            let gd3: f64 = (0..4).map(|j| g[(2, j)] * d[j]).sum();
            let gd4: f64 = (0..4).map(|j| g[(3, j)] * d[j]).sum();
            let slope = alpha / psum * (p[2] - p[3]) + (gd3 - gd4) / tr;
            for c in 0..=rest {
                let t = c as f64 * h;
                let f = f0 + slope * t + dir_quad * t * t;
                if f < best.0 {
                    best = (f, vec![base[0], base[1], t, base[3] - t]);
                }
            }
        }
    }
    // re-evaluate the winner directly
    best.0 = weight_objective(p, g, alpha, &best.1);
    best
}

/// Solves a small SVM dual exactly by enumerating which multipliers sit at 0,
/// at `c`, or strictly between, and solving the equality-constrained stationarity
/// system for the free ones. Returns `(alpha, bias)` of the best feasible candidate.
pub fn svm_dual_oracle(k: &DMatrix<f64>, y: &[f64], c: f64) -> (Vec<f64>, f64) {
    let n = y.len();
    let q = DMatrix::from_fn(n, n, |i, j| y[i] * y[j] * k[(i, j)]);
    let dual = |a: &[f64]| {
        let s: f64 = a.iter().sum();
        let mut quad = 0.0;
        for i in 0..n {
            for j in 0..n {
                quad += a[i] * q[(i, j)] * a[j];
            }
        }
        s - 0.5 * quad
    };
    let mut best: Option<(f64, Vec<f64>, f64)> = None;
    for code in 0..3usize.pow(n as u32) {
        let state: Vec<usize> = (0..n).map(|i| code / 3usize.pow(i as u32) % 3).collect();
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 1).collect();
        let mut a: Vec<f64> = state
            .iter()
            .map(|&s| if s == 2 { c } else { 0.0 })
            .collect();
        let mut bias = f64::NAN;
        if !free.is_empty() {
            let f = free.len();
            let mut lhs = DMatrix::zeros(f + 1, f + 1);
            let mut rhs = DVector::zeros(f + 1);
            for (r, &i) in free.iter().enumerate() {
                for (s, &j) in free.iter().enumerate() {
                    lhs[(r, s)] = q[(i, j)];
                }
                lhs[(r, f)] = y[i];
                lhs[(f, r)] = y[i];
                rhs[r] = 1.0
                    - (0..n)
                        .filter(|j| state[*j] == 2)
                        .map(|j| q[(i, j)] * c)
                        .sum::<f64>();
            }
            rhs[f] = -(0..n)
                .filter(|j| state[*j] == 2)
                .map(|j| y[j] * c)
                .sum::<f64>();
            let Some(sol) = lhs.lu().solve(&rhs) else {
                continue;
            };
            if free
                .iter()
                .enumerate()
                .any(|(r, _)| !(sol[r] > 0.0 && sol[r] < c))
            {
                continue;
            }
            for (r, &i) in free.iter().enumerate() {
                a[i] = sol[r];
            }
            // free points satisfy (Qα)_i + y_i·b = 1
            bias = sol[f];
        } else if a.iter().zip(y).map(|(a, y)| a * y).sum::<f64>().abs() > 1e-12 {
            continue;
        }
        let val = dual(&a);
        if best.as_ref().is_none_or(|b| val > b.0 + 1e-12) {
            best = Some((val, a, bias));
        }
    }
    let (_, a, bias) = best.expect("some feasible multiplier pattern");
    (a, bias)
}
