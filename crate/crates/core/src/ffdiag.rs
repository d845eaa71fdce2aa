//! Fast Frobenius-norm approximate joint diagonalization (FFDIAG), source
//! separation with the fitted demixing matrix, and per-trial residues.
//!
//! Each iteration solves, for every pair `i ≠ j`, the 2×2 least-squares system
//! that zeroes the first-order off-diagonal terms of `(I + W) C_k (I + W)ᵀ`,
//! then applies `V ← (I + W) V` with unit-norm rows.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::covariance::{trial_covariance_set, CovarianceSet};
use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::trial::TrialSet;

/// Denominators of the pairwise update below this magnitude are singular.
pub const SINGULAR_DENOMINATOR: f64 = 1e-300;
/// Pair systems whose determinant is this small relative to `z_ii·z_jj` are
/// rank deficient (e.g. a single matrix) and solved by pseudo-inverse.
const RANK_DEFICIENT_REL: f64 = 1e-12;

/// Stopping rule for the cost change between iterations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    /// Stop when `|f_n - f_{n-1}| < eps · (f_0 + 1)`.
    Relative(f64),
    /// Stop when `|f_n - f_{n-1}| < eps`.
    Absolute(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FfdiagConfig {
    pub epsilon: Tolerance,
    pub max_iters: usize,
}

impl Default for FfdiagConfig {
    fn default() -> Self {
        FfdiagConfig {
            epsilon: Tolerance::Relative(1e-12),
            max_iters: 1000,
        }
    }
}

impl FfdiagConfig {
    fn threshold(&self, initial_cost: f64) -> Result<f64> {
        let (eps, value) = match self.epsilon {
            Tolerance::Relative(e) => (e, e * (initial_cost + 1.0)),
            Tolerance::Absolute(e) => (e, e),
        };
        if !(eps > 0.0) || self.max_iters == 0 {
            return Err(Error::InvalidArgument(
                "ffdiag needs epsilon > 0 and max_iters >= 1".into(),
            ));
        }
        Ok(value)
    }
}

/// Result of a joint diagonalization run.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagResult {
    /// Demixing matrix with unit-norm rows.
    pub demixing: DMatrix<f64>,
    /// `V·C·Vᵀ` for every input matrix, indexed like the input set.
    pub transformed: Vec<SymMatrix>,
    /// Lag-0 transformed matrix of each trial with its diagonal zeroed.
    pub residues: Vec<DMatrix<f64>>,
    /// Frobenius norm of each residue.
    pub quality: Vec<f64>,
    /// Off-diagonality cost after each iteration.
    pub cost_trace: Vec<f64>,
    pub initial_cost: f64,
    pub iterations: usize,
    pub converged: bool,
    taus: Vec<usize>,
}

impl DiagResult {
    /// Transformed lag-0 matrix of trial `k`.
    pub fn lag0(&self, k: usize) -> &SymMatrix {
        let slot = self
            .taus
            .iter()
            .position(|&t| t == 0)
            .expect("lag 0 present");
        &self.transformed[k * self.taus.len() + slot]
    }

    pub fn final_cost(&self) -> f64 {
        self.cost_trace.last().copied().unwrap_or(self.initial_cost)
    }

    pub fn trial_count(&self) -> usize {
        self.quality.len()
    }
}

/// Sum of squared off-diagonal entries over a set.
pub fn off_diagonal_cost(set: &[SymMatrix]) -> f64 {
    set.iter().map(SymMatrix::off_diagonal_sq).sum()
}

/// Pairwise closed-form update `W` for the current working set, scaled by a
/// power of two so that `‖W‖_∞ < 1`.
pub fn compute_update_w(set: &[SymMatrix]) -> Result<DMatrix<f64>> {
    let n = set.first().map(SymMatrix::dim).unwrap_or(0);
    let mut z = DMatrix::<f64>::zeros(n, n);
    let mut y = DMatrix::<f64>::zeros(n, n);
    for c in set {
        for i in 0..n {
            for j in 0..n {
                z[(i, j)] += c[(i, i)] * c[(j, j)];
                y[(i, j)] += 0.5 * c[(j, j)] * (c[(i, j)] + c[(j, i)]);
            }
        }
    }

    let mut w = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let (zii, zjj, zij) = (z[(i, i)], z[(j, j)], z[(i, j)]);
            let (yij, yji) = (y[(i, j)], y[(j, i)]);
            let det = zjj * zii - zij * zij;
            if det.abs() > RANK_DEFICIENT_REL * zii * zjj && det.abs() >= SINGULAR_DENOMINATOR {
                w[(i, j)] = (zij * yji - zii * yij) / det;
                w[(j, i)] = (zij * yij - zjj * yji) / det;
            } else {
                // [[zjj, zij], [zij, zii]] is rank one: minimum-norm solution
                let trace = zii + zjj;
                if trace * trace < SINGULAR_DENOMINATOR {
                    return Err(Error::SingularUpdate { i, j });
                }
                let s = trace * trace;
                w[(i, j)] = -(zjj * yij + zij * yji) / s;
                w[(j, i)] = -(zij * yij + zii * yji) / s;
            }
        }
    }
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "ffdiag update",
        });
    }

    let norm = inf_norm(&w);
    if norm > 0.0 {
        let (_, e) = frexp(norm);
        let s = e.max(0);
        w /= libm::ldexp(1.0, s);
    }
    Ok(w)
}

/// Maximum absolute row sum.
pub fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `x = f · 2^e` with `0.5 ≤ |f| < 1`.
fn frexp(x: f64) -> (f64, i32) {
    libm::frexp(x)
}

fn normalize_rows(v: &mut DMatrix<f64>) {
    for mut row in v.row_iter_mut() {
        let norm = row.norm();
        if norm > 0.0 {
            row /= norm;
        }
    }
}

/// Runs FFDIAG from `V = I` until the cost change drops below the configured
/// tolerance or `max_iters` is reached.
///
/// Residues and quality values are taken from the lag-0 matrix of each trial;
/// the set must therefore contain lag 0.
pub fn ffdiag(set: &CovarianceSet, cfg: &FfdiagConfig) -> Result<DiagResult> {
    if set.is_empty() {
        return Err(Error::InvalidArgument("empty covariance set".into()));
    }
    if !set.taus().contains(&0) {
        return Err(Error::InvalidArgument(
            "lag 0 is required for residues".into(),
        ));
    }
    let originals = set.matrices();
    let dim = set.dim();
    let mut v = DMatrix::<f64>::identity(dim, dim);
    let mut working: Vec<SymMatrix> = originals.to_vec();
    let initial_cost = off_diagonal_cost(&working);
    let eps = cfg.threshold(initial_cost)?;

    let mut cost_trace = Vec::new();
    let mut converged = initial_cost < eps;
    let mut previous = initial_cost;
    let identity = DMatrix::<f64>::identity(dim, dim);
    while !converged && cost_trace.len() < cfg.max_iters {
        let w = compute_update_w(&working)?;
        v = (&identity + w) * v;
        normalize_rows(&mut v);
        working = originals.iter().map(|c| c.congruence(&v)).collect();
        let cost = off_diagonal_cost(&working);
        cost_trace.push(cost);
        converged = (cost - previous).abs() < eps;
        previous = cost;
    }

    let taus = set.taus().to_vec();
    let mut result = DiagResult {
        demixing: v,
        transformed: working,
        residues: Vec::new(),
        quality: Vec::new(),
        iterations: cost_trace.len(),
        cost_trace,
        initial_cost,
        converged,
        taus,
    };
    let (residues, quality) = (0..set.trial_count())
        .map(|k| {
            let e = result.lag0(k).off_diagonal();
            let p = e.norm();
            (e, p)
        })
        .unzip();
    result.residues = residues;
    result.quality = quality;
    Ok(result)
}

/// Applies `V·X^k` to every trial, keeping labels and metadata.
pub fn separate_sources(demixing: &DMatrix<f64>, set: &TrialSet) -> Result<TrialSet> {
    let m = set.channels();
    if demixing.nrows() != m || demixing.ncols() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: if demixing.ncols() != m {
                demixing.ncols()
            } else {
                demixing.nrows()
            },
            what: "demixing matrix",
        });
    }
    for (r, row) in demixing.row_iter().enumerate() {
        if !(row.norm() > f64::EPSILON) {
            return Err(Error::DegenerateDemixingRow(r));
        }
    }
    set.map_data(|x| Ok(demixing * x))
}

/// Lagged-covariance ICA: covariance set, joint diagonalization, then demixing.
pub fn ica(set: &TrialSet, taus: &[usize], cfg: &FfdiagConfig) -> Result<(DiagResult, TrialSet)> {
    let cov = trial_covariance_set(set, taus)?;
    let diag = ffdiag(&cov, cfg)?;
    let sources = separate_sources(&diag.demixing, set)?;
    Ok((diag, sources))
}
