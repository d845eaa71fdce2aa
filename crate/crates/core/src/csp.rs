//! Common spatial patterns from two class covariances, and normalized
//! log-variance features.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{sym_eigen_desc, SymMatrix};
use crate::trial::Trial;
use crate::Label;

/// Diagonal loading applied to each class covariance, relative to its mean eigenvalue.
pub const RIDGE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct CspModel {
    /// `2m × M`; the first `m` rows maximize class-1 variance, the last `m` minimize it.
    pub filters: DMatrix<f64>,
    /// Generalized eigenvalues in `[0, 1]`, descending.
    pub eigenvalues: Vec<f64>,
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub label: Label,
}

fn load(sigma: &SymMatrix) -> DMatrix<f64> {
    let dim = sigma.dim();
    let mut out = sigma.as_matrix().clone();
    let ridge = RIDGE * sigma.trace() / dim as f64;
    for i in 0..dim {
        out[(i, i)] += ridge;
    }
    out
}

/// Solves `Σ1 u = λ (Σ1 + Σ2) u` by whitening the composite covariance and
/// keeps the `m` largest and `m` smallest λ. Filters satisfy `uᵀ(Σ1+Σ2)u = 1`.
pub fn csp_filters(sigma1: &SymMatrix, sigma2: &SymMatrix, m: usize) -> Result<CspModel> {
    let dim = sigma1.dim();
    if sigma2.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: sigma2.dim(),
            what: "class covariance",
        });
    }
    if m == 0 || 2 * m > dim {
        return Err(Error::InvalidArgument(alloc::format!(
            "need 1 <= m and 2m <= {dim}, got m = {m}"
        )));
    }
    let s1 = load(sigma1);
    let composite = &s1 + load(sigma2);

    let (lambda, basis) = sym_eigen_desc(&composite);
    let floor = lambda[0].abs() * f64::EPSILON;
    if !(lambda[dim - 1] > floor) {
        return Err(Error::NotPositiveDefinite {
            what: "composite covariance",
        });
    }
    let mut whitening = basis.transpose();
    for (i, mut row) in whitening.row_iter_mut().enumerate() {
        row /= libm::sqrt(lambda[i]);
    }
    let whitened = SymMatrix::symmetrize(&whitening * &s1 * whitening.transpose());
    let (mu, rot) = sym_eigen_desc(whitened.as_matrix());
    let all = rot.transpose() * whitening;

    let keep: Vec<usize> = (0..m).chain((dim - m)..dim).collect();
    let mut filters = DMatrix::zeros(2 * m, dim);
    for (dst, &src) in keep.iter().enumerate() {
        filters.set_row(dst, &all.row(src));
    }
    let eigenvalues = keep.iter().map(|&i| mu[i].clamp(0.0, 1.0)).collect();
    Ok(CspModel {
        filters,
        eigenvalues,
        m,
    })
}

/// `log(var_j / Σ_i var_i)` of each filtered row.
pub fn csp_features(model: &CspModel, trial: &Trial) -> Result<FeatureVector> {
    if trial.channels() != model.filters.ncols() {
        return Err(Error::DimensionMismatch {
            expected: model.filters.ncols(),
            found: trial.channels(),
            what: "trial channels",
        });
    }
    let projected = &model.filters * &trial.data;
    let n = projected.ncols() as f64;
    let vars: Vec<f64> = projected
        .row_iter()
        .map(|row| {
            let mean = row.sum() / n;
            row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
        })
        .collect();
    let total: f64 = vars.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::ZeroVariance);
    }
    let values = vars
        .iter()
        .map(|&v| {
            if v > 0.0 {
                libm::log(v / total)
            } else {
                f64::MIN
            }
        })
        .collect::<Vec<_>>();
    if values.iter().any(|v| !v.is_finite() || *v == f64::MIN) {
        return Err(Error::ZeroVariance);
    }
    Ok(FeatureVector {
        values,
        label: trial.label,
    })
}
