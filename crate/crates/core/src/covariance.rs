//! Within-trial and time-lagged covariance estimates.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::trial::{Trial, TrialSet};

/// Symmetrized lagged covariance of a mean-removed trial:
/// `C0 = X[:, 0..N-τ] · X[:, τ..N]ᵀ / (N - τ - 1)`, returned as `(C0 + C0ᵀ)/2`.
pub fn lagged_covariance(trial: &Trial, tau: usize) -> Result<SymMatrix> {
    let n = trial.samples();
    if tau + 1 >= n {
        return Err(Error::InvalidArgument(alloc::format!(
            "lag {tau} leaves no product window for {n} samples"
        )));
    }
    let m = trial.channels();
    let len = n - tau;
    let x = &trial.data;
    let lead = x.columns(0, len);
    let lagged = x.columns(tau, len);
    let mut c0: DMatrix<f64> = lead * lagged.transpose();
    c0 /= (len - 1) as f64;
    debug_assert_eq!(c0.nrows(), m);
    Ok(SymMatrix::symmetrize(c0))
}

/// Covariance matrices for every (trial, lag) pair, stored trial-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceSet {
    matrices: Vec<SymMatrix>,
    trial_index: Vec<usize>,
    lag: Vec<usize>,
    taus: Vec<usize>,
    trials: usize,
}

impl CovarianceSet {
    /// Assembles a set from matrices laid out trial-major over `taus`.
    pub fn from_matrices(matrices: Vec<SymMatrix>, taus: Vec<usize>) -> Result<Self> {
        if taus.is_empty() {
            return Err(Error::InvalidArgument("lag array is empty".into()));
        }
        let mut sorted = taus.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != taus.len() {
            return Err(Error::InvalidArgument("duplicate lag".into()));
        }
        if matrices.is_empty() || !matrices.len().is_multiple_of(taus.len()) {
            return Err(Error::DimensionMismatch {
                expected: taus.len(),
                found: matrices.len(),
                what: "matrix count per lag array",
            });
        }
        let dim = matrices[0].dim();
        if let Some(bad) = matrices.iter().find(|c| c.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
                what: "covariance dimension",
            });
        }
        let trials = matrices.len() / taus.len();
        let trial_index = (0..matrices.len()).map(|i| i / taus.len()).collect();
        let lag = (0..matrices.len()).map(|i| taus[i % taus.len()]).collect();
        Ok(CovarianceSet {
            matrices,
            trial_index,
            lag,
            taus,
            trials,
        })
    }

    /// One lag-0 matrix per trial.
    pub fn from_lag0(matrices: Vec<SymMatrix>) -> Result<Self> {
        Self::from_matrices(matrices, alloc::vec![0])
    }

    pub fn matrices(&self) -> &[SymMatrix] {
        &self.matrices
    }

    pub fn trial_index(&self) -> &[usize] {
        &self.trial_index
    }

    pub fn lags(&self) -> &[usize] {
        &self.lag
    }

    pub fn taus(&self) -> &[usize] {
        &self.taus
    }

    pub fn trial_count(&self) -> usize {
        self.trials
    }

    pub fn dim(&self) -> usize {
        self.matrices[0].dim()
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    /// Position of the (trial, lag) matrix, if present.
    pub fn position(&self, trial: usize, tau: usize) -> Option<usize> {
        let slot = self.taus.iter().position(|&t| t == tau)?;
        (trial < self.trials).then(|| trial * self.taus.len() + slot)
    }

    pub fn get(&self, trial: usize, tau: usize) -> Option<&SymMatrix> {
        self.position(trial, tau).map(|i| &self.matrices[i])
    }
}

/// Default lags `[0, 1]`.
pub const DEFAULT_TAUS: [usize; 2] = [0, 1];

/// `lagged_covariance(trial_k, τ)` for every trial and every lag, in trial order.
pub fn trial_covariance_set(set: &TrialSet, taus: &[usize]) -> Result<CovarianceSet> {
    let mut matrices = Vec::with_capacity(set.len() * taus.len());
    for trial in set.trials() {
        for &tau in taus {
            matrices.push(lagged_covariance(trial, tau)?);
        }
    }
    CovarianceSet::from_matrices(matrices, taus.to_vec())
}
