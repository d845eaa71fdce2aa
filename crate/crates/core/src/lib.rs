//! Numerical core for sparse trial weighting of multichannel recordings.
//!
//! The pipeline separates trials into sources with a fast non-orthogonal joint
//! diagonalization, scores each trial by its diagonalization residue, solves a
//! simplex-constrained ℓ1-regularized problem with ADMM for sparse trial
//! weights, and classifies trials with weighted-covariance CSP features and a
//! soft-margin SVM.
//!
//! The crate is `no_std` and needs only `alloc`. File formats, reports and the
//! command-line tool live in the `sparsetrial` crate.
#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod covariance;
pub mod csp;
pub mod error;
pub mod ffdiag;
pub mod filter;
pub mod linalg;
pub mod pipeline;
pub mod svm;
pub mod synth;
pub mod trial;
pub mod weights;

/// Class identifier. String labels are mapped to integers at ingestion.
pub type Label = i32;

pub use covariance::{lagged_covariance, trial_covariance_set, CovarianceSet};
pub use error::{Error, Result};
pub use ffdiag::{ffdiag, ica, separate_sources, DiagResult, FfdiagConfig, Tolerance};
pub use linalg::{amari_index, SymMatrix};
pub use nalgebra;
pub use trial::{preprocess, BandSpec, PreprocessConfig, Trial, TrialSet};
