use alloc::string::String;
use core::fmt;

use crate::Label;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A matrix or vector had the wrong shape for the operation.
    DimensionMismatch {
        expected: usize,
        found: usize,
        what: &'static str,
    },
    /// A value was NaN or infinite.
    NonFinite { what: &'static str },
    /// An argument violated a documented precondition.
    InvalidArgument(String),
    /// A trial set or fold did not contain a required class.
    MissingClass(Label),
    /// The FFDIAG update for the pair (i, j) has a vanishing denominator.
    SingularUpdate { i: usize, j: usize },
    /// A row of the demixing matrix has (near) zero norm.
    DegenerateDemixingRow(usize),
    /// The quality vector has zero trace.
    DegenerateQuality,
    /// A residue of exactly zero makes inverse-residue weights undefined.
    ZeroResidue(usize),
    /// A matrix that must be positive definite is not.
    NotPositiveDefinite { what: &'static str },
    /// Filtered signal has zero variance.
    ZeroVariance,
    /// Mixing matrix condition number exceeds the configured cap.
    IllConditionedMixing { condition: f64, cap: f64 },
    /// Too few trials for the requested fold count.
    InsufficientTrials { needed: usize, found: usize },
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch {
                expected,
                found,
                what,
            } => {
                write!(
                    f,
                    "dimension mismatch in {what}: expected {expected}, found {found}"
                )
            }
            Error::NonFinite { what } => write!(f, "non-finite value in {what}"),
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::MissingClass(label) => write!(f, "unstratified fold: class {label} absent"),
            Error::SingularUpdate { i, j } => {
                write!(f, "singular FFDIAG update for pair ({i}, {j})")
            }
            Error::DegenerateDemixingRow(r) => write!(f, "degenerate demixing row {r}"),
            Error::DegenerateQuality => write!(f, "degenerate quality vector (zero trace)"),
            Error::ZeroResidue(k) => {
                write!(f, "zero residue at trial {k}; use equal or sparse weights")
            }
            Error::NotPositiveDefinite { what } => write!(f, "{what} is not positive definite"),
            Error::ZeroVariance => write!(f, "zero variance"),
            Error::IllConditionedMixing { condition, cap } => {
                write!(
                    f,
                    "mixing matrix condition {condition:.3e} exceeds cap {cap}"
                )
            }
            Error::InsufficientTrials { needed, found } => {
                write!(f, "insufficient trials: need {needed}, found {found}")
            }
        }
    }
}

impl core::error::Error for Error {}
