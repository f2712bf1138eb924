use thiserror::Error;

use crate::shape::ShapeKind;

/// Errors raised by the fitting routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("series is empty")]
    EmptySeries,
    #[error("instants and observations differ in length ({times} vs {values})")]
    LengthMismatch { times: usize, values: usize },
    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },
    #[error("instants are not strictly increasing at index {index}")]
    NonIncreasingTimes { index: usize },
    #[error("exponent |k*span| = {exponent} exceeds the budget of {budget}")]
    OverflowRisk { exponent: f64, budget: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("rate must be non-zero for this solver")]
    ZeroRate,
    #[error("degenerate interpolation denominator between indices {i} and {j}")]
    DegenerateDenominator { i: usize, j: usize },
    #[error("series of shape {0:?} is solved directly and cannot be reduced")]
    NotReducible(ShapeKind),
    #[error("internal invariant violated: {0}")]
    InternalInvariant(String),
    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),
    #[error("no sign change of the pairing equation on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("refined model failed the optimality check")]
    RefinementRejected,
}

pub type Result<T> = std::result::Result<T, FitError>;
