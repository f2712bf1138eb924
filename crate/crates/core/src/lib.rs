//! Best max-norm (Chebyshev) approximation of discrete data by the
//! exponential family `f(t) = a * exp(k t) + b`.
//!
//! * [`fixed_k`] solves for `(a, b)` at a given rate, exhaustively or by
//!   successive remainders.
//! * [`k_search`] minimizes the fixed-rate error over `k`, brackets the
//!   optimum from the sign pattern of the residuals and certifies optimality.
//! * [`linear`] fits the best line, which decides whether data decay.
//! * [`oracle`] holds brute-force references and synthetic data.
//! * [`io`] reads CSV and writes the JSON/TSV reports used by the CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod engine;
pub mod error;
pub mod fixed_k;
pub mod io;
pub mod k_search;
pub mod linear;
pub mod model;
pub mod oracle;
pub mod shape;

pub use engine::IndexUpdate;
pub use error::{FitError, Result};
pub use model::{
    critical_indices, error_of, evaluate, interp_slope, Critical, ExponentialModel, FitResult,
    LinearModel, Method, Sign, SolveStats, TimeSeries, Tolerances,
};
pub use shape::{
    classify, reduce_to_case1, undo_transform, Pattern, Shape, ShapeKind, SymmetryTransform,
};
