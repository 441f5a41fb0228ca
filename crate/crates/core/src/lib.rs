//! Exact (non-approximate) best-subset selection for sparse linear regression.
//!
//! Every candidate subset of `k` predictors is scored for every responder by its
//! conditional uncorrelation `ω²(y | x_1..x_k) = det(R_xy) / det(R_x)`, which equals
//! `MSE / σ_y²` of the least-squares fit. No regression coefficients are computed
//! while searching; they are recovered once, for the winning subset only.
//!
//! The classical normal-equation ("hat-matrix") method is implemented alongside as
//! both a correctness oracle and a performance baseline, and every kernel is generic
//! over [`Scalar`] so it can be instantiated with the counting scalar in [`opcount`].

// Kernels index several arrays with one loop counter, and `!(x > eps)` rejects NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod hat;
pub mod matrix;
pub mod opcount;
pub mod scalar;
pub mod search;
pub mod stats;
pub mod subsets;
pub mod synth;
pub mod uuc;

pub use error::{Error, Result};
pub use hat::{DesignMatrix, FitResult, GramTables, HatOrdering};
pub use matrix::Square;
pub use opcount::{CountMethod, CountPrediction, Counted, OpTally};
pub use scalar::Scalar;
pub use search::{
    select_best, CorrelationModel, Method, SearchOptions, SearchOutcome, SearchStats,
    SelectionResult,
};
pub use stats::{ColumnStats, CorrelationMatrix, ObservationMatrix};
pub use subsets::{KSubsets, SubsetCandidate};
pub use uuc::{ConditionalUuc, RegressionCoefficients, TriangularCache};

/// Pivot magnitude below which a predictor subset is treated as collinear.
pub const EPS_PIV: f64 = 1e-10;

/// Rounding slack for `ω²` near zero; anything further below zero is a bug.
pub const EPS_NUM: f64 = 1e-9;

/// Relative standard-deviation floor for a usable (non-constant) column.
pub const EPS_VAR: f64 = 1e-12;

/// Scores closer than this are ties, broken by the lexicographically smaller subset.
pub const TIE_EPS: f64 = 1e-12;
