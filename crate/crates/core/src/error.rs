//! Crate-wide error type.

use alloc::string::String;
use alloc::vec::Vec;

/// Errors produced by geometry construction, linear algebra and solvers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("cusp profile exponent k = {k} rejected; profiles require k >= 1")]
    CuspExponentTooSmall { k: f64 },
    #[error("tabulated cusp profile is invalid: {reason}")]
    InvalidTabulatedProfile { reason: String },
    #[error("tabulated cusp profile with {samples} samples is too coarse to classify (need >= 8)")]
    ProfileTooCoarse { samples: usize },
    #[error("invalid geometry configuration: {reason}")]
    InvalidGeometry { reason: String },
    #[error("mesh of {requested} cells exceeds the cell budget of {budget}")]
    CellBudgetExceeded { requested: usize, budget: usize },
    #[error("singularity function produced value {value} at cell {cell}; values must lie in (0, 1]")]
    SingularityFunctionRange { cell: usize, value: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not numerically symmetric: |A_ij - A_ji| = {deviation}")]
    NotSymmetric { deviation: f64 },
    #[error("conjugate gradient did not converge in {iterations} iterations (residual {residual})")]
    CgNonconvergence { iterations: usize, residual: f64 },
    #[error("inverse power iteration did not converge in {iterations} iterations")]
    EigenNonconvergence { iterations: usize },
    #[error("coefficient violates the positivity floor: inf a = {inf_a}")]
    CoefficientNotPositive { inf_a: f64 },
    #[error("weighted norms support derivative orders k <= 1, got k = {k}")]
    UnsupportedNormOrder { k: usize },
    #[error("invalid norm exponent p = {p}; need p in [1, inf]")]
    InvalidNormExponent { p: f64 },
    #[error("state violates the ball condition: ||u||_inf = {sup_norm} >= bound {bound}")]
    BallConditionViolated { sup_norm: f64, bound: f64 },
    #[error("Newton iteration stagnated at residual {residual} after {iterations} iterations")]
    NewtonStagnation {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },
    #[error("invalid time partition: {reason}")]
    InvalidPartition { reason: String },
    #[error("traces are not comparable: {reason}")]
    TraceMismatch { reason: String },
    #[error("invalid argument: {reason}")]
    InvalidArgument { reason: String },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
