//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by library operations.
///
/// The variants distinguish resource caps (retryable with a bigger budget),
/// precondition violations (caller bugs or out-of-contract inputs), and
/// genuine numerical failures (non-convergence).
#[derive(Debug, Error)]
pub enum Error {
    /// An enumeration exceeded its configured element budget.
    #[error("element cap exceeded: more than {cap} distinct elements")]
    ResourceCap { cap: usize },

    /// Too few data points for a fit or classification.
    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    /// Gap statistics are undefined on fewer than two values.
    #[error("gap undefined: trace set has fewer than two values")]
    SingletonTraceSet,

    /// Matrix is not a valid group element (determinant ≠ 1).
    #[error("determinant must be exactly 1, got {got}")]
    NotUnimodular { got: String },

    /// A generic precondition of an operation was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Closed form requires a > 2 (real distinct roots).
    #[error("closed form undefined: requires a > 2, got a = {got}")]
    ClosedFormDomain { got: String },

    /// r-adic valuation of zero is undefined.
    #[error("valuation undefined: scaled term at index {index} is zero")]
    UndefinedValuation { index: usize },

    /// A verification horizon is too small to be meaningful.
    #[error("horizon too small: need at least {needed}, got {got}")]
    HorizonTooSmall { needed: usize, got: usize },

    /// Ratio rationality cannot be decided for float operands.
    #[error("undecidable ratio: float operands carry no exact ratio")]
    UndecidableRatio,

    /// Operation requires exact (rational/quadratic) representations.
    #[error("exactness required: {0}")]
    ExactnessRequired(&'static str),

    /// The decomposition l·a + b = K(lS + T)/L degenerates when a = 0.
    #[error("degenerate affine decomposition: leading coefficient is zero")]
    DegenerateAffine,

    /// Cusp normalization needs parabolic inputs.
    #[error("not parabolic: |trace| must equal 2 and the element must not be ±I")]
    NotParabolic,

    /// Cusp normalization needs distinct fixed points.
    #[error("parabolic fixed points coincide")]
    CoincidentFixedPoints,

    /// The conjugated corner entry is not a positive integer.
    #[error("cusp parameter is not a positive integer: {got}")]
    NonIntegerCusp { got: String },

    /// Trace sample contains values outside the declared field.
    #[error("field mismatch: {0}")]
    FieldMismatch(String),

    /// No scalar c with A = c·A′ and A′ rational exists.
    #[error("no scalar decomposition: entry ratios are not all rational")]
    NoScalarDecomposition,

    /// Integer could not be factored with the configured effort.
    #[error("factorization gave up on {value}")]
    Unfactorable { value: String },

    /// Fricke tail has not been solved or provided.
    #[error("unsolved tail: solve_tail must run before embedding")]
    UnsolvedTail,

    /// Root finding failed to reach the residual target.
    #[error("tail solve did not converge: best residual {best_residual:e}")]
    NonConvergence { best_residual: f64 },

    /// A solution was found but violates the required sign branch.
    #[error("branch violation: {0}")]
    BranchViolation(&'static str),

    /// λ₁ upper bound reached 1/4: the strict-inequality branch fails.
    #[error("pipeline branch error: λ1 upper bound {got} is not < 1/4")]
    PipelineBranch { got: f64 },

    /// Orbit counts are non-increasing; no exponent can be fit.
    #[error("degenerate orbit counts: not strictly increasing")]
    DegenerateCounts,
}
