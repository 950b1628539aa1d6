//! Crate-wide error type.
//!
//! Every fallible operation in this crate returns [`Result`]. Numerical
//! failures (non-convergent iterations, unattainable tolerances) are reported
//! with enough context to diagnose them; they are never silently absorbed.

use thiserror::Error;

/// Errors produced by the solver and verification routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A domain parameter (dimension, grid size, box half-width) is invalid.
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    /// An order field violates its invariants (bounds, support, baseline).
    #[error("invalid order field: {0}")]
    InvalidOrderField(String),

    /// A scalar or array argument is out of range for the requested operation.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An iterative linear solve stopped without reaching the tolerance.
    #[error("linear solve did not converge: {context} (relative residual {residual:.3e} after {iterations} iterations)")]
    SolveDidNotConverge {
        context: String,
        residual: f64,
        iterations: usize,
    },

    /// Contour refinement exhausted its doubling budget.
    #[error("contour quadrature did not converge: successive difference {difference:.3e} exceeds tolerance {tolerance:.3e} after {doublings} doublings")]
    QuadratureDidNotConverge {
        difference: f64,
        tolerance: f64,
        doublings: usize,
    },

    /// A dense factorization was requested on a grid above the size cap.
    #[error("grid too large for dense singular-value computation: {size} points exceeds the cap of {limit}")]
    GridTooLarge { size: usize, limit: usize },

    /// The requested tolerance lies below the attainable accuracy.
    #[error("tolerance {requested:.3e} is tighter than the attainable accuracy {attainable:.3e}")]
    ToleranceTooTight { requested: f64, attainable: f64 },

    /// The implicit time march produced a non-finite or exploding state.
    #[error("time march unstable: {0}")]
    MarchUnstable(String),

    /// No contraction radius could be certified on the sampled range.
    #[error("contraction not certified: {0}")]
    ContractionNotCertified(String),

    /// The parameter condition guaranteeing a positive decay exponent fails
    /// or cannot be evaluated.
    #[error("decay condition violated: {0}")]
    DecayConditionViolated(String),

    /// An underlying I/O operation failed.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A file had an unexpected format.
    #[error("parse error: {0}")]
    Parse(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
