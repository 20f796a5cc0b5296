//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Errors raised by system construction, simulation, identification and
/// controller synthesis.
#[derive(Debug, Error)]
pub enum Error {
    /// Matrix or sequence dimensions are inconsistent with the operation.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A documented precondition was violated by the caller.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// Not enough samples to perform the requested operation.
    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    /// The state matrix is not Schur stable.
    #[error("matrix is not Schur stable (spectral radius {rho})")]
    NotSchurStable { rho: f64 },

    /// A linear solve failed or produced an unusable result.
    #[error("ill-conditioned system: {0}")]
    IllConditioned(String),

    /// Rejection sampling exhausted its retry budget.
    #[error("generation failed after {attempts} attempts: {reason}")]
    GenerationFailed { attempts: usize, reason: String },

    /// The identity equation of the gain estimator could not be met:
    /// the input data is not sufficiently exciting.
    #[error("data not sufficiently exciting (identity residual {residual:.3e})")]
    DataNotExciting { residual: f64 },

    /// The data is inconsistent with a noise-free LTI trajectory.
    #[error("data inconsistent with noise-free LTI model (equality residual {residual:.3e})")]
    DataInconsistent { residual: f64 },

    /// Simulation produced a non-finite value.
    #[error("numerical overflow at step {step}")]
    Overflow { step: usize },

    /// A user-supplied Q violates the step-size certificate condition.
    #[error("certificate condition violated: lambda_min(Q) = {lambda_min:.6e} <= required {required:.6e}")]
    CertificateCondition { lambda_min: f64, required: f64 },

    /// Malformed CSV or JSON input.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
