//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by phase-space, circuit, Fisher and oracle computations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not unitary (defect {defect:.3e})")]
    NotUnitary { defect: f64 },

    #[error("matrix is not symplectic (defect {defect:.3e})")]
    NotSymplectic { defect: f64 },

    #[error("covariance matrix is not symmetric positive definite")]
    NotPositiveDefinite,

    #[error("state is unphysical (smallest symplectic eigenvalue {nu_min:.6} < 1/2)")]
    Unphysical { nu_min: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("closed form requires a real coherent amplitude (Im alpha = {0:.3e})")]
    ComplexAmplitude(f64),

    #[error("degenerate squeezing regime (r <= {r_min:.1e}); fall back to mode 1")]
    DegenerateSqueezing { r_min: f64 },

    #[error("Fock truncation error too large (trace deficit {deficit:.3e}); raise the cutoff")]
    Truncation { deficit: f64 },

    #[error("estimation failure: {0}")]
    EstimationFailure(String),

    #[error("internal numerical error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
