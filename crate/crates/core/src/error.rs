use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e} exceeds {tolerance:.3e})")]
    NonHermitian { asymmetry: f64, tolerance: f64 },

    #[error("matrix is not positive definite (min eigenvalue {min_eig:.3e} below floor {floor:.3e})")]
    NotPositiveDefinite { min_eig: f64, floor: f64 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("trace is {trace}, expected 1")]
    InvalidTrace { trace: f64 },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("invalid Schatten order p = {0} (need p >= 1)")]
    InvalidOrder(f64),

    #[error("invalid Renyi parameter alpha = {0}")]
    InvalidAlpha(f64),

    #[error("channel is invalid: {0}")]
    InvalidChannel(String),

    #[error("channel output state is singular (min eigenvalue {min_eig:.3e})")]
    SingularOutputState { min_eig: f64 },

    #[error("weight operator is degenerate (min eigenvalue {min_eig:.3e})")]
    DegenerateWeight { min_eig: f64 },

    #[error("resolvent parameter t = {0} is too close to zero")]
    SingularResolvent(f64),

    #[error("random sample is degenerate: {0}")]
    DegenerateSample(String),

    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),

    #[error("optimizer did not converge: best value {best}, gap {gap:.3e}")]
    NonConvergence { best: f64, gap: f64 },

    #[error("recoverability certificate failed: residual {0:.3e}")]
    CertificateFailed(f64),

    #[error("matrix format error: {0}")]
    Format(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
