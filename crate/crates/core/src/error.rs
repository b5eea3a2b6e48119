use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("coefficient singularity at t = {t}: 1 + e cos t = {denom:e}")]
    Singularity { t: f64, denom: f64 },

    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("symplectic residual {residual:e} exceeds {tol:e}")]
    NotSymplectic { residual: f64, tol: f64 },

    #[error("eigen decomposition failed: {0}")]
    Eigen(String),

    #[error("model violation: {0}")]
    ModelViolation(String),

    #[error("endpoint is omega-degenerate: |D_omega| = {value:e}")]
    DegenerateEndpoint { value: f64 },

    #[error("tangential crossing near s = {s} could not be resolved")]
    TangentialCrossing { s: f64 },

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("consistency check failed: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
