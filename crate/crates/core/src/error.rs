use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("operator is not Hermitian (anti-Hermitian part {0:.3e})")]
    NotHermitian(f64),
    #[error("operator is not positive semidefinite (minimum eigenvalue {0:.3e})")]
    NotPsd(f64),
    #[error("not normalized: {0}")]
    NotNormalized(String),
    #[error("effects do not resolve the identity (deviation {0:.3e})")]
    Incomplete(f64),
    #[error("behavior is signaling (marginal mismatch {0:.3e})")]
    Signaling(f64),
    #[error("scenario mismatch: {0}")]
    ScenarioMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("problem too large: {0}")]
    TooLarge(String),
    #[error("noise endpoint admits no classical model")]
    NoiseNotClassical,
    #[error("solver failed: {0}")]
    Solver(String),
    #[error("seesaw reached {best:.9} after {restarts} restarts, target {target:.9}")]
    SeesawFailed { best: f64, target: f64, restarts: usize },
    #[error("aborted")]
    Aborted,
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
