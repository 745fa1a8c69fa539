use thiserror::Error;

use crate::scheme::ControlScheme;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("scheme {scheme} has no {what}")]
    SchemeUsage {
        scheme: ControlScheme,
        what: &'static str,
    },

    #[error("stability matrix is not symplectic: det = {det}")]
    NotSymplectic { det: f64 },

    #[error("singular off-diagonal block |m21| = {m21:e}; compose with a free half-step first")]
    SingularBlock { m21: f64 },

    #[error("wave packet tails overlap on the torus: exp(-1/(8 hbar)) = {tail:e} >= 1e-6")]
    TailCondition { tail: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("cannot select from an empty orbit list")]
    EmptyOrbitList,

    #[error("Wigner resolution {n_q}x{n_p} too coarse for N = {n}")]
    ResolutionTooCoarse { n_q: usize, n_p: usize, n: usize },

    #[error("orbit file: {0}")]
    OrbitFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
