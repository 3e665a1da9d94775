use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field is in the {found} domain, expected {expected}")]
    DomainMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("point is not in the half-space η·θ < 0 (η·θ = {dot})")]
    NotInHalfSpace { dot: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{what} is outside the range where it is defined: {reason}")]
    OutOfRange { what: &'static str, reason: String },

    #[error("grid too coarse: {0}")]
    Aliasing(String),

    #[error("need at least {need} usable samples, got {got}")]
    InsufficientSamples { got: usize, need: usize },

    #[error("tolerance {tol:e} not reached (error estimate {estimate:e})")]
    ToleranceNotReached { tol: f64, estimate: f64 },

    #[error("operation requires {0}")]
    Unsupported(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
