use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate wavevector: k_par and xi are both zero")]
    DegenerateWavevector,

    #[error("unsupported stack topology for the screened n=0 term: {0}")]
    UnsupportedTopology(String),

    #[error("invalid layer stack: {0}")]
    InvalidStack(String),

    #[error("material `{material}` violates `{rule}`")]
    Invariant { material: String, rule: String },

    #[error("unknown material `{0}`")]
    UnknownMaterial(String),

    #[error("required material `{0}` missing from database")]
    MissingMaterial(String),

    #[error("failed to parse materials database: {0}")]
    Parse(String),

    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },

    #[error("{what} did not converge (partial estimate {partial:e}, {detail})")]
    NonConvergence {
        what: String,
        partial: f64,
        detail: String,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
