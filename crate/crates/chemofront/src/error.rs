//! Crate-wide error type.
//!
//! Errors split into two families used by the CLI exit codes: configuration /
//! hypothesis failures (exit code 1) and numerical failures during a run
//! (exit code 2).

use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    // --- configuration / domain / hypothesis failures ---
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid averaging window: {0}")]
    InvalidWindow(String),

    #[error("standing-assumption violation: {0}")]
    Hypothesis(String),

    #[error("coefficient kind not supported here: {0}")]
    UnsupportedCoefficient(String),

    #[error("grid or profile shape invalid: {0}")]
    Shape(String),

    #[error("tail specification inconsistent with profile: {0}")]
    TailMismatch(String),

    #[error("config parse error at line {line}: {msg}")]
    ConfigParse { line: usize, msg: String },

    #[error("config invalid for key `{key}`: {msg}")]
    ConfigInvalid { key: String, msg: String },

    // --- numerical failures ---
    #[error("logistic relaxation failed to reach a periodic orbit: {0}")]
    RelaxationFailure(String),

    #[error("derived front constant has the wrong sign: {0}")]
    ConstantSign(String),

    #[error("no junction point for the lower barrier: {0}")]
    JunctionNotFound(String),

    #[error("timestep restriction violated: {0}")]
    Timestep(String),

    #[error("solver diverged: {0}")]
    Divergence(String),

    #[error("back-window doubling did not converge: {0}")]
    BackWindow(String),

    #[error("fixed-point iteration stalled: {0}")]
    FixedPointStall(String),

    #[error("iterate escaped the invariant set: {0}")]
    SetEscape(String),

    #[error("front tracking lost the level set: {0}")]
    TrackingLoss(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// CLI exit code class: 1 for configuration/hypothesis failures, 2 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_)
            | Error::InvalidWindow(_)
            | Error::Hypothesis(_)
            | Error::UnsupportedCoefficient(_)
            | Error::Shape(_)
            | Error::TailMismatch(_)
            | Error::ConfigParse { .. }
            | Error::ConfigInvalid { .. } => 1,
            _ => 2,
        }
    }
}
