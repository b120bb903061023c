use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("root is not bracketed: g({lo}) = {g_lo}, g({hi}) = {g_hi}")]
    BracketInvalid {
        lo: f64,
        hi: f64,
        g_lo: f64,
        g_hi: f64,
    },

    #[error("{what} did not converge after {steps} steps (last change {last_change:e})")]
    NonConvergence {
        what: &'static str,
        steps: usize,
        last_change: f64,
    },

    #[error("received block is already rescaled")]
    AlreadyScaled,

    #[error("received block must be rescaled before decoding")]
    NotScaled,

    #[error("frozen bits 0..{known} overlap requested outputs starting at {start}")]
    FrozenOverlap { known: usize, start: usize },

    #[error("recursion left [0, 1] at step {step}: {value}")]
    Divergence { step: usize, value: f64 },

    #[error("invalid field `{path}`: {reason}")]
    InvalidField { path: String, reason: String },

    #[error("I/O error on {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
