use thiserror::Error;

/// Errors raised by the library.
///
/// The variants mirror the exit-code classes used by the command-line
/// driver, so callers can map them without inspecting messages.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed or out-of-contract input (dimension mismatch, bad
    /// parameters, parse failures, ...).
    #[error("input error: {0}")]
    Input(String),

    /// A point set whose locations all coincide where two distinct
    /// locations are required.
    #[error("degenerate point set: {0}")]
    Degenerate(String),

    /// An enumeration or materialization would exceed its configured cap.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// A parameter combination that cannot be represented
    /// (e.g. a size threshold beyond 2^53).
    #[error("configuration error: {0}")]
    Config(String),

    /// Every grid level failed to produce a complete sketch recovery.
    #[error("sketch failure: {0}")]
    SketchFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
