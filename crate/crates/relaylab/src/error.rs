//! Crate-wide error type.

/// Errors raised by solvers, simulators and I/O layers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A value or combination of values violates a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration file is structurally valid but semantically unusable.
    #[error("config error: {0}")]
    Config(String),

    /// A receiver was scheduled while it is also listed as an active
    /// transmitter in the same TTI.
    #[error("half-duplex breach: {0}")]
    HalfDuplex(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
