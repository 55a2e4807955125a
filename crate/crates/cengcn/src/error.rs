//! Error type shared across the crate.
//!
//! Failures are bucketed into four kinds so the CLI can map them onto
//! distinct exit codes: configuration (2), data (3), numeric (4), I/O (5).

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Invalid parameter or contradictory configuration.
    #[error("config error: {0}")]
    Config(String),
    /// Malformed or inconsistent input data.
    #[error("data error: {0}")]
    Data(String),
    /// Numerical failure (divergence, non-convergence, NaN).
    #[error("numeric error: {0}")]
    Numeric(String),
    /// Filesystem failure.
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    /// Process exit code for this error kind.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Data(_) => 3,
            Error::Numeric(_) => 4,
            Error::Io(_) => 5,
        }
    }

    /// Prefix the message with the pipeline stage that failed.
    pub fn in_stage(self, stage: &str) -> Self {
        match self {
            Error::Config(m) => Error::Config(format!("{stage}: {m}")),
            Error::Data(m) => Error::Data(format!("{stage}: {m}")),
            Error::Numeric(m) => Error::Numeric(format!("{stage}: {m}")),
            Error::Io(m) => Error::Io(format!("{stage}: {m}")),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
