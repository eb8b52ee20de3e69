use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside the range where the object is defined.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The input is well-typed but the operation is undefined on it
    /// (empty measure, non-binary draws, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical routine failed to reach its tolerance or produced a
    /// non-finite value.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// An expected value diverges for the given parameters.
    #[error("divergent quantity: {0}")]
    Divergent(String),

    /// Malformed input data (corpus lines, CSV rows, stored samples).
    #[error("data error: {0}")]
    Data(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    /// Process exit code for the command-line tool: 2 usage, 3 data, 4 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parameter(_) | Error::Usage(_) | Error::Divergent(_) => 2,
            Error::Domain(_) | Error::Data(_) | Error::Io(_) | Error::Json(_) => 3,
            Error::Numeric(_) => 4,
        }
    }
}

pub(crate) fn ensure_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::param(format!(
            "{name} must be finite and > 0, got {value}"
        )))
    }
}

pub(crate) fn ensure_open_unit(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!(
            "{name} must lie in (0, 1), got {value}"
        )))
    }
}
