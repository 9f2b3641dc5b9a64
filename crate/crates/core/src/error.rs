use thiserror::Error;

use crate::qstate::ValidationReport;

/// Errors raised by the correlation toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid density matrix: {0}")]
    InvalidState(ValidationReport),

    #[error("parameters outside the Bell-diagonal tetrahedron: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("objective returned non-finite value {value} at theta={theta}, phi={phi}")]
    NonFinite { theta: f64, phi: f64, value: f64 },

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code: 2 for configuration and validation problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_)
            | Error::InvalidState(_)
            | Error::Domain(_)
            | Error::Precondition(_)
            | Error::Config(_)
            | Error::Json(_) => 2,
            Error::NonFinite { .. } | Error::Consistency(_) | Error::Io(_) | Error::Csv(_) => 1,
        }
    }
}
