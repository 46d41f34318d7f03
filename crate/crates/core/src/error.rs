use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration (grid, camera, experiment) is inconsistent or inadequate.
    #[error("configuration error: {0}")]
    Config(String),

    /// A numerical procedure did not reach its requested accuracy.
    #[error("numerical error: {message}")]
    Numerical {
        message: String,
        /// Free-form diagnostic (interval counts, worst node, residual mass).
        diagnostic: String,
    },

    /// Calibration fit failure (rank-deficient design or degenerate response).
    #[error("fit error: {0}")]
    Fit(String),

    /// Malformed or inconsistent input data.
    #[error("input error: {0}")]
    Input(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn numerical(message: impl Into<String>, diagnostic: impl Into<String>) -> Self {
        Error::Numerical {
            message: message.into(),
            diagnostic: diagnostic.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
