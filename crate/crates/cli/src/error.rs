//! Exit-code-aware error wrapper.

use std::fmt;

use sigleak_core::Error as CoreError;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or parameter domains (exit 2).
    Usage(String),
    /// Unreadable, missing, or malformed files (exit 3).
    Io(String),
    /// Numerical failure, e.g. a covariance that will not factorize (exit 4).
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn io(msg: impl Into<String>) -> Self {
        CliError::Io(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Io(msg) | CliError::Numeric(msg) => f.write_str(msg),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        match err {
            CoreError::CholeskyFailure { .. } => CliError::Numeric(err.to_string()),
            CoreError::Io(_) | CoreError::Format(_) => CliError::Io(err.to_string()),
            _ => CliError::Usage(err.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Io(err.to_string())
    }
}

/// Forces I/O classification regardless of the underlying variant; used when
/// reading user-supplied input files.
pub fn as_io<T>(result: sigleak_core::Result<T>, context: &str) -> Result<T, CliError> {
    result.map_err(|e| CliError::Io(format!("{context}: {e}")))
}
