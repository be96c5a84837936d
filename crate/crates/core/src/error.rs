//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A constructor argument is outside its valid domain.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    /// Tensor or mask dimensions do not line up.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A 1-indexed timestep fell outside `[1, t_max]`.
    #[error("timestep {t} out of range [1, {t_max}]")]
    TimestepOutOfRange { t: usize, t_max: usize },

    /// An estimator was given no input tensors.
    #[error("empty dataset")]
    EmptyDataset,

    /// Covariance factorization failed even after ridge escalation.
    #[error("Cholesky factorization failed (ridge {ridge:e}); raise the ridge and re-estimate")]
    CholeskyFailure { ridge: f64 },

    /// A serialized file did not match its expected layout.
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}
