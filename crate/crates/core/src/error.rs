use thiserror::Error;

use crate::kstruct::ConditionReport;

pub type Result<T> = std::result::Result<T, QsError>;

#[derive(Debug, Error)]
pub enum QsError {
    #[error("argument error: {0}")]
    Argument(String),

    #[error("capacity error: {0}")]
    Capacity(String),

    /// A structure failed its defining conditions where the operation requires
    /// them to hold. The report lists every residual.
    #[error("kind violation: {}", .0.summary())]
    KindViolation(Box<ConditionReport>),

    /// Raised when an invariant that should hold by construction is broken.
    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("schema violation: {0}")]
    Schema(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl QsError {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        QsError::Argument(msg.into())
    }

    pub(crate) fn capacity(msg: impl Into<String>) -> Self {
        QsError::Capacity(msg.into())
    }
}
