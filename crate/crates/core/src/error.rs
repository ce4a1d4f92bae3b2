use thiserror::Error;

use crate::basis::TensorIndex;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the mathematical domain of a function.
    #[error("domain error in {func}: {reason}")]
    Domain { func: &'static str, reason: String },

    /// The truncated Fock space is too small for the requested quantity.
    #[error("truncation error: {what} needs cutoff N >= {required}, got N = {cutoff}")]
    Truncation {
        what: String,
        required: usize,
        cutoff: usize,
    },

    /// Truncation error raised while filling one entry of a table.
    #[error("at index {index}: {source}")]
    AtIndex {
        index: TensorIndex,
        #[source]
        source: Box<Error>,
    },

    /// A value violates a documented invariant (Hermiticity, trace, positivity, ...).
    #[error("validation failed ({invariant}): {detail}")]
    Validation {
        invariant: &'static str,
        detail: String,
    },

    #[error("cutoff mismatch: {0} != {1}")]
    CutoffMismatch(usize, usize),

    #[error("ill-conditioned system: {0}")]
    Conditioning(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid tensor index (k2 = {k2}, q2 = {q2})")]
    InvalidIndex { k2: u32, q2: i32 },

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(func: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            func,
            reason: reason.into(),
        }
    }

    pub(crate) fn truncation(what: impl Into<String>, required: usize, cutoff: usize) -> Self {
        Error::Truncation {
            what: what.into(),
            required,
            cutoff,
        }
    }

    pub(crate) fn validation(invariant: &'static str, detail: impl Into<String>) -> Self {
        Error::Validation {
            invariant,
            detail: detail.into(),
        }
    }

    pub(crate) fn at(self, index: TensorIndex) -> Self {
        Error::AtIndex {
            index,
            source: Box::new(self),
        }
    }
}
