use thiserror::Error;

use crate::types::{IndexKind, ValueKind};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("position {position} out of bounds for length {length}")]
    OutOfBounds { position: usize, length: usize },

    #[error("extent {extent} exceeds the {kind} index range")]
    IndexOverflow { extent: usize, kind: IndexKind },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("value kind mismatch: expected {expected}, found {found}")]
    KindMismatch {
        expected: ValueKind,
        found: ValueKind,
    },

    #[error("index kind mismatch: expected {expected}, found {found}")]
    IndexKindMismatch {
        expected: IndexKind,
        found: IndexKind,
    },

    #[error("invalid container: {0}")]
    InvalidContainer(String),

    #[error("cannot convert to a full vector: {missing} positions have no entry and no fill value was given")]
    NotFull { missing: usize },

    #[error("operator arity mismatch: expected {expected}, found {found}")]
    Arity { expected: usize, found: usize },

    #[error("cannot parse operator `{source_text}`: {reason}")]
    OperatorParse { source_text: String, reason: String },

    #[error("kernel signature mismatch: kernel built for `{expected}`, tree has `{found}`")]
    SignatureMismatch { expected: String, found: String },

    #[error("invalid engine settings: {0}")]
    InvalidSettings(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
