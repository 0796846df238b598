//! Error types shared across the engine.

use thiserror::Error;

/// Engine-level errors.
#[derive(Debug, Error)]
pub enum Error {
    /// Two vectors (or a vector and an index) disagree on dimension.
    #[error("embedding dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// A top-k style request asked for zero results.
    #[error("requested result count must be positive")]
    ZeroK,

    /// Grounding was asked to score a response against nothing.
    #[error("grounding requires at least one retrieved document")]
    EmptyRetrieved,

    /// A retrieved document id has no text in the supplied mapping.
    #[error("no text available for retrieved document {id:?}")]
    MissingDocumentText { id: String },

    /// A document id is already present in the corpus or batch.
    #[error("duplicate document id {id:?}")]
    DuplicateDocument { id: String },

    /// The reserved `gen-` prefix was used for a seed document.
    #[error("seed document id {id:?} uses the reserved \"gen-\" prefix")]
    ReservedIdPrefix { id: String },

    /// A domain type invariant was violated at construction.
    #[error("invalid document: {reason}")]
    InvalidDocument { reason: String },

    /// A persisted file failed to parse.
    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Backend(#[from] BackendError),
}

/// Failures reported by embedder, NLI or generator backends.
#[derive(Debug, Error)]
pub enum BackendError {
    /// Transport-level failure (connection refused, timeout). Retryable.
    #[error("backend transport failure: {0}")]
    Transport(String),

    /// The server replied but the payload violates the wire contract. Fatal.
    #[error("malformed backend reply: {0}")]
    Malformed(String),
}

impl BackendError {
    /// Whether the failure class is worth retrying.
    pub fn is_retryable(&self) -> bool {
        matches!(self, BackendError::Transport(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub type BackendResult<T> = std::result::Result<T, BackendError>;
