use thiserror::Error;

/// Errors raised by matrix construction and the matrix-level operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("matrix is not skew-symmetrizable: {0}")]
    NotSkewSymmetrizable(String),
    #[error("cannot mutate at index {index}: only indices 1..={mutable} are mutable")]
    FrozenMutation { index: usize, mutable: usize },
    #[error("index subset is empty")]
    EmptySubset,
    #[error("index {index} out of range for a matrix of size {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("index {0} appears more than once in the subset")]
    DuplicateIndex(usize),
    #[error("an exchange matrix needs at least one mutable index")]
    NoMutableIndex,
    #[error("matrix shape mismatch: expected {expected} entries, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("entry overflow while mutating at index {0}")]
    EntryOverflow(usize),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Errors raised by set operations on a universe.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopologyError {
    /// An UNKNOWN embedding verdict could change the answer.
    #[error("unresolved relation: whether class #{lower} embeds into class #{upper} is UNKNOWN under the universe budget")]
    UnresolvedRelation { lower: usize, upper: usize },
    #[error("class index {index} is not in a universe of {size} classes")]
    NotInUniverse { index: usize, size: usize },
    #[error("class set belongs to a universe of {got} classes, expected {expected}")]
    UniverseMismatch { expected: usize, got: usize },
}

/// Errors raised by the persistent cache.
#[derive(Debug, Error)]
pub enum StoreError {
    #[error("corrupt cache record at line {line}: {reason}")]
    CorruptRecord { line: usize, reason: String },
    #[error("cache {0} is locked by another writer (remove the .lock file if no writer is running)")]
    Locked(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = MatrixError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid budget: {0}")]
pub struct BudgetError(pub String);
