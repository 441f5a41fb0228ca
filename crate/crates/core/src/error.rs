use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("observation matrix needs at least 2 rows, got {0}")]
    TooFewObservations(usize),

    #[error("observation matrix is ragged: row {row} has {found} values, expected {expected}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },

    #[error("column {column} is out of range ({columns} columns)")]
    ColumnOutOfRange { column: usize, columns: usize },

    #[error("column {column} has zero variance")]
    ZeroVariance { column: usize },

    #[error("singular matrix: pivot {pivot} is {value:e}")]
    SingularMatrix { pivot: usize, value: f64 },

    #[error("internal numeric error: {0}")]
    InternalNumeric(String),

    #[error("invalid sparsity k={k}: need 1 <= k <= {max}")]
    InvalidSparsity { k: usize, max: usize },

    #[error("no nonsingular subset of size {k} exists ({skipped} candidates were collinear)")]
    NoValidSubset { k: usize, skipped: u64 },

    #[error("unknown method `{0}`")]
    UnknownMethod(String),

    #[error("{pairs} (subset, responder) pairs exceed the limit of {limit}")]
    LimitExceeded { pairs: u128, limit: u64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("op counts differ between trials: {first:?} vs {other:?}")]
    NondeterministicCount {
        first: crate::OpTally,
        other: crate::OpTally,
    },
}
