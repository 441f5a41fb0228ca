use subsel_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at row {row}, column {column} ({name}): cannot read {value:?} as a number")]
    Parse {
        row: usize,
        column: usize,
        name: String,
        value: String,
    },

    #[error("row {row} has {found} fields, expected {expected}")]
    ArityMismatch {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value {value:?} at row {row}, column {column} ({name})")]
    NonFinite {
        row: usize,
        column: usize,
        name: String,
        value: String,
    },

    #[error("column {name} has zero variance")]
    ZeroVariance { name: String },

    #[error("bad configuration: {0}")]
    Config(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("cannot serialize report: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// Stable process exit code for each error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Csv(_) | CliError::Json(_) => 1,
            CliError::Parse { .. } => 3,
            CliError::ArityMismatch { .. } => 4,
            CliError::NonFinite { .. } => 5,
            CliError::ZeroVariance { .. } => 6,
            CliError::Config(_) => 11,
            CliError::Verification(_) => 9,
            CliError::Core(e) => match e {
                CoreError::ZeroVariance { .. } => 6,
                CoreError::InvalidSparsity { .. } => 7,
                CoreError::NoValidSubset { .. } => 8,
                CoreError::LimitExceeded { .. } => 10,
                CoreError::UnknownMethod(_) => 11,
                CoreError::NonFinite { .. } => 5,
                CoreError::SingularMatrix { .. } => 12,
                CoreError::InternalNumeric(_) | CoreError::NondeterministicCount { .. } => 13,
                CoreError::TooFewObservations(_)
                | CoreError::Ragged { .. }
                | CoreError::ColumnOutOfRange { .. }
                | CoreError::Dimension(_) => 11,
            },
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
