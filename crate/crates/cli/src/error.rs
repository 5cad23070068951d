use thiserror::Error;
use vclab_core::{BoundsError, LearnError, ResponseError, SchemaError, ShatterError};

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_INDETERMINATE: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed or inconsistent input; exit code 2.
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("invalid input: {0}")]
    Schema(#[from] SchemaError),
    /// A computation that could not be completed; exit code 1.
    #[error("{0}")]
    Failure(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) | CliError::Schema(_) | CliError::Io { .. } => EXIT_INVALID,
            CliError::Failure(_) => EXIT_FAILURE,
        }
    }
}

impl From<BoundsError> for CliError {
    fn from(e: BoundsError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<ShatterError> for CliError {
    fn from(e: ShatterError) -> Self {
        match e {
            ShatterError::Invalid(_)
            | ShatterError::PrecisionLimit { .. }
            | ShatterError::Response(ResponseError::Dimension(_)) => CliError::Invalid(e.to_string()),
            ShatterError::Response(ResponseError::Basis(_) | ResponseError::Params(_)) => {
                CliError::Invalid(e.to_string())
            }
            _ => CliError::Failure(e.to_string()),
        }
    }
}

impl From<ResponseError> for CliError {
    fn from(e: ResponseError) -> Self {
        match e {
            ResponseError::Integral(_) | ResponseError::Simulation(_) => CliError::Failure(e.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<LearnError> for CliError {
    fn from(e: LearnError) -> Self {
        match e {
            LearnError::Config(_) | LearnError::Bounds(_) => CliError::Invalid(e.to_string()),
            LearnError::Response(r) => r.into(),
        }
    }
}
