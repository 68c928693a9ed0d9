use serde::Serialize;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {message} (line {line}, column {column})")]
    Config { message: String, line: usize, column: usize },

    #[error("{field}: {message}")]
    Validation { field: String, message: String },

    #[error("override `{0}` is not of the form --path.to.field=value")]
    Override(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] bgc_core::BgcError),

    #[error("oracle failures in criteria {0:?}")]
    OracleFailure(Vec<u8>),
}

/// Machine-readable form printed on failure.
#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub error: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
}

impl CliError {
    /// 1 for anything wrong with the input or the run, 2 for oracle failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::OracleFailure(_) => 2,
            _ => 1,
        }
    }

    pub fn report(&self) -> ErrorReport {
        let (error, field, line, column) = match self {
            CliError::Config { line, column, .. } => ("config", None, Some(*line), Some(*column)),
            CliError::Validation { field, .. } => ("validation", Some(field.clone()), None, None),
            CliError::Override(_) => ("override", None, None, None),
            CliError::Io { .. } => ("io", None, None, None),
            CliError::Core(_) => ("computation", None, None, None),
            CliError::OracleFailure(_) => ("oracle", None, None, None),
        };
        ErrorReport { error, message: self.to_string(), field, line, column }
    }
}
