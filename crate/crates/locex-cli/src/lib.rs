//! Command layer for locally exchangeable data analysis: typed CSV
//! ingestion, plain-text configuration, and the estimate / test / design /
//! estimate-premetric / simulate / validate-premetric commands.
//!
//! Every command is a pure function of its input files, configuration, and
//! seed: rerunning with the same inputs reproduces byte-identical output.
//! Reports are JSON documents with sorted keys; tabular side outputs are
//! plain CSV.

pub mod commands;
pub mod ingest;
pub mod manifest;
pub mod schema;

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path} is missing required column {column:?}")]
    MissingColumn { path: PathBuf, column: String },

    #[error("{path}:{line}: column {column:?} has unparseable value {value:?} ({expected})")]
    Parse { path: PathBuf, line: u64, column: String, value: String, expected: &'static str },

    #[error("{path} contains no data rows")]
    EmptyData { path: PathBuf },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("invalid arguments: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Core(#[from] locex::Error),

    #[error("cannot serialize report: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;
