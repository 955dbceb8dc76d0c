//! Problem files, built-in examples and output writers for the `iproj`
//! command-line tool.

pub mod emit;
pub mod examples;
pub mod problem;
pub mod tables;

use std::path::PathBuf;

use thiserror::Error;

pub use emit::{emit, Summary};
pub use problem::{parse_problem, parse_str, LoadedProblem, ProblemFile};

/// Process exit codes.
pub mod exit {
    pub const CONVERGED: u8 = 0;
    pub const MAX_CYCLES: u8 = 2;
    pub const MONITOR_CAP: u8 = 3;
    pub const INPUT: u8 = 4;
    pub const NUMERIC: u8 = 5;
    pub const IO: u8 = 1;
}

#[derive(Debug, Error)]
pub enum CliError {
    /// A problem-file field is malformed; `path` locates it in the document.
    #[error("{path}: {message}")]
    Schema { path: String, message: String },

    #[error("{path}: {message}")]
    Table { path: PathBuf, message: String },

    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] iproj::Error),
}

impl CliError {
    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Schema {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Schema { .. } | CliError::Table { .. } | CliError::Read { .. } => exit::INPUT,
            CliError::Write { .. } => exit::IO,
            CliError::Core(e) if e.is_input_error() => exit::INPUT,
            CliError::Core(_) => exit::NUMERIC,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
