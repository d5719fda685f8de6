//! Crate-wide error type.

use std::path::PathBuf;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in {path}: {msg}")]
    Csv { path: PathBuf, msg: String },

    #[error("invalid value at data row {row}, column '{column}': {msg}")]
    InvalidCell {
        row: usize,
        column: String,
        msg: String,
    },

    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("training diverged: epoch loss {loss:e} exceeds guard {limit:e}")]
    Diverged { loss: f64, limit: f64 },

    #[error("constant output: delta is zero at index {0}")]
    ConstantOutput(usize),

    #[error("unknown agent id {0}")]
    UnknownAgent(usize),

    #[error("cold window: {have} of {need} records buffered")]
    ColdWindow { have: usize, need: usize },

    #[error("no published snapshot")]
    NoSnapshot,

    #[error("bundle error in {path}: {msg}")]
    Bundle { path: PathBuf, msg: String },

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    /// True for errors caused by files, parsing, or configuration rather than
    /// by computation. CLI maps these to exit code 2, everything else to 1.
    pub fn is_environmental(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Csv { .. }
                | Error::InvalidCell { .. }
                | Error::Bundle { .. }
                | Error::Config(_)
        )
    }

    /// Short machine-parsable tag for the error category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Csv { .. } => "csv",
            Error::InvalidCell { .. } => "invalid_cell",
            Error::EmptyDataset(_) => "empty_dataset",
            Error::DimMismatch { .. } => "dim_mismatch",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Singular(_) => "singular",
            Error::Diverged { .. } => "diverged",
            Error::ConstantOutput(_) => "constant_output",
            Error::UnknownAgent(_) => "unknown_agent",
            Error::ColdWindow { .. } => "cold_window",
            Error::NoSnapshot => "no_snapshot",
            Error::Bundle { .. } => "bundle",
            Error::Config(_) => "config",
        }
    }
}
