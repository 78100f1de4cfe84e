use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot parse scenario file: {0}")]
    Parse(String),

    #[error("invalid {field}: {constraint}")]
    Config { field: String, constraint: String },

    #[error(transparent)]
    Core(#[from] hbgbc_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("plot: {0}")]
    Plot(String),
}
