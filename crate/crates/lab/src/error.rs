use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),

    #[error("cannot read config {path}: {source}")]
    ReadConfig { path: PathBuf, source: std::io::Error },

    #[error("malformed config {path}: {source}")]
    ParseConfig { path: PathBuf, source: serde_json::Error },

    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: csv::Error },

    #[error(transparent)]
    Core(#[from] bilayer_core::Error),

    #[error("{} numerical invariant(s) failed: {}", .0.len(), .0.join("; "))]
    Invariant(Vec<String>),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit status: 2 for failed numerical invariants, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Invariant(_) => 2,
            _ => 1,
        }
    }
}
