//! Reproducible pipeline commands on top of the `multipolar` library.
//!
//! Each command reads a [`RunConfig`], writes its artifacts into the output
//! directory together with a `config.txt` echo of the resolved settings,
//! and returns the metrics it wrote.

pub mod commands;
pub mod config;

pub use commands::{cmd_pathlen, cmd_regress, cmd_shuffle, cmd_simulate, cmd_synth, Metrics};
pub use config::RunConfig;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] multipolar::Error),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 1 for input and configuration problems, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
