//! Experiment runner: builds an algorithm × trial grid of campaigns, runs it
//! on a worker pool, and writes coverage curves, a summary, and a speedup
//! table.

pub mod config;
pub mod experiment;
pub mod format;
pub mod summary;
pub mod table;

pub use config::{parse_config, Args, ExperimentSpec};
pub use experiment::{run_experiment, Outcome};
pub use summary::Summary;
pub use table::emit_table;

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: String, reason: String },
    /// `--help` or `--version` output; not a failure.
    #[error("{0}")]
    Help(String),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Campaign(#[from] mabfuzz_core::Error),
}

impl CliError {
    pub(crate) fn invalid(key: &str, reason: impl ToString) -> Self {
        CliError::Invalid {
            key: key.to_string(),
            reason: reason.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }

    /// Process exit code: 2 for bad input, 1 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Help(_) => 0,
            CliError::Invalid { .. } | CliError::Usage(_) => 2,
            CliError::Io { .. } | CliError::Campaign(_) => 1,
        }
    }
}
