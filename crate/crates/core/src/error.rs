use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {key}: {reason}")]
    Config { key: &'static str, reason: String },

    #[error("coverage universe mismatch: ledger has {expected} points, set has {found}")]
    UniverseMismatch { expected: usize, found: usize },

    #[error("reward must be a nonnegative finite number, got {0}")]
    InvalidReward(f64),

    #[error("global-new coverage is not a subset of local-new coverage")]
    InconsistentCoverage,

    #[error("reports are not comparable: {0}")]
    IncomparableReports(String),
}

impl Error {
    pub(crate) fn config(key: &'static str, reason: impl Into<String>) -> Self {
        Error::Config {
            key,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
