//! CLI error type carrying the process exit code.
//!
//! Two failure classes, per the output contract: configuration problems
//! (unparseable or invalid config, bad CLI values) exit with 2; data
//! problems (missing or corrupt run directories, statistics that cannot
//! be computed from what is on disk) exit with 3.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }
}

/// Library errors surfacing during a run are almost always reports about
/// the data (too few samples, degenerate statistics); configuration
/// validation is done eagerly at parse time, where errors are mapped to
/// [`CliError::Config`] explicitly.
impl From<skewsim::Error> for CliError {
    fn from(err: skewsim::Error) -> Self {
        CliError::Data(err.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Data(err.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
