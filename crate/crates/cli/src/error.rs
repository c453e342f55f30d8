//! Error classification for exit codes: 1 usage, 2 data/model,
//! 3 non-reproducibility detected in replay mode.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, bad values, inconsistent configuration.
    Usage(String),
    /// Unreadable or malformed data, model mismatches, decode failures.
    Data(String),
    /// A replay produced different bytes than the recorded artifact.
    Replay(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Replay(_) => 3,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Replay(m) => write!(f, "replay mismatch: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<nrldpc_core::Error> for CliError {
    fn from(e: nrldpc_core::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
