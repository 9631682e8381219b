//! CLI error kinds and their exit codes.
//!
//! 0 success, 2 config error, 3 guard violation (size/enumeration caps),
//! 4 numerical failure. Anything raised while loading or validating the
//! config file is a config error; during a run, core errors map by kind.

use std::fmt;

use bosonq_core::Error as CoreError;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Guard(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Guard(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }

    pub fn config(msg: impl fmt::Display) -> Self {
        CliError::Config(msg.to_string())
    }

    /// Map a core error raised during execution (not config validation).
    pub fn from_run(err: CoreError) -> Self {
        match &err {
            CoreError::SizeLimit { .. }
            | CoreError::OutcomeOverflow { .. }
            | CoreError::InvalidQuadrature(_) => CliError::Guard(err.to_string()),
            CoreError::NotUnitary { .. }
            | CoreError::NonFinite(_)
            | CoreError::AllZeroWeights => CliError::Numerical(err.to_string()),
            _ => CliError::Config(err.to_string()),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Guard(msg) => write!(f, "guard violation: {msg}"),
            CliError::Numerical(msg) => write!(f, "numerical failure: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}
