//! Library behind the `hibench` binary: config parsing and the pipeline
//! stages that the subcommands orchestrate.

pub mod config;
pub mod pipeline;

use std::fmt;

/// Errors carrying the exit-code contract: 1 for configuration problems,
/// 2 for dataset problems, 3 for anything that fails at run time.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Data(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Data(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    pub fn stage(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Data(_) => "data",
            CliError::Runtime(_) => "runtime",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) | CliError::Data(msg) | CliError::Runtime(msg) => {
                write!(f, "[{}] {}", self.stage(), msg)
            }
        }
    }
}

impl std::error::Error for CliError {}
