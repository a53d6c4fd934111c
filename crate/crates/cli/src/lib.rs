//! Library side of the `colorgns` command-line driver: file formats,
//! session configuration and task dispatch.

pub mod config;
pub mod docs;
pub mod tasks;

use std::fmt;

/// Task failure, split by exit code: an input error (2) means the task
/// never ran; a failure (1) means it ran and a check or hypothesis failed.
#[derive(Clone, Debug, PartialEq)]
pub enum CliError {
    Input(String),
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Input(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Failed(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}
