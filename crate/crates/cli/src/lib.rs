//! The `arena` command-line tool: file formats and the command
//! implementations behind each verb.
//!
//! Commands produce a JSON document for stdout and a plain-text table for
//! stderr. Exit codes: 0 success, 1 failed check, 2 invalid input or
//! profile, 3 enumeration cap exceeded.

pub mod commands;
pub mod format;

use arena_core::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("invalid profile: {0}")]
    Profile(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_cap_exceeded() => 3,
            _ => 2,
        }
    }
}

/// What a command prints and how the process exits.
#[derive(Debug)]
pub struct Output {
    pub json: serde_json::Value,
    pub human: String,
    pub exit_code: i32,
}

/// Enumeration cap from `ARENA_MAX_PROFILES`, or the library default.
pub fn max_profiles_from_env() -> Result<u64, CliError> {
    match std::env::var("ARENA_MAX_PROFILES") {
        Ok(text) => text
            .trim()
            .parse()
            .map_err(|_| CliError::Input(format!("ARENA_MAX_PROFILES must be a positive integer, got `{text}`"))),
        Err(_) => Ok(arena_core::equilibrium::DEFAULT_MAX_PROFILES),
    }
}
