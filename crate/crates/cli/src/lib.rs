//! Library side of the `qfeo` command-line tool: config files, run
//! manifests and the four subcommands.

pub mod config;
pub mod report;
pub mod run;
pub mod study;
pub mod synth;

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Exit status for configuration and missing-input errors.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for failures during computation.
pub const EXIT_RUNTIME: i32 = 1;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("missing input: {0}")]
    Input(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Input(_) => EXIT_CONFIG,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Where a command takes its configuration from.
#[derive(Clone, Debug)]
pub enum ConfigSource {
    File(PathBuf),
    Preset(String),
}

pub(crate) fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Deserializes with the failing field path in the error message.
pub(crate) fn from_value<T: DeserializeOwned>(value: serde_json::Value, origin: &str) -> CliResult<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        CliError::Config(format!("{origin}: {path}: {}", e.into_inner()))
    })
}

pub(crate) fn parse_json(text: &str, origin: &str) -> CliResult<serde_json::Value> {
    serde_json::from_str(text).map_err(|e| CliError::Config(format!("{origin}: {e}")))
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub(crate) fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

pub(crate) fn create_dir(path: &Path) -> CliResult<()> {
    std::fs::create_dir_all(path).map_err(|e| io_err(path, e))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| io_err(path, e))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

pub(crate) fn write_with<F>(path: &Path, f: F) -> CliResult<()>
where
    F: FnOnce(&mut Vec<u8>) -> qfeo_core::Result<()>,
{
    let mut buf = Vec::new();
    f(&mut buf).map_err(|e| io_err(path, e))?;
    std::fs::write(path, buf).map_err(|e| io_err(path, e))
}

/// True for names usable as a single path component.
pub(crate) fn is_safe_name(name: &str) -> bool {
    !name.is_empty()
        && name != "."
        && name != ".."
        && name.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
}
