use std::path::PathBuf;

use thiserror::Error;

/// Invalid or inconsistent experiment parameters.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("invalid parameter `{name}`: {reason}")]
    Invalid { name: &'static str, reason: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("unknown preset `{0}` (expected one of a..i)")]
    UnknownPreset(String),
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("{} configuration errors:\n  {}", .0.len(), .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n  "))]
    Many(Vec<ConfigError>),
}

impl ConfigError {
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        ConfigError::Invalid {
            name,
            reason: reason.into(),
        }
    }
}

/// Edge-list parse failures carry the offending (1-based) line number.
#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {reason}")]
    Line { line: usize, reason: String },
    #[error("missing `# nodes=<n>` header")]
    MissingHeader,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Failures while producing a results bundle.
#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot read {path}")]
    Input {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
