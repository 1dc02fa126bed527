use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, found `{text}`")]
    Syntax { line: usize, text: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("bad value `{value}` for `{key}`: {reason}")]
    Value {
        key: String,
        value: String,
        reason: &'static str,
    },
    #[error("line {line}: {inner}")]
    AtLine { line: usize, inner: Box<ConfigError> },
    #[error("`{key}`: {reason}")]
    Invalid { key: String, reason: String },
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl ConfigError {
    pub(crate) fn value(key: &str, value: &str, reason: &'static str) -> Self {
        ConfigError::Value {
            key: key.to_string(),
            value: value.to_string(),
            reason,
        }
    }

    pub(crate) fn at_line(self, line: usize) -> Self {
        match self {
            e @ (ConfigError::Syntax { .. } | ConfigError::AtLine { .. }) => e,
            e => ConfigError::AtLine { line, inner: Box::new(e) },
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("state diverged at t = {time}")]
    Diverged { time: f64 },
    #[error(transparent)]
    Core(esld_core::Error),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

impl From<esld_core::Error> for RunError {
    fn from(e: esld_core::Error) -> Self {
        match e {
            esld_core::Error::Diverged { time } => RunError::Diverged { time },
            e => RunError::Core(e),
        }
    }
}

impl RunError {
    /// Process exit code: 1 for bad configuration, 2 for divergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Diverged { .. } => 2,
            _ => 1,
        }
    }
}
