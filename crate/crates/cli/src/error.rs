use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot parse config: {0}")]
    Parse(String),

    #[error("invalid config at `{path}`: {reason}")]
    Validation { path: String, reason: String },

    #[error("command `{command}` needs the `{section}` section in the config")]
    MissingSection { command: &'static str, section: &'static str },

    #[error("computation failed: {0}")]
    Compute(#[from] coexist_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn invalid(path: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Validation {
            path: path.into(),
            reason: reason.into(),
        }
    }

    /// Re-anchor a library invariant violation under a config section.
    pub fn from_core_validation(section: &str, err: coexist_core::Error, rename: &[(&str, &str)]) -> Self {
        match err {
            coexist_core::Error::InvalidParameter { field, reason } => {
                let leaf = field.rsplit('.').next().unwrap_or(&field).to_string();
                let leaf = rename
                    .iter()
                    .find(|(from, _)| *from == leaf)
                    .map_or(leaf.clone(), |(_, to)| to.to_string());
                CliError::invalid(format!("{section}.{leaf}"), reason)
            }
            other => CliError::invalid(section, other.to_string()),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 3,
            CliError::Validation { .. } => 4,
            CliError::Compute(_) => 5,
            CliError::MissingSection { .. } => 6,
            CliError::Io { .. } => 7,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
