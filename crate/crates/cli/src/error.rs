use std::path::PathBuf;

use crate::config::ConfigError;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),

    #[error("{0}")]
    Core(#[from] bipartite_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl CliError {
    /// Process exit status: 2 configuration, 3 numerics, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) if !e.is_numeric() && !matches!(e, bipartite_core::Error::NotOrthonormal { .. }) => 2,
            CliError::Core(_) => 3,
            CliError::Io { .. } | CliError::Csv { .. } => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            2 => "config",
            3 => "numeric",
            _ => "io",
        }
    }

    /// Single-line, machine-readable rendering for stderr.
    pub fn record(&self) -> String {
        let line = match self {
            CliError::Config(c) => c.line.map(|l| format!(" line={l}")).unwrap_or_default(),
            _ => String::new(),
        };
        let message = match self {
            CliError::Config(c) => c.message.clone(),
            other => other.to_string(),
        };
        format!(
            "error code={} kind={}{line} message={:?}",
            self.exit_code(),
            self.kind(),
            message
        )
    }
}
