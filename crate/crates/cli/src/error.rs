use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read or write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config parse error: {0}")]
    Parse(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] slve_core::Error),

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),

    #[error("json output: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// `2` for anything detectable before computing, `1` otherwise.
    pub fn exit_code(&self) -> i32 {
        use slve_core::Error as E;
        match self {
            CliError::Parse(_) | CliError::Config(_) => 2,
            CliError::Core(
                E::InvalidParameter { .. } | E::InvalidStep { .. } | E::StepTooLarge { .. },
            ) => 2,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            2 => "config_error",
            _ => "error",
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
