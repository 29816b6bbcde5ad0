use std::path::PathBuf;

use revrank_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("config file {path}: {reason}")]
    Config { path: PathBuf, reason: String },

    #[error("{0}")]
    Usage(String),

    #[error("writing {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 0 success, 2 input error, 3 training degeneracy, 4 model mismatch.
    /// Failures to write outputs use 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => match e {
                CoreError::Degenerate(_) | CoreError::Singular => 3,
                CoreError::FeatureMismatch { .. } | CoreError::DimensionMismatch { .. } => 4,
                _ => 2,
            },
            CliError::Config { .. } | CliError::Usage(_) => 2,
            CliError::Output { .. } => 1,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
