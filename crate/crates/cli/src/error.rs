use std::path::{Path, PathBuf};

use det3d_core::Error as CoreError;

/// Process exit codes.
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INPUT: u8 = 3;
pub const EXIT_INVARIANT: u8 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Input {
        path: PathBuf,
        #[source]
        source: CoreError,
    },
    #[error("{0}")]
    InputFormat(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Input { .. } | CliError::InputFormat(_) | CliError::Io { .. } => EXIT_INPUT,
            CliError::Invariant(_) => EXIT_INVARIANT,
        }
    }

    pub fn input(path: &Path, source: CoreError) -> Self {
        CliError::Input {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Classifies a core error raised while processing already-parsed data.
    pub fn from_core(err: CoreError) -> Self {
        match err {
            CoreError::InvalidParameter(_) | CoreError::InvalidVoxelSpec(_) => CliError::Usage(err.to_string()),
            CoreError::InvalidTransform(_) | CoreError::TiltedRotation { .. } | CoreError::InvalidPolygon(_) => {
                CliError::Invariant(err.to_string())
            }
            other => CliError::InputFormat(other.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
