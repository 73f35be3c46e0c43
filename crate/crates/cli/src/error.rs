use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes. Usage errors from argument parsing exit with 2 as well.
pub mod exit {
    pub const OK: u8 = 0;
    pub const FAILURE: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const INPUT: u8 = 3;
    pub const OUTPUT: u8 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("cannot read {path}: {source}")]
    Input {
        path: PathBuf,
        #[source]
        source: tubelet::Error,
    },

    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] tubelet::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self::Usage(msg.into())
    }

    pub fn input(path: impl Into<PathBuf>, source: impl Into<tubelet::Error>) -> Self {
        Self::Input { path: path.into(), source: source.into() }
    }

    pub fn output(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Output { path: path.into(), source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => exit::USAGE,
            Self::Core(tubelet::Error::InvalidParameter(_)) => exit::USAGE,
            Self::Input { .. } => exit::INPUT,
            Self::Output { .. } => exit::OUTPUT,
            Self::Core(_) => exit::FAILURE,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
