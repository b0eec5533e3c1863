//! Command-line driver for the multiphase Cahn-Hilliard solvers: run
//! configuration, raw field files, checkpoints and image export.

use std::path::{Path, PathBuf};

pub mod checkpoint;
pub mod config;
pub mod export;
pub mod rawfield;
pub mod runner;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] spectral_ch::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("raw field: {0}")]
    Raw(String),
    #[error("export: {0}")]
    Export(String),
}

impl CliError {
    pub fn io(path: impl AsRef<Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().to_path_buf(),
            source,
        }
    }

    /// True when the run stopped because the state blew up.
    pub fn is_divergence(&self) -> bool {
        matches!(self, CliError::Core(spectral_ch::Error::DivergenceDetected { .. }))
    }
}
