//! File formats, configuration and commands behind the `dsthin` binary.

use std::path::{Path, PathBuf};

pub mod commands;
pub mod config;
pub mod csvout;
pub mod dsfile;
pub mod report;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] dsthin_core::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io { path: path.to_path_buf(), source }
    }

    /// 1 configuration, 2 infeasible, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        use dsthin_core::Error as E;
        match self {
            Self::Config(_) | Self::Io { .. } => 1,
            Self::Core(E::Infeasible { .. }) => 2,
            Self::Core(
                E::Numeric(_) | E::FlatPattern | E::BeamNotResolved | E::EmptySidelobeRegion | E::NoVisibleSamples,
            ) => 3,
            Self::Core(_) => 1,
        }
    }
}
