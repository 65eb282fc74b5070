//! Configuration, data I/O, metrics and the experiment drivers.

mod config;
mod experiments;
mod io;
mod metrics;
mod pipeline;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::error::AlignError;

pub use config::*;
pub use experiments::*;
pub use io::*;
pub use metrics::*;
pub use pipeline::*;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}, line {line}: {message}")]
    Parse { path: PathBuf, line: u64, message: String },
    #[error("no ready estimates for {method} in [{t_start}, {t_end}] s")]
    EmptyWindow { method: String, t_start: f64, t_end: f64 },
    #[error(transparent)]
    Align(#[from] AlignError),
}

impl HarnessError {
    pub(crate) fn config(key: &str, message: String) -> Self {
        Self::Config { key: key.to_string(), message }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io { path: path.to_path_buf(), source }
    }

    pub(crate) fn parse(path: &Path, line: u64, message: impl Into<String>) -> Self {
        Self::Parse { path: path.to_path_buf(), line, message: message.into() }
    }
}
