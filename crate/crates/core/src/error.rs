//! Crate-wide error type with process exit codes.

use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::eigen::EigenError;
use crate::eval::{ConfigError, EvalError};
use crate::matching::MatchError;
use crate::mesh::MeshError;
use crate::sparse::SolveError;
use crate::spectral::SpectralError;
use crate::wavelet::WaveletError;

/// Exit code for a bad command line, parameter or config.
pub const EXIT_USAGE: i32 = 1;
/// Exit code for unreadable or inconsistent input data.
pub const EXIT_DATA: i32 = 2;
/// Exit code for a numerical failure.
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Wavelet(#[from] WaveletError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Match(#[from] MatchError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

fn wavelet_code(e: &WaveletError) -> i32 {
    match e {
        WaveletError::InvalidParameter(_) => EXIT_USAGE,
        WaveletError::SampleOutOfRange { .. } => EXIT_DATA,
        WaveletError::DegenerateColumn { .. } | WaveletError::Solve(_) => EXIT_NUMERICAL,
    }
}

fn match_code(e: &MatchError) -> i32 {
    match e {
        MatchError::Singular { .. } => EXIT_NUMERICAL,
        MatchError::RegularizerSize { .. } => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

impl Error {
    /// Attaches `path` to an I/O error.
    pub fn file(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> Self {
        let path = path.into();
        move |source| Self::File { path, source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(ConfigError::Io(_)) => EXIT_DATA,
            Self::Usage(_) | Self::Config(_) => EXIT_USAGE,
            Self::Data(_) | Self::File { .. } | Self::Mesh(_) => EXIT_DATA,
            Self::Solve(_) => EXIT_NUMERICAL,
            Self::Eigen(e) => match e {
                EigenError::TooLarge { .. } | EigenError::TooMany { .. } => EXIT_USAGE,
                _ => EXIT_NUMERICAL,
            },
            Self::Wavelet(e) => wavelet_code(e),
            Self::Spectral(e) => match e {
                SpectralError::Dimension(_) => EXIT_DATA,
                SpectralError::BasisTooLarge { .. } | SpectralError::NoValidScales => EXIT_USAGE,
                SpectralError::Wavelet(w) => wavelet_code(w),
                SpectralError::Match(m) => match_code(m),
            },
            Self::Match(e) => match_code(e),
            Self::Eval(e) => match e {
                EvalError::BadThresholds { .. } => EXIT_USAGE,
                _ => EXIT_DATA,
            },
        }
    }
}
