use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the simulation and reconstruction pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("grid extent too small: {mass_outside:.3e} of the probability mass lies outside the grid")]
    ExtentTooSmall { mass_outside: f64 },

    #[error("marginal has negative density {value:.3e} beyond the clipping tolerance")]
    NegativeMarginal { value: f64 },

    #[error("insufficient amplification: G - G_sq = {margin:.3} < 1.5 (set `opa.allow_insufficient_gain = true` to proceed)")]
    InsufficientGain { margin: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("insufficient angular coverage: {0}")]
    InsufficientCoverage(String),

    #[error("grid is not normalized: integral {integral:.6}")]
    NotNormalized { integral: f64 },

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}:{line}: {reason}")]
    Parse { path: PathBuf, line: usize, reason: String },

    #[error("{path}: unsupported format version `{found}` (expected `{expected}`)")]
    Version {
        path: PathBuf,
        found: String,
        expected: String,
    },

    #[error("{path}: checksum mismatch (header {expected}, records {actual})")]
    Checksum {
        path: PathBuf,
        expected: String,
        actual: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by user-supplied configuration or arguments, as
    /// opposed to numerical or runtime failures.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. } | Error::Config(_) | Error::InsufficientGain { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
