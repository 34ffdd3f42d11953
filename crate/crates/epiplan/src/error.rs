//! Crate-wide error type.

use std::path::PathBuf;

/// Errors produced by simulation, memory, planning, and storage operations.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A configuration value failed validation.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// An unknown key appeared in a config file or `--set` override.
    #[error("unknown config key `{0}`")]
    UnknownConfigKey(String),

    /// Track generation could not produce a usable track.
    #[error("track generation failed: {0}")]
    TrackGeneration(String),

    /// A track failed a geometric validity check.
    #[error("invalid track: {0}")]
    InvalidTrack(String),

    /// `step` was called on an episode that already finished.
    #[error("episode is done; call reset before stepping again")]
    EpisodeDone,

    /// An encoding or parameter matrix had the wrong dimensions.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// An operation that needs data was given an empty collection.
    #[error("empty input: {0}")]
    EmptyInput(String),

    /// The planner was asked to evaluate against an empty memory.
    #[error("latent grid is empty; evaluation requires remembered trajectories")]
    EmptyGrid,

    /// A requested record or rank does not exist.
    #[error("not found: {0}")]
    NotFound(String),

    /// A file's version header did not match what this build writes.
    #[error("{}: unsupported format version `{found}` (expected `{expected}`)", path.display())]
    VersionMismatch {
        path: PathBuf,
        found: String,
        expected: String,
    },

    /// A file failed to parse; `line` is 1-based.
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// An underlying I/O failure, annotated with the path involved.
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
