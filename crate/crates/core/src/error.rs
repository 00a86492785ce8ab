use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the analysis kernels and their I/O surfaces.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {reason}")]
    UnreadableFile { path: PathBuf, reason: String },

    #[error("unsupported encoding in {path}: {reason}")]
    UnsupportedEncoding { path: PathBuf, reason: String },

    #[error("{0} contains no audio samples")]
    EmptyAudio(PathBuf),

    #[error("no files under {root} matched `{pattern}` with the requested indices")]
    NoMatches { root: PathBuf, pattern: String },

    #[error("annotation [{onset_s}, {offset_s}] s lies outside the {duration_s} s clip")]
    OutOfRangeAnnotation {
        onset_s: f64,
        offset_s: f64,
        duration_s: f64,
    },

    #[error("malformed annotation file {path} line {line}: {reason}")]
    BadAnnotation {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("clip has {len} samples but the transform needs at least {needed}")]
    ClipTooShort { len: usize, needed: usize },

    #[error("frequencies must be positive and finite (got {0})")]
    NonPositiveFrequency(f64),

    #[error("no live selection matches {0}")]
    UnknownSelection(String),

    #[error("peak {0} is already selected")]
    AlreadySelected(String),

    #[error("peak {0} was removed from candidacy")]
    PeakRemoved(String),

    #[error("requested {k} clips but the collection holds only {available}")]
    KTooLarge { k: usize, available: usize },

    #[error("image rendering failed: {0}")]
    RenderFailure(String),

    #[error("malformed export: {0}")]
    Import(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
