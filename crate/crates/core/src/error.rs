use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),

    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),

    #[error("corrupt image: {0}")]
    CorruptImage(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("unsupported channel count {0} (expected 1 or 3)")]
    UnsupportedChannelCount(usize),

    #[error("expected {expected}-channel image, got {found}")]
    ChannelMismatch { expected: usize, found: usize },

    #[error("invalid image size {width}x{height} with {channels} channels for {len} samples")]
    InvalidBuffer {
        width: usize,
        height: usize,
        channels: usize,
        len: usize,
    },

    /// A parameter lies outside its valid domain. `field` names the parameter.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParams { field: &'static str, reason: String },

    #[error("dimension mismatch: {expected:?} vs {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("empty exposure sequence")]
    EmptySequence,

    #[error("{levels} pyramid levels need at least {needed}px on the short side, image is {width}x{height}")]
    TooManyLevels {
        levels: usize,
        needed: usize,
        width: usize,
        height: usize,
    },

    #[error("frame {index}: size changed from {expected:?} to {found:?}")]
    DimensionDrift {
        index: usize,
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("need at least 2 frames, got {0}")]
    TooFewFrames(usize),

    #[error("frame {index}: {source}")]
    Frame {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParams {
            field,
            reason: reason.into(),
        }
    }
}
