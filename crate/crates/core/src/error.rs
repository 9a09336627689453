//! Error types shared across the crate.

use std::io;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("weight {value} out of range [0, {max}]")]
    WeightOutOfRange { value: u32, max: u32 },

    #[error("probability numerator {value} out of range [0, 1024]")]
    NumeratorOutOfRange { value: u32 },

    #[error("divisor must be positive")]
    ZeroDivisor,

    #[error("receptive field {rf} exceeds source image side {side}")]
    ReceptiveFieldTooLarge { rf: usize, side: usize },

    #[error("{path}: bad magic number {found:#010x}, expected {expected:#010x}")]
    BadMagic {
        path: PathBuf,
        found: u32,
        expected: u32,
    },

    #[error("{path}: truncated at byte offset {offset}, {needed} more bytes needed")]
    Truncated {
        path: PathBuf,
        offset: usize,
        needed: usize,
    },

    #[error("record count mismatch: {images} images vs {labels} labels")]
    CountMismatch { images: usize, labels: usize },

    #[error("no occurrence {occurrence} of digit {digit} in the dataset")]
    OccurrenceOutOfRange { digit: u8, occurrence: usize },

    #[error("record {index} has label {found}, expected {expected}")]
    LabelMismatch {
        index: usize,
        found: u8,
        expected: u8,
    },

    #[error("cluster count {k} invalid for {n} patterns")]
    BadClusterCount { k: usize, n: usize },

    #[error("no assigned patterns to evaluate")]
    NoAssignedPatterns,

    #[error("no winners recorded")]
    NoWinners,

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("weight snapshot: {0}")]
    BadSnapshot(String),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
