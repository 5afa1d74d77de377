//! Crate-wide error type.

use std::path::PathBuf;

/// Errors produced by the augmentation, data, search and evaluation modules.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("magnitude {0} out of range [0, 30]")]
    MagnitudeOutOfRange(i64),

    #[error("operation {op} has kind {actual}, expected {expected}")]
    KindMismatch {
        op: String,
        expected: String,
        actual: String,
    },

    #[error("raster data length {len} does not match {width}x{height}x{channels}")]
    RasterShape {
        width: u32,
        height: u32,
        channels: u32,
        len: usize,
    },

    #[error("unsupported channel count {0}, expected 1 or 3")]
    BadChannelCount(u32),

    #[error("image is {iw}x{ih} but mask is {mw}x{mh}")]
    DimensionMismatch { iw: u32, ih: u32, mw: u32, mh: u32 },

    #[error("unknown operation name `{0}`")]
    UnknownOp(String),

    #[error("invalid strategy config: {0}")]
    InvalidConfig(String),

    #[error("weight table needs at least two positive-weight operations")]
    DegenerateWeights,

    #[error("invalid search space or method pairing: {0}")]
    InvalidSearch(String),

    #[error("ledger {path}: corrupt line {line}: {reason}")]
    CorruptLedger {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("ledger {path}: trial ids not dense from 0 (found {found} at row {row})")]
    LedgerNotDense {
        path: PathBuf,
        row: usize,
        found: u64,
    },

    #[error("ledger has no successful trials")]
    EmptyLedger,

    #[error("empty split: {0}")]
    EmptySplit(String),

    #[error("dataset validation failed:\n{}", .0.join("\n"))]
    ManifestErrors(Vec<String>),

    #[error("no scored pixels (all labels are ignore_index)")]
    NoScoredPixels,

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("prediction contains label {label} >= class count {k}")]
    LabelOutOfRange { label: u8, k: usize },

    #[error("canvas {width}x{height} too small for requested shapes (min {min})")]
    CanvasTooSmall { width: u32, height: u32, min: u32 },

    #[error("external evaluator protocol failure: {0}")]
    Protocol(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Png {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }

    /// Coarse category used by callers that map errors to process exit codes.
    pub fn category(&self) -> ErrorCategory {
        use Error::*;
        match self {
            MagnitudeOutOfRange(_)
            | KindMismatch { .. }
            | UnknownOp(_)
            | InvalidConfig(_)
            | DegenerateWeights
            | InvalidSearch(_)
            | BadChannelCount(_) => ErrorCategory::Config,
            Protocol(_) => ErrorCategory::Protocol,
            _ => ErrorCategory::Data,
        }
    }
}

/// Error categories aligned with the CLI exit-code contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// Usage or configuration problem (exit 2).
    Config,
    /// Data, dataset or ledger problem (exit 3).
    Data,
    /// External evaluator protocol failure (exit 4).
    Protocol,
}

pub type Result<T> = std::result::Result<T, Error>;
