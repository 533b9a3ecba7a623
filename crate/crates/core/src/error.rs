use std::path::PathBuf;

/// Crate-wide error type. Variants distinguish caller mistakes
/// (dimensions, arguments) from malformed data and degenerate inputs so the
/// CLI can map them onto exit codes.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed header in {path}: {reason}")]
    MalformedHeader { path: PathBuf, reason: String },

    #[error("payload length mismatch in {path}: expected {expected} bytes, found {found}")]
    PayloadLengthMismatch {
        path: PathBuf,
        expected: u64,
        found: u64,
    },

    #[error("unknown label code {code} at voxel {index}")]
    UnknownLabel { code: u8, index: usize },

    #[error("empty mask: {0}")]
    EmptyMask(String),

    #[error("mask splits into {count} connected components, expected one")]
    NotOneComponent { count: usize },

    #[error("mask is not a simple tube: {0}")]
    NonTubular(String),

    #[error("underdetermined fit: {points} points cannot support order {order}")]
    UnderdeterminedFit { points: usize, order: usize },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("measurement failed: {0}")]
    Measurement(String),

    #[error("statistics: {0}")]
    Statistics(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error on {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
