use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// The row-subsampled basis does not have full column rank.
    #[error("subsampled basis is rank deficient ({rows} sampled rows, {cols} basis vectors)")]
    RankDeficient { rows: usize, cols: usize },

    #[error("coherence is undefined for an empty basis")]
    EmptyBasis,

    #[error("vector is identically zero")]
    ZeroVector,

    #[error("non-finite entry at flat position {0}")]
    NonFinite(usize),

    #[error("index {index} out of range for dimension {bound}")]
    OutOfRange { index: usize, bound: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid instance specification: {0}")]
    InvalidSpec(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status for command-line front ends: `1` for run
    /// failures, `2` for bad input or configuration.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::RankDeficient { .. } | Error::Io(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
