use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty set has no MinHash")]
    EmptySet,

    #[error("Jaccard undefined on two empty sets")]
    BothEmpty,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("estimator undefined at zero budget (B * p_star = 1)")]
    ZeroBudget,

    #[error("item {item} outside universe of size {universe}")]
    ItemOutOfRange { item: u32, universe: u32 },

    #[error("value {value} outside bucket range [0, {buckets})")]
    BucketOutOfRange { value: u32, buckets: u32 },

    #[error("universe of size {universe} cannot hold {needed} distinct items")]
    UniverseTooSmall { universe: u32, needed: u64 },

    #[error("only {eligible} eligible query points, {requested} requested")]
    NotEnoughQueries { eligible: usize, requested: usize },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
