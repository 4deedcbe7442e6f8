use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors produced by the engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("sample too small: n = {n} must exceed k = {k}")]
    SampleTooSmall { n: usize, k: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("need >= {need} touched, got {got}")]
    TooFewTouched { need: usize, got: usize },

    #[error("no feature columns available")]
    NoFeatures,

    #[error("unknown item id `{0}`")]
    UnknownId(String),

    #[error("duplicate item id `{0}`")]
    DuplicateId(String),

    #[error("duplicate column name `{0}`")]
    DuplicateColumn(String),

    #[error("row count mismatch: manifest has {expected} items, features have {got} rows")]
    RowCountMismatch { expected: usize, got: usize },

    #[error("invalid coordinate for `{id}`: ({x}, {y})")]
    InvalidCoordinate { id: String, x: f64, y: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("parse error in {path}: {detail}")]
    Parse { path: PathBuf, detail: String },

    #[error("checksum mismatch for {0}")]
    ChecksumMismatch(String),

    #[error("workspace `{0}` not found")]
    NotFound(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
