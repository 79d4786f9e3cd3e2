use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("trace is empty")]
    EmptyTrace,

    #[error("signature is empty: {0}")]
    EmptySignature(String),

    #[error("anchor set is empty")]
    NoAnchors,

    #[error("dimension {0} is missing from corpus statistics")]
    MissingDimension(u32),

    #[error("signature kind mismatch: {0} vs {1}")]
    KindMismatch(String, String),

    #[error("signature is not normalized")]
    NotNormalized,

    #[error("histogram mismatch: {0}")]
    HistogramMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("duplicate object id: {0}")]
    DuplicateId(String),

    #[error("object {0} is missing")]
    MissingObject(String),

    #[error("engine mismatch: {0}")]
    EngineMismatch(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("io error: {0}")]
    Io(#[from] io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
