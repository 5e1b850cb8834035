use thiserror::Error;

/// Errors produced by the tissue channel toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("wavelength {lambda} nm is outside the validity domain [{lo}, {hi}] nm")]
    Domain { lambda: f64, lo: f64, hi: f64 },

    #[error("invalid wavelength {0} nm: must be finite and > 0")]
    InvalidWavelength(f64),

    #[error("invalid distance: {0}")]
    InvalidDistance(String),

    #[error("non-finite evaluation result for {model} at {lambda} nm")]
    NonFinite { model: String, lambda: f64 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("unknown constituent `{name}` (valid: {valid})")]
    UnknownConstituent { name: String, valid: String },

    #[error("unknown tissue preset `{name}` (valid: {valid})")]
    UnknownPreset { name: String, valid: String },

    #[error("invalid composition field `{field}`: {message}")]
    Composition { field: String, message: String },

    #[error("invalid band: {0}")]
    Band(String),

    #[error("invalid dataset: {0}")]
    Dataset(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid model spec: {0}")]
    Spec(String),

    #[error("ill-conditioned normal equations: {0}")]
    Conditioning(String),

    #[error("record error: {0}")]
    Record(String),
}

pub type Result<T> = std::result::Result<T, Error>;
