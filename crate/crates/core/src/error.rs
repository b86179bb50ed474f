use std::path::PathBuf;

/// Errors produced by the estimation library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("sample set is empty")]
    EmptySample,

    #[error("sample contains a non-finite increment at index {index}")]
    NonFiniteSample { index: usize },

    #[error("non-finite {what} at u = {u}")]
    NonFinite { what: &'static str, u: f64 },

    #[error("non-finite integrand value at x = {x}")]
    NonFiniteIntegrand { x: f64 },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Short machine-readable tag for the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidMeasure(_) => "invalid_measure",
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::EmptySample => "empty_sample",
            Error::NonFiniteSample { .. } => "non_finite_sample",
            Error::NonFinite { .. } => "non_finite",
            Error::NonFiniteIntegrand { .. } => "non_finite_integrand",
            Error::Io { .. } => "io",
            Error::Csv { .. } => "csv",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
