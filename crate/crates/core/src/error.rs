use std::path::PathBuf;

/// Errors produced anywhere in the clustering pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: line {line}: expected {expected} fields, found {found}")]
    RaggedRow {
        path: PathBuf,
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("{path}: line {line}, column {column}: cannot parse {value:?} as {what}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        value: String,
        what: &'static str,
    },

    #[error("{path}: line {line}, column {column}: non-finite value {value}")]
    NonFinite {
        path: PathBuf,
        line: usize,
        column: usize,
        value: f64,
    },

    #[error("empty dataset: {0}")]
    Empty(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("distance matrix entry ({row}, {col}) = {value}: {reason}")]
    InvalidDistance {
        row: usize,
        col: usize,
        value: f64,
        reason: &'static str,
    },

    #[error("cluster {cluster} collapsed at iteration {iteration}: column mass {mass:e}")]
    EmptyCluster {
        cluster: usize,
        iteration: usize,
        mass: f64,
    },

    #[error("non-finite {what} at iteration {iteration}, entry ({row}, {col})")]
    NonFiniteIterate {
        what: &'static str,
        iteration: usize,
        row: usize,
        col: usize,
    },

    #[error("zero membership mass in column {0}")]
    ZeroColumnMass(usize),

    #[error("report serialization failed: {0}")]
    Report(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Process exit code for this error: 1 for usage and validation
    /// problems, 2 for runtime and numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::EmptyCluster { .. } | Error::NonFiniteIterate { .. } | Error::Report(_) => 2,
            Error::Io { source, .. } if source.kind() != std::io::ErrorKind::NotFound => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
