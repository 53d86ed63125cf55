use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification of an [`Error`], used for process exit codes and
/// FFI status codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed csv: {0}")]
    Csv(String),

    #[error("malformed json in {context}: {message}")]
    Json { context: String, message: String },

    #[error("invalid codebook: {0}")]
    InvalidCodebook(String),

    #[error("header mismatch: missing columns [{}], unexpected columns [{}]", missing.join(", "), extra.join(", "))]
    HeaderMismatch {
        missing: Vec<String>,
        extra: Vec<String>,
    },

    #[error("value {value:?} out of range at row {row}, column {column}")]
    ValueOutOfRange {
        row: usize,
        column: String,
        value: String,
    },

    #[error("unknown item: {0}")]
    UnknownItem(String),

    #[error("unknown covariate: {0}")]
    UnknownCovariate(String),

    #[error("incomplete data: missing value at row {row}, column {column}")]
    IncompleteData { row: usize, column: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("difficulties of item {item} are not strictly increasing across categories")]
    MonotonicityViolation { item: usize },

    #[error("at least two groups are required, found {0}")]
    SingleGroup(usize),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("state space too large: {configurations} configurations exceeds cap {cap}")]
    TooLarge { configurations: f64, cap: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{role} input {} changed since the recorded run", path.display())]
    InputChanged { role: String, path: PathBuf },

    #[error("output {} already exists; pass --force to replace it", .0.display())]
    OutputExists(PathBuf),

    #[error("incompatible runs: item sets differ in [{}]", .0.join(", "))]
    IncompatibleRuns(Vec<String>),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(path)
        } else {
            Error::Io { path, source }
        }
    }

    pub fn json(context: impl Into<String>, err: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            message: err.to_string(),
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidConfig(_) | Error::OutputExists(_) => ErrorKind::Usage,
            Error::Numerical(_) | Error::Degenerate(_) => ErrorKind::Numerical,
            _ => ErrorKind::Data,
        }
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Csv(err.to_string())
    }
}
