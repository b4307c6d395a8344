use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used by the CLI and the C API to pick an exit/error code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed input, schema violation, misaligned ids, bad configuration.
    Data,
    /// Training divergence or an undefined/degenerate metric.
    Numerical,
    /// Filesystem failure.
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate document id {0:?}")]
    DuplicateId(String),

    #[error("line {line}: unknown vertical {value:?}")]
    UnknownVertical { line: usize, value: String },

    #[error("line {line}: missing or empty field `{field}`")]
    MissingField { line: usize, field: &'static str },

    #[error("id {0:?} expected but not present")]
    MissingId(String),

    #[error("id {0:?} is not part of the dataset")]
    UnknownId(String),

    #[error("dimension mismatch for {context}: expected {expected}, found {found}")]
    Dimension {
        context: String,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("training diverged in phase {phase} at epoch {epoch}: loss is {loss}")]
    Divergence { phase: String, epoch: usize, loss: f64 },

    #[error("{metric} is undefined: {reason}")]
    Undefined { metric: &'static str, reason: String },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Divergence { .. } | Error::Undefined { .. } | Error::Degenerate(_) => ErrorKind::Numerical,
            Error::Io { .. } => ErrorKind::Io,
            Error::Stage { source, .. } | Error::InFile { source, .. } => source.kind(),
            _ => ErrorKind::Data,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }
}
