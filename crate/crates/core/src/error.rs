use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid AST document: {0}")]
    AstDocument(String),

    #[error("invalid item id {0:?}: must match [A-Za-z0-9_-]+")]
    InvalidItemId(String),

    #[error("duplicate item id {0:?}")]
    DuplicateItem(String),

    #[error("unknown item id {0:?}")]
    UnknownItem(String),

    #[error("{path}: {source}")]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid corpus: {0}")]
    Corpus(String),

    #[error("invalid performance data at line {line}: {message}")]
    Performance { line: usize, message: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("missing entries: {0}")]
    MissingEntries(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn in_file(self, path: impl Into<PathBuf>) -> Error {
        Error::InFile {
            path: path.into(),
            source: Box::new(self),
        }
    }

    /// Short machine-readable category, used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Syntax { .. } => "syntax",
            Error::AstDocument(_) => "ast-document",
            Error::InvalidItemId(_) => "item-id",
            Error::DuplicateItem(_) => "duplicate-item",
            Error::UnknownItem(_) => "unknown-item",
            Error::InFile { source, .. } => source.kind(),
            Error::Corpus(_) => "corpus",
            Error::Performance { .. } => "performance",
            Error::InvalidInput(_) => "invalid-input",
            Error::ShapeMismatch(_) => "shape-mismatch",
            Error::InsufficientData(_) => "insufficient-data",
            Error::MissingEntries(_) => "missing-entries",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}
