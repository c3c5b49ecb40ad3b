use thiserror::Error;

use crate::gatekeeper::GateVerdict;
use crate::schema::Violation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("model validation failed: {}", summarize(.0))]
    Validation(Vec<Violation>),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("gate refused: subject classified as {} (failed: {})", .0.taxonomy, .0.failed_items.join(", "))]
    GateRefusal(Box<GateVerdict>),

    #[error("incomplete checklist: no answer for gate item `{0}`")]
    IncompleteChecklist(String),

    #[error("internal consistency error: {0}")]
    Consistency(String),

    #[error("assessments reference different models: {0}")]
    ModelMismatch(String),

    #[error("unknown model {id}@{version}")]
    UnknownModel { id: String, version: String },

    #[error("not found: {0}")]
    NotFound(String),

    #[error("workspace is locked by another writer: {0}")]
    LockHeld(String),

    #[error("storage error: {0}")]
    Storage(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable code, shared by the CLI and the HTTP service.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "ParseError",
            Error::Validation(_) => "ValidationError",
            Error::Domain(_) => "DomainError",
            Error::GateRefusal(_) => "GateRefusal",
            Error::IncompleteChecklist(_) => "IncompleteChecklist",
            Error::Consistency(_) => "ConsistencyError",
            Error::ModelMismatch(_) => "ModelMismatch",
            Error::UnknownModel { .. } => "UnknownModel",
            Error::NotFound(_) => "NotFound",
            Error::LockHeld(_) => "LockHeld",
            Error::Storage(_) => "StorageError",
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

fn summarize(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| format!("[{}] {}: {}", v.rule, v.path, v.message))
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
