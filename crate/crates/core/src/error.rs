use std::path::PathBuf;

use thiserror::Error;

use crate::provider::ProviderError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("schema violation at `{field}`: {message}")]
    Schema { field: String, message: String },
    #[error("duplicate {kind} id '{id}'")]
    DuplicateId { kind: &'static str, id: String },
    #[error("unknown {kind} '{id}'")]
    UnknownId { kind: &'static str, id: String },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("stakeholder list has unapproved drafts: {0:?}")]
    Unapproved(Vec<String>),
    #[error("could not parse provider completion: {reason}")]
    Unparseable { reason: String, raw: String },
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error("cell ({stakeholder}, {variant}): missing clause `{slot}`")]
    MissingClause { stakeholder: String, variant: String, slot: &'static str },
    #[error("{} cell(s) failed: {}", .0.len(), summarize(.0))]
    Cells(Vec<CellFailure>),
    #[error("infeasible assignment: {0}")]
    Infeasible(String),
    #[error("response row {row}: {message}")]
    BadResponse { row: usize, message: String },
    #[error("completion '{0}' is rejected by quality checks and cannot be coded")]
    RejectedCompletion(String),
    #[error("taxonomy: {0}")]
    Taxonomy(String),
    #[error("no coded completions")]
    NothingCoded,
    #[error("unsupported schema_version {0}")]
    SchemaVersion(u32),
    #[error("project file {0} is locked by another writer")]
    Locked(PathBuf),
    #[error("{context}: {source}")]
    Stats { context: String, source: aha_stats::StatsError },
    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// One failed matrix cell, with the reason.
#[derive(Debug)]
pub struct CellFailure {
    pub stakeholder: String,
    pub variant: String,
    pub error: Box<Error>,
}

fn summarize(failures: &[CellFailure]) -> String {
    let mut parts: Vec<String> = failures
        .iter()
        .take(5)
        .map(|f| format!("({}, {}): {}", f.stakeholder, f.variant, f.error))
        .collect();
    if failures.len() > 5 {
        parts.push(format!("... and {} more", failures.len() - 5));
    }
    parts.join("; ")
}

impl Error {
    pub fn schema(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema { field: field.into(), message: message.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn stats(context: impl Into<String>, source: aha_stats::StatsError) -> Self {
        Error::Stats { context: context.into(), source }
    }

    /// True for errors caused by bad input rather than a fault in the tool.
    pub fn is_user_error(&self) -> bool {
        !matches!(self, Error::Io { source, .. } if source.kind() != std::io::ErrorKind::NotFound)
    }
}
