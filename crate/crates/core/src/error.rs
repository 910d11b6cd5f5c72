use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: expected 3 tab-separated fields, found {found}")]
    MalformedLine { path: PathBuf, line: usize, found: usize },

    #[error("{path}:{line}: relation `{relation}` is not in the vocabulary")]
    UnknownRelation {
        path: PathBuf,
        line: usize,
        relation: String,
    },

    #[error("{path}:{line}: duplicate triple ({head}, {relation}, {tail})")]
    DuplicateTriple {
        path: PathBuf,
        line: usize,
        head: String,
        relation: String,
        tail: String,
    },

    #[error("entity id {0} is not in the vocabulary")]
    UnknownEntity(u32),

    #[error("relation id {0} is not in the vocabulary")]
    UnknownRelationId(u32),

    #[error("not enough {class} links for the requested ratio: need {needed}, have {available}")]
    InsufficientLinks {
        class: &'static str,
        needed: usize,
        available: usize,
    },

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("shape mismatch in {op}: {detail}")]
    ShapeMismatch { op: &'static str, detail: String },

    #[error("non-finite value produced by {0}")]
    NonFinite(String),

    #[error("gradient trace is stale: parameters changed after it was recorded")]
    StaleTrace,

    #[error("unknown parameter slot `{0}`")]
    UnknownSlot(String),

    #[error("duplicate parameter slot `{0}`")]
    DuplicateSlot(String),

    #[error("checkpoint format error: {0}")]
    Checkpoint(String),

    #[error("entity has an empty relation-component table")]
    DegenerateEntity,

    #[error("relation-component operation not applicable: {0}")]
    InvalidTableOp(&'static str),

    #[error("could not sample a negative for ({0}, {1}, {2}) after {3} attempts")]
    NegativeSampling(u32, u32, u32, usize),

    #[error("subgraph endpoints must differ (both are entity {0})")]
    SameEndpoints(u32),

    #[error("label {label} out of range for hop budget {hops}")]
    LabelOutOfRange { label: i32, hops: usize },

    #[error("true answer missing from the candidate set")]
    MissingAnswer,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn shape(op: &'static str, detail: impl Into<String>) -> Self {
        Error::ShapeMismatch {
            op,
            detail: detail.into(),
        }
    }
}
