use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read or write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },

    #[error("{file}:{line}: {msg}")]
    Parse { file: String, line: usize, msg: String },

    #[error("unknown vertex label `{0}` in edge file")]
    UnknownVertex(String),

    #[error("duplicate vertex label `{0}` in attribute table")]
    DuplicateVertex(String),

    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(String, String),

    #[error("self-loop on vertex `{0}`")]
    SelfLoop(String),

    #[error("attribute table row {row} has {got} fields, expected {expected}")]
    RaggedRow { row: usize, got: usize, expected: usize },

    #[error("vertex id {id} out of range (n = {n})")]
    VertexOutOfRange { id: usize, n: usize },

    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),

    #[error("attribute `{name}` is {actual}, selector needs {expected}")]
    KindMismatch {
        name: String,
        actual: &'static str,
        expected: &'static str,
    },

    #[error("attribute `{0}` is already constrained in this description")]
    AttributeAlreadyConstrained(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("fit did not converge after {iterations} sweeps: worst residual {residual:.3e} on {constraint}")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        constraint: String,
    },

    #[error("pattern has an empty pair set")]
    EmptyPairSet,

    #[error("description syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("search cancelled")]
    Cancelled,

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
