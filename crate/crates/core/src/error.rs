use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the core toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("node index {index} out of range for graph with {num_nodes} nodes")]
    Index { index: usize, num_nodes: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid rank {0}")]
    InvalidRank(usize),

    #[error("temperature must be positive, got {0}")]
    InvalidTemperature(f64),

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("class {class} has only {available} labelled nodes, {required} shots requested")]
    InsufficientShots {
        class: usize,
        available: usize,
        required: usize,
    },

    #[error("invalid grouping: {0}")]
    InvalidGrouping(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("no source graph has any edges; nothing to pre-train on")]
    NoSignal,

    #[error("class {0} has no few-shot examples")]
    MissingClass(usize),

    #[error("subgraph {0} has no member nodes")]
    EmptySubgraph(usize),

    #[error("corrupt checkpoint: {0}")]
    CorruptCheckpoint(String),

    #[error("unsupported checkpoint version {found} (expected {expected})")]
    UnsupportedVersion { found: u32, expected: u32 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
