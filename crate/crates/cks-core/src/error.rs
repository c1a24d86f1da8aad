//! Error type shared by every module of the crate.

use crate::graph::NodeId;
use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong across graph ingestion, search, and analysis.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unknown node label {0:?}")]
    UnknownLabel(String),

    #[error("node id {id} out of range (graph has {nodes} nodes)")]
    NodeOutOfRange { id: NodeId, nodes: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("node {0} has no incident edges; feature undefined")]
    IsolatedNode(NodeId),

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("value outside transform domain: {0}")]
    Domain(String),

    #[error("no {0}-{1} crossing edge; hyperedge weight undefined")]
    MissingHyperedge(&'static str, &'static str),

    #[error("index file rejected: {0}")]
    IndexFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
