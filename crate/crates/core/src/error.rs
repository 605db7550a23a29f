use std::io;

use thiserror::Error;

use crate::topology::NodeId;

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("cannot read topology {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("node {to} is unreachable from node {from}")]
    Unreachable { from: NodeId, to: NodeId },
    #[error("packet is already at its destination {0}")]
    AlreadyAtDestination(NodeId),
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("policy at node {node} chose {chosen}, which is not a neighbor")]
    InvalidAction { node: NodeId, chosen: NodeId },
    #[error("invalid simulation setup: {0}")]
    Setup(String),
    #[error("policy failure: {0}")]
    Policy(String),
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

#[derive(Debug, Error)]
pub enum NetError {
    #[error("shape mismatch: expected {expected}, got {actual} ({what})")]
    Shape {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("malformed parameter file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid value for `{key}`: {message}")]
    Value { key: String, message: String },
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

/// Top-level error for experiment protocols and the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("checkpoint mismatch: {0}")]
    Checkpoint(String),
    #[error("{0}")]
    Protocol(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
