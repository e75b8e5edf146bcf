use std::path::PathBuf;

use thiserror::Error;

/// Every failure the library reports.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("weight {weight} on edge {from} -> {to} is outside (0, 1]")]
    InvalidWeight { from: String, to: String, weight: f64 },
    #[error("self-loop on {0}")]
    SelfLoop(String),
    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(String, String),
    #[error("duplicate identifier {0}")]
    DuplicateId(String),
    #[error("dangling reference: {0}")]
    DanglingReference(String),
    #[error("road network is disconnected ({components} components)")]
    Disconnected { components: usize },
    #[error("nonpositive frequency {freq} for check-in {user} -> {poi}")]
    NonPositiveFrequency { user: String, poi: String, freq: f64 },
    #[error("unknown user {0}")]
    UnknownUser(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("unknown poi {0}")]
    UnknownPoi(String),
    #[error("user {0} has no check-ins")]
    NoCheckins(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("instance too large for exhaustive search: {users} users within reach (limit {limit})")]
    InstanceTooLarge { users: usize, limit: usize },
    #[error("epoch mismatch: {expected} vs {found}")]
    EpochMismatch { expected: String, found: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
