use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LevelSequenceError {
    #[error("empty level sequence")]
    Empty,
    #[error("first depth must be 0, found {found}")]
    NonZeroRoot { found: usize },
    #[error("depth 0 at index {index}: only the root may sit at depth 0")]
    SecondRoot { index: usize },
    #[error("depth jumps from {previous} to {depth} at index {index}")]
    DepthJump {
        index: usize,
        depth: usize,
        previous: usize,
    },
    #[error("index {index}: `{token}` is not a non-negative integer")]
    BadToken { index: usize, token: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("a tree needs at least one node")]
    Empty,
    #[error("{nodes} nodes need {} edges, got {edges}", nodes - 1)]
    EdgeCount { nodes: usize, edges: usize },
    #[error("invalid edge ({u}, {v})")]
    BadEdge { u: usize, v: usize },
    #[error("edge list is not connected")]
    Disconnected,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabellingError {
    #[error("expected {expected} labels, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("labelling is not harmonious: {0}")]
    NotHarmonious(crate::verify::Violation),
}

/// Brute-force oracles only run on small inputs.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("oracle supports {min}..={max} nodes, got {n}")]
pub struct OracleRangeError {
    pub n: usize,
    pub min: usize,
    pub max: usize,
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("checkpoint {path} line {line}: {reason}")]
    CorruptCheckpoint { path: PathBuf, line: usize, reason: String },
    #[error("checkpoint {path} was written with {field} {found}, this run uses {expected}")]
    CheckpointMismatch {
        path: PathBuf,
        field: &'static str,
        found: String,
        expected: String,
    },
    #[error("invalid sweep range {min}..={max}")]
    BadRange { min: usize, max: usize },
    #[error("worker count must be at least 1")]
    NoWorkers,
    #[error("write failed: {0}")]
    Write(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected key=value")]
    Syntax { line: usize },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("bad value `{value}` for `{key}`")]
    BadValue { key: String, value: String },
    #[error("pipeline order must be a permutation of twostage,backtrack,tabu")]
    BadOrder,
}
