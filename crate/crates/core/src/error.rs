use thiserror::Error;

use crate::netgen::NodeId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("operation requires a network with augmented local links")]
    NotAugmented,

    #[error("unknown node {0}")]
    UnknownNode(NodeId),

    #[error("insufficient samples: got {got}, need at least {required}")]
    InsufficientSamples { got: u64, required: u64 },

    #[error("scheme `{scheme}` covers {got} distinct ring sizes, need at least {required}")]
    TooFewGridPoints {
        scheme: String,
        got: usize,
        required: usize,
    },

    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),

    #[error("malformed network dump, line {line}: {reason}")]
    Dump { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
