//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller violated an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A tape primitive was evaluated outside its domain (division by zero,
    /// invalid power base, non-finite result from finite inputs).
    #[error("domain error at tape node {node}: {op}")]
    Domain { node: usize, op: &'static str },

    /// Requested an operation the engine does not support, e.g. second
    /// input derivatives through a relu-activated network.
    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// Training produced a non-finite loss or gradient.
    #[error("training diverged at epoch {epoch}")]
    Diverged { epoch: usize },

    /// A reference oracle failed to evaluate.
    #[error("oracle error: {0}")]
    Oracle(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}
