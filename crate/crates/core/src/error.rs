//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument violates a precondition (bad job id,
    /// overlapping higher/lower sets, incomplete priority relation, ...).
    #[error("invalid argument: {0}")]
    Argument(String),

    /// The requested bound mode does not apply to the instance (multi-resource
    /// pipeline with a single-resource mode, edge mode on a non-3-stage
    /// pipeline, OPA-incompatible mode inside an OPA loop).
    #[error("mode error: {0}")]
    Mode(String),

    /// Instance or config text could not be parsed.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// The workload generator exhausted its attempt budget without meeting a
    /// target; `target` names the constraint that could not be satisfied.
    #[error("generation infeasible after {attempts} attempts: cannot satisfy {target}")]
    Generation { target: String, attempts: u32 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Error {
        Error::Argument(msg.into())
    }

    pub(crate) fn mode(msg: impl Into<String>) -> Error {
        Error::Mode(msg.into())
    }
}
