use thiserror::Error;

use crate::family::SetMask;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A mask or element does not fit the family's universe.
    #[error("validation error: {mask} is not contained in universe {universe}")]
    Validation { mask: SetMask, universe: SetMask },

    #[error("validation error: universes differ ({left} vs {right})")]
    UniverseMismatch { left: SetMask, right: SetMask },

    #[error("capacity error: {0}")]
    Capacity(String),

    /// The input violates a documented precondition of the operation.
    #[error("input error: {0}")]
    Input(String),

    #[error("size error: {0}")]
    Size(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// A proven guarantee failed at runtime. Only reachable through a bug.
    #[error("internal-consistency failure: {0}")]
    Internal(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }

    /// Process exit code under the reporting contract.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Internal(_) => 3,
            _ => 1,
        }
    }
}
