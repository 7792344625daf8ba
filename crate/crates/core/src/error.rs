use thiserror::Error;

use crate::penalty::PenaltyState;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum EcmoError {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    Dimension {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("unsupported operation: {0}")]
    Capability(String),

    #[error("non-finite value in {context} at index {index}")]
    NonFinite { context: &'static str, index: usize },

    #[error("solver diverged at iteration {iteration}")]
    Diverged {
        iteration: usize,
        last_state: Box<PenaltyState>,
    },

    #[error("unknown fixture `{name}`; available: {available}")]
    UnknownFixture { name: String, available: String },

    #[error("unsupported schema version {found} (expected {expected})")]
    Schema { found: u32, expected: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl EcmoError {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        EcmoError::Input(msg.into())
    }

    pub(crate) fn check_dim(context: &'static str, expected: usize, got: usize) -> Result<()> {
        if expected == got {
            Ok(())
        } else {
            Err(EcmoError::Dimension {
                context,
                expected,
                got,
            })
        }
    }
}

pub type Result<T> = std::result::Result<T, EcmoError>;
