use thiserror::Error;

/// Errors surfaced by graph construction, oracle sessions, and parameter
/// validation.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("malformed edge {edge:?}: {reason}")]
    MalformedEdge { edge: Vec<u32>, reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parameter domain empty: {0}")]
    EmptyDomain(String),

    #[error("no valid Q grid point for (beta, B) = ({beta}, {b})")]
    EmptyQGrid { beta: u64, b: u64 },

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;

impl CoreError {
    pub fn pre(msg: impl Into<String>) -> Self {
        CoreError::Precondition(msg.into())
    }
}
