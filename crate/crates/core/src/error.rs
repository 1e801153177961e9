use thiserror::Error;

pub type Result<T> = std::result::Result<T, ModeError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModeError {
    /// Argument outside the mathematical domain of a special function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Input data that cannot be used (non-finite values, empty input, ...).
    #[error("invalid data: {0}")]
    InvalidData(String),

    /// A user-supplied tuning parameter is out of range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The data are valid but the chosen method cannot run on them.
    #[error("{method}: {reason}")]
    Infeasible {
        method: &'static str,
        reason: String,
    },
}

impl ModeError {
    pub(crate) fn infeasible(method: &'static str, reason: impl Into<String>) -> Self {
        ModeError::Infeasible {
            method,
            reason: reason.into(),
        }
    }

    /// True for errors caused by the method/sample-size combination rather
    /// than malformed input.
    pub fn is_infeasible(&self) -> bool {
        matches!(self, ModeError::Infeasible { .. })
    }
}
