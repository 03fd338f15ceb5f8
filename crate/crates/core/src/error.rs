use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A model parameter violates a stochasticity constraint.
    #[error("invalid model: {what} (row {row}): {reason}")]
    InvalidModel {
        what: &'static str,
        row: usize,
        reason: String,
    },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("sequence too short: {length} symbols, need at least {required}")]
    SequenceTooShort { length: usize, required: usize },

    #[error("unknown symbol {symbol:?} at position {position}")]
    UnknownSymbol { symbol: char, position: usize },

    #[error("format error: {0}")]
    Format(String),

    /// A state was never exited in the data and the zero-row policy is `Error`.
    #[error("state {state} is never exited at coding position {phase}")]
    UnexitedState { state: String, phase: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn argument(msg: impl Into<String>) -> Error {
    Error::Argument(msg.into())
}
