use thiserror::Error;

/// Errors raised by the solver library and the command-line frontend.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value violates an operation's precondition.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// A function was evaluated outside of its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// The time loop produced a non-finite state.
    #[error("integration blow-up at step {step}: {detail}")]
    Blowup { step: usize, detail: String },
    /// A configuration file is malformed or violates an invariant.
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn argument(msg: impl Into<String>) -> Error {
    Error::Argument(msg.into())
}
