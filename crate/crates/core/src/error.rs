use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("scenario id `{0}` is already registered")]
    DuplicateId(String),
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("action {action} out of range for an action space of {count}")]
    InvalidAction { action: usize, count: usize },
    #[error("step called on a terminal environment; reset first")]
    SteppedTerminalEnv,
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("target cell is unreachable")]
    Unreachable,
    #[error("insufficient gold: have {have}, need {need}")]
    InsufficientGold { have: u32, need: u32 },
    #[error("observation mode {0} is not supported by this environment")]
    UnsupportedMode(String),
    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch { expected: Vec<usize>, got: Vec<usize> },
    #[error("backward called without a cached forward pass")]
    NoForwardCache,
    #[error("unknown activation `{0}`")]
    UnknownActivation(String),
    #[error("invalid network spec: {0}")]
    InvalidSpec(String),
    #[error("training batch is empty")]
    EmptyBatch,
    #[error("replay buffer is empty")]
    EmptyBuffer,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
