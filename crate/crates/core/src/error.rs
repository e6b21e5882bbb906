use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice domain: {0}")]
    InvalidDomain(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("size mismatch: expected {expected}, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("SOPW bases require an even number of shifts L >= 2, got L = {0}")]
    OddShiftCount(usize),

    #[error("grid of {grid} points aliases frequencies up to {max_freq}; need at least {required} points")]
    Aliasing {
        grid: usize,
        max_freq: usize,
        required: usize,
    },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("singular operator: {0}")]
    SingularOperator(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
