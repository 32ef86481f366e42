use thiserror::Error;

/// Crate-wide error type. `exit_code` groups variants into the process
/// exit classes used by the CLI: 2 malformed input files, 3 invalid
/// mathematical inputs, 4 I/O failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("invalid probability vector: {0}")]
    InvalidProbability(String),

    #[error("operands live on different outcome spaces ({left} vs {right})")]
    SpaceMismatch { left: String, right: String },

    #[error("operands mix exact and float numeric modes")]
    ModeMismatch,

    #[error("outcome space too large: |alphabet|^{block_len} exceeds {limit} words")]
    SpaceTooLarge { block_len: usize, limit: u64 },

    #[error("foreign symbol '{symbol}' at symbol position {position}")]
    ForeignSymbol { symbol: char, position: u64 },

    #[error("{path}: byte offset {offset}: {message}")]
    SequenceFile {
        path: String,
        offset: u64,
        message: String,
    },

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("payoff undefined: symbol '{symbol}' at step {step} has zero payoff probability")]
    PayoffUndefined { symbol: char, step: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code class for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::SequenceFile { .. } => 2,
            Error::Io(_) => 4,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
