use thiserror::Error;

/// Errors produced by the regression library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    MalformedInput(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("enumeration limit exceeded: tree has {prunings} prunings (limit {limit})")]
    EnumerationLimit { prunings: u64, limit: u64 },

    #[error("node budget exceeded: {requested} nodes requested (budget {budget})")]
    NodeBudget { requested: usize, budget: usize },

    #[error("generator diverged: {0}")]
    Divergence(String),

    #[error("checkpoint parse error at line {line}: {msg}")]
    Checkpoint { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
