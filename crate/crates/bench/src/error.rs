use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("audit failed: {0}")]
    AuditFailed(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl BenchError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config(_) => 2,
            BenchError::Data(_) => 3,
            BenchError::AuditFailed(_) => 4,
            BenchError::Io(_) => 1,
        }
    }
}

impl From<idt::Error> for BenchError {
    fn from(e: idt::Error) -> Self {
        use idt::Error as E;
        match e {
            E::Config(_) | E::EnumerationLimit { .. } | E::NodeBudget { .. } => BenchError::Config(e.to_string()),
            _ => BenchError::Data(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, BenchError>;
