use thiserror::Error;

/// Harness failures, each mapped to a CLI exit code.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Verification(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] picnet::Error),
}

impl HarnessError {
    /// 1 for verification failures, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Verification(_) => 1,
            _ => 2,
        }
    }
}

impl From<serde_json::Error> for HarnessError {
    fn from(e: serde_json::Error) -> Self {
        HarnessError::Config(format!("json: {e}"))
    }
}

impl From<csv::Error> for HarnessError {
    fn from(e: csv::Error) -> Self {
        HarnessError::Config(format!("csv: {e}"))
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
