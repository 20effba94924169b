use std::io;

/// Failures surfaced by the command-line driver.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] oddseq_core::Error),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    /// A mandatory verification check did not pass.
    #[error("check failure: {0}")]
    CheckFailed(String),
}

impl CliError {
    /// 1 check failure, 2 usage, 3 resource.
    pub fn exit_code(&self) -> i32 {
        use oddseq_core::Error as E;
        match self {
            CliError::Usage(_) | CliError::Core(E::Usage(_) | E::Domain(_) | E::Boundary(_)) => 2,
            CliError::Core(E::Resource(_)) | CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => 3,
            CliError::Core(E::Structural(_)) | CliError::CheckFailed(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
