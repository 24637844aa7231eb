use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Input { path: String, source: std::io::Error },
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error("model failed: {0}")]
    Model(spine::Error),
    #[error("generation failed: {0}")]
    Generation(spine::Error),
    #[error("cannot write {path}: {source}")]
    Output { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Input { .. } | CliError::Parse { .. } => 2,
            CliError::Model(_) => 3,
            CliError::Generation(_) => 4,
            CliError::Output { .. } => 1,
        }
    }
}

impl From<spine::Error> for CliError {
    fn from(e: spine::Error) -> Self {
        CliError::Model(e)
    }
}
