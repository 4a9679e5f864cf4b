use quiver_shuffle::Error as LibError;

/// Errors surfaced by the command-line tool, each with its own exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: malformed JSON: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error(transparent)]
    Lib(#[from] LibError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Json { .. } => 2,
            CliError::Io { .. } => 3,
            CliError::Lib(e) => match e {
                LibError::CapExceeded { .. } => 4,
                LibError::Degenerate(_) | LibError::SpecializationPole => 5,
                LibError::NotInShuffleAlgebra(_) | LibError::DivisionByZero | LibError::EvaluationPole | LibError::ZeroInput => 6,
                _ => 2,
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
