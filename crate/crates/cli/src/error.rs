use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("numerical failure in {stage}: {source}")]
    Numerical {
        stage: String,
        #[source]
        source: weylstrip_core::Error,
    },
    #[error("cannot write report to {path}: {source}")]
    Output {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn numerical(stage: impl Into<String>, source: weylstrip_core::Error) -> Self {
        CliError::Numerical { stage: stage.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Numerical { .. } => 3,
            CliError::Output { .. } => 4,
        }
    }
}
