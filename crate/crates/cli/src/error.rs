use emotune::emotion::MatrixError;
use emotune::negotiation::transcript::TranscriptError;
use emotune::optimizer::{EvaluationError, OptimizerError};
use emotune::scenarios::ScenarioError;
use emotune_gateway::ChatError;

/// Every failure the CLI reports, grouped by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Infrastructure(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Infrastructure(_) => 3,
        }
    }

    pub fn io(what: &str, path: &std::path::Path, e: std::io::Error) -> Self {
        CliError::Usage(format!("cannot {what} {}: {e}", path.display()))
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Io { .. } | ScenarioError::Empty => CliError::Usage(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<MatrixError> for CliError {
    fn from(e: MatrixError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<TranscriptError> for CliError {
    fn from(e: TranscriptError) -> Self {
        match e {
            TranscriptError::Empty => CliError::Usage(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<EvaluationError> for CliError {
    fn from(e: EvaluationError) -> Self {
        match e {
            EvaluationError::EmptyBatch => CliError::Usage(e.to_string()),
            _ => CliError::Infrastructure(e.to_string()),
        }
    }
}

impl From<OptimizerError> for CliError {
    fn from(e: OptimizerError) -> Self {
        match e {
            OptimizerError::Config(_) => CliError::Usage(e.to_string()),
            OptimizerError::Matrix(_) => CliError::Validation(e.to_string()),
            OptimizerError::Evaluation { source, .. } => source.into(),
        }
    }
}

impl From<ChatError> for CliError {
    fn from(e: ChatError) -> Self {
        match e {
            ChatError::Config(_) => CliError::Usage(e.to_string()),
            _ => CliError::Infrastructure(e.to_string()),
        }
    }
}
