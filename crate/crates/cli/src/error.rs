use srpat_core::Error as CoreError;

/// Failure of a CLI run, split by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags or out-of-range configuration (exit 1).
    #[error("{0}")]
    Validation(String),
    /// A check that should never fail did (exit 2).
    #[error("{0}")]
    Internal(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("csv error on {path}: {source}")]
    Csv { path: String, source: csv::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            _ => 2,
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io { path: path.as_ref().display().to_string(), source }
    }

    pub fn csv(path: impl AsRef<std::path::Path>, source: csv::Error) -> Self {
        CliError::Csv { path: path.as_ref().display().to_string(), source }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::VertexOutOfRange { .. }
            | CoreError::HorizonTooLarge { .. }
            | CoreError::InvalidConfig(_)
            | CoreError::InvalidShift(_)
            | CoreError::DegenerateWindow { .. }
            | CoreError::PathTooShort { .. } => CliError::Validation(e.to_string()),
            CoreError::WeightsNotMaintained
            | CoreError::IterationCap { .. }
            | CoreError::FixedPointTie { .. }
            | CoreError::ReconstructionResidual { .. }
            | CoreError::IterateEscaped { .. }
            | CoreError::StepTooLarge { .. } => CliError::Internal(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
