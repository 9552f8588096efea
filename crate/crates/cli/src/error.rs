use std::path::PathBuf;

use dicke_grover::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("infeasible target: {0}")]
    Infeasible(CoreError),

    #[error("numerical failure: {0}")]
    Numerical(CoreError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 0 success, 1 I/O, 2 config, 3 infeasible target, 4 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Config(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::ExistenceViolated { .. }
            | CoreError::ParityInfeasible { .. }
            | CoreError::NoAdmissibleSeed { .. }
            | CoreError::TotalLoss => CliError::Infeasible(e),
            CoreError::QuadratureNonConvergence { .. } | CoreError::DegenerateFit(_) => CliError::Numerical(e),
            other => CliError::Config(other.to_string()),
        }
    }
}
