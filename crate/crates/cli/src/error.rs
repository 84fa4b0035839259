use dipole_phase::EngineError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("malformed configuration: {0}")]
    Parse(String),

    #[error("configuration error at `{key}`: {message}")]
    Schema { key: String, message: String },

    #[error(transparent)]
    Engine(#[from] EngineError),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// Process exit code for an engine failure.
pub fn engine_exit_code(err: &EngineError) -> i32 {
    match err {
        EngineError::SingularityViolation { .. } => 3,
        EngineError::QuadratureNonConvergence { .. } | EngineError::BoundaryEvaluation { .. } => 2,
        EngineError::InvalidGeometry(_) | EngineError::InvalidConfig(_) | EngineError::ConfigNotApplicable(_) => 1,
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Engine(e) => engine_exit_code(e),
            _ => 1,
        }
    }
}
