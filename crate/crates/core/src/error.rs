use thiserror::Error;

pub type Result<T> = std::result::Result<T, EngineError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    /// A line source was evaluated inside its exclusion core.
    #[error("point at cylindrical radius {rho:e} lies inside the core radius {core_radius:e}")]
    SingularityViolation { rho: f64, core_radius: f64 },

    /// A derivative was requested within `delta_edge` of a uniform block face.
    #[error("derivative requested {distance:e} from a uniform block face (edge tolerance {delta_edge:e})")]
    BoundaryEvaluation { distance: f64, delta_edge: f64 },

    #[error("adaptive quadrature did not converge on [{start}, {end}] within depth {max_depth}")]
    QuadratureNonConvergence { start: f64, end: f64, max_depth: u32 },

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("check not applicable: {0}")]
    ConfigNotApplicable(String),
}
