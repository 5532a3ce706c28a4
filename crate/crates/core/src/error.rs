use thiserror::Error;

/// Physics-domain failures raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhysicsError {
    #[error("drive balance constraint violated: {0}")]
    ConstraintViolated(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("no steady state found: {0}")]
    NoSteadyState(String),
    #[error("operating point violates the sign convention: {0}")]
    SignConventionViolated(String),
    #[error("cavity amplitudes are not balanced: |alpha_1|={alpha_1}, |alpha_2|={alpha_2}")]
    UnbalancedAmplitudes { alpha_1: f64, alpha_2: f64 },
    #[error("degenerate response at omega={omega}: |Delta(omega)| vanishes")]
    DegenerateResponse { omega: f64 },
    #[error("value outside the domain of {what}: {value}")]
    DomainError { what: &'static str, value: f64 },
    #[error("singular drift matrix at omega={omega}")]
    SingularDrift { omega: f64 },
    #[error("state is not symmetric: block residual {residual} exceeds 5% of n={n}")]
    NotSymmetricState { n: f64, residual: f64 },
    #[error("integration did not converge: {0}")]
    NonConvergent(String),
    #[error("objective is not unimodal in the bracket [{lo}, {hi}]")]
    BracketError {
        lo: f64,
        hi: f64,
        /// Coarse scan of (d, peak EOF) that revealed the problem.
        scan: Vec<(f64, f64)>,
    },
}

impl PhysicsError {
    /// Short machine-readable tag used in the `flags` output column.
    pub fn code(&self) -> &'static str {
        match self {
            PhysicsError::ConstraintViolated(_) => "ConstraintViolated",
            PhysicsError::InvalidParams(_) => "InvalidParams",
            PhysicsError::NoSteadyState(_) => "NoSteadyState",
            PhysicsError::SignConventionViolated(_) => "SignConventionViolated",
            PhysicsError::UnbalancedAmplitudes { .. } => "UnbalancedAmplitudes",
            PhysicsError::DegenerateResponse { .. } => "DegenerateResponse",
            PhysicsError::DomainError { .. } => "DomainError",
            PhysicsError::SingularDrift { .. } => "SingularDrift",
            PhysicsError::NotSymmetricState { .. } => "NotSymmetricState",
            PhysicsError::NonConvergent(_) => "NonConvergent",
            PhysicsError::BracketError { .. } => "BracketError",
        }
    }
}

pub type Result<T> = std::result::Result<T, PhysicsError>;
