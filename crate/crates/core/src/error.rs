use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("operator is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("trace is {trace:.15} instead of 1")]
    TraceNotUnity { trace: f64 },

    #[error("state is not positive (minimum eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("quadrature did not converge: estimate {estimate:.6e}, error bound {error_bound:.3e}")]
    QuadratureNonConvergence { estimate: f64, error_bound: f64 },

    #[error("correlation has not decayed by tau = {tau_max:.3e} ps (|value| = {magnitude:.3e})")]
    NotDecayed { tau_max: f64, magnitude: f64 },

    #[error(
        "variational fixed point did not converge after {iterations} iterations \
         (residual {residual:.3e}, last Omega_r = {omega_r:.6e}, delta_r = {delta_r:.6e})"
    )]
    VariationalNonConvergence {
        iterations: usize,
        residual: f64,
        omega_r: f64,
        delta_r: f64,
    },

    #[error("Liouvillian kernel is not one-dimensional (singular values {smallest:.3e}, {second:.3e})")]
    DegenerateKernel { smallest: f64, second: f64 },

    #[error("time stepping exceeded {steps} steps (residual {residual:.3e})")]
    StepBudgetExceeded { steps: u64, residual: f64 },

    #[error("configuration error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
}

impl Error {
    /// Stable machine-readable code used in the sweep error column.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::NotHermitian { .. } => "not_hermitian",
            Error::TraceNotUnity { .. } => "trace_not_unity",
            Error::NotPositive { .. } => "positivity_violation",
            Error::QuadratureNonConvergence { .. } => "quadrature_nonconvergence",
            Error::NotDecayed { .. } => "correlation_not_decayed",
            Error::VariationalNonConvergence { .. } => "variational_nonconvergence",
            Error::DegenerateKernel { .. } => "degenerate_kernel",
            Error::StepBudgetExceeded { .. } => "step_budget_exceeded",
            Error::Config { .. } => "config",
            Error::UnknownPreset(_) => "unknown_preset",
        }
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
