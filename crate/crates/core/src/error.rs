use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("operands live on different Hilbert spaces (n_max {left} vs {right})")]
    SpaceMismatch { left: usize, right: usize },

    #[error(
        "steady state is not unique: Liouvillian null space is degenerate (pivot {pivot:.3e})"
    )]
    AmbiguousSteadyState { pivot: f64 },

    #[error("steady-state residual {residual:.3e} exceeds tolerance {tolerance:.1e}")]
    Convergence { residual: f64, tolerance: f64 },

    #[error("state is not positive semidefinite: smallest eigenvalue {min_eigenvalue:.3e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("no detectable photons: conditional norm {norm:.3e}")]
    NoDetectablePhotons { norm: f64 },

    #[error("correlation undefined: mean photon number {mean_n:.3e} vanishes")]
    UndefinedCorrelation { mean_n: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
