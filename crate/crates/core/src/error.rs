use thiserror::Error;

use crate::conic::SolveStatus;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix not symmetric: max asymmetry {asymmetry:.3e} exceeds tolerance {tolerance:.3e}")]
    NotSymmetric { asymmetry: f64, tolerance: f64 },

    #[error("probability {0} outside the open interval (0, 1)")]
    ProbabilityDomain(f64),

    #[error("epsilon {epsilon} invalid for family {family}: {reason}")]
    InvalidEpsilon {
        epsilon: f64,
        family: &'static str,
        reason: &'static str,
    },

    #[error(
        "epsilon {epsilon} gives kappa {kappa:.6} <= 0 for the gaussian family; \
         the robust reformulation requires kappa > 0 (epsilon < 0.5)"
    )]
    KappaNotPositive { epsilon: f64, kappa: f64 },

    #[error("design is mechanism-unstable: stiffness matrix not positive definite for areas {design:?}")]
    MechanismUnstable { design: Vec<f64> },

    #[error("negative member area x[{index}] = {value:.6e}")]
    NegativeArea { index: usize, value: f64 },

    #[error(
        "robust budget infeasible before solving: constant terms alone reach {constant_total:.6e} \
         (gradient-mean term {mean_term:.6e}) against compliance bound {bound:.6e}"
    )]
    InfeasibleBudget {
        mean_term: f64,
        constant_total: f64,
        bound: f64,
    },

    #[error("conic solve ended with status {status:?}: {context}")]
    SolverFailure {
        status: SolveStatus,
        context: String,
    },

    #[error(
        "covariance sampler rejected {rejected} of {attempts} draws; \
         sigma_tilde with beta = {beta} leaves almost no positive definite realizations"
    )]
    SamplerRejection {
        rejected: usize,
        attempts: usize,
        beta: f64,
    },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid uncertainty description: {0}")]
    InvalidUncertainty(String),

    #[error("failed to read {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed json in {path}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
