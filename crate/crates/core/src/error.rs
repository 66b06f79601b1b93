use thiserror::Error;

/// Errors raised by the numerical kernels, graph model, synthesis and simulation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("matrix exponential overflowed (norm {norm:.3e})")]
    NumericalOverflow { norm: f64 },

    #[error("eigenvalue iteration did not converge after {iterations} iterations")]
    EigenFailure { iterations: usize },

    #[error("Lyapunov equation is singular (eigenvalues of M sum to zero)")]
    LyapunovSingular,

    #[error("linear system is singular")]
    Singular,

    #[error("the pair (A, B) is not stabilizable: uncontrollable mode {re:+.6} {im:+.6}i")]
    NotStabilizable { re: f64, im: f64 },

    #[error("Riccati solver failed: {0}")]
    CareFailure(String),

    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("follower {node} is not reachable from the leader")]
    NotReachable { node: usize },

    #[error("grounded Laplacian is not a nonsingular M-matrix")]
    NotMMatrix,

    #[error("invalid switching signal: {0}")]
    InvalidSignal(String),

    #[error("invalid time {0}: must be non-negative")]
    InvalidTime(f64),

    #[error("diagonal scaling verification failed: min eigenvalue of DH + H^T D is {lambda_min:.3e}")]
    DConstructionFailure { lambda_min: f64 },

    #[error("diagonal scaling is not valid for topology {topology}: min eigenvalue of DH + H^T D is {lambda_min:.3e}")]
    InvalidScaling { topology: usize, lambda_min: f64 },

    #[error("no common diagonal scaling found (best min eigenvalue {best:.3e}); the search is incomplete, one may still exist")]
    CommonDNotFound { best: f64 },

    #[error("contraction infeasible: beta2 = {beta2} must satisfy 0 < beta2 < beta1 = {beta1} (h = {h})")]
    ContractionInfeasible { beta1: f64, beta2: f64, h: f64 },

    #[error("enumeration over {n} followers exceeds the cap of {cap}")]
    EnumerationTooLarge { n: usize, cap: usize },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("dense output is missing sampling instant t = {t}")]
    IncompleteTrace { t: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
