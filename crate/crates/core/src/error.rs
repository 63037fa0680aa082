use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The Bogoliubov phase is undefined where the gap closes.
    #[error("gap closes at B = {field}, k = {momentum} (epsilon = {epsilon:e})")]
    DegeneratePoint {
        field: f64,
        momentum: f64,
        epsilon: f64,
    },

    #[error("quadrature did not converge: error estimate {estimate:e} exceeds tolerance {tol:e}")]
    QuadratureNonConvergence { estimate: f64, tol: f64 },

    #[error("imaginary residual {residual:e} of a real-valued integral exceeds tolerance {tol:e}")]
    ImaginaryResidual { residual: f64, tol: f64 },

    #[error("contraction window [-{available}, {available}] does not cover offset {needed}")]
    WindowTooSmall { needed: i64, available: i64 },

    #[error("separation R = {0} must be even and at least 2")]
    OddSeparation(i64),

    #[error("eigensolver failure: {0}")]
    Eigensolver(String),

    #[error("chain of {sites} sites exceeds the exact-diagonalization limit of {limit}")]
    SizeGuard { sites: usize, limit: usize },

    #[error("density operator is not physical: minimum eigenvalue {min_eigenvalue:e}")]
    Physicality { min_eigenvalue: f64 },

    #[error("fit needs at least {needed} usable points, found {found}")]
    InsufficientPoints { found: usize, needed: usize },

    #[error("data does not decay (fitted log-slope {slope})")]
    NonDecaying { slope: f64 },

    #[error("bracket [{lo}, {hi}] does not enclose an entanglement onset")]
    BracketInvalid { lo: f64, hi: f64 },
}
