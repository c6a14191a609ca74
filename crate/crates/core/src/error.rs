use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature order {order} cannot resolve excitation {n} (need order >= {required})")]
    QuadratureUnderResolved {
        order: usize,
        n: usize,
        required: usize,
    },

    #[error("states belong to different Gaussian families")]
    FamilyMismatch,

    #[error("grid spacing {spacing} exceeds a quarter of the ground width {limit}")]
    GridTooCoarse { spacing: f64, limit: f64 },

    #[error("operator is not Hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },

    #[error(
        "iterative solver did not converge after {iterations} iterations (residual {residual:e})"
    )]
    ConvergenceFailure { iterations: usize, residual: f64 },

    #[error("requested {requested} eigenpairs from an operator of dimension {dim}")]
    TooManyEigenpairs { requested: usize, dim: usize },

    #[error("on-shell momentum requested but g^(mu nu) P_mu P_nu = {0} is negative")]
    SpacelikeMomentum(f64),

    #[error("product basis dimension {dim} exceeds cap {cap}")]
    DimensionCapExceeded { dim: usize, cap: usize },

    #[error("closed-form spectra require a diagonal dispersion tensor")]
    NonDiagonalUnsupported,

    #[error("mass-shell residual {0:e} exceeds tolerance")]
    OffShell(f64),

    #[error("field takes exactly 5 coordinates, got {0}")]
    WrongArity(usize),

    #[error("not evaluable: {0}")]
    NotEvaluable(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
