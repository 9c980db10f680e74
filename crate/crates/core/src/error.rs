use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("shape mismatch: expected {expected}x{expected}, got {found}x{found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("tolerance {0} is outside the admissible range")]
    InvalidTolerance(f64),

    /// Eigenvector matrix too ill-conditioned; the matrix is at or near an
    /// exceptional point. The Schur eigenvalues are still reported.
    #[error("defective matrix: eigenvector condition number {cond:e} exceeds the limit")]
    Defective {
        cond: f64,
        eigenvalues: Vec<Complex64>,
    },

    #[error("spectrum is not real (max |Im E| = {max_imag:e})")]
    ComplexSpectrum { max_imag: f64 },

    #[error("spectrum is degenerate (min gap {min_gap:e})")]
    DegenerateSpectrum { min_gap: f64 },

    #[error("weight {index} is not positive ({value})")]
    NonPositiveWeight { index: usize, value: f64 },

    #[error("expected {expected} weights, got {found}")]
    WeightCount { expected: usize, found: usize },

    #[error("observable constraints admit no positive weight vector")]
    NoPositiveSolution,

    #[error("observable constraints leave {nullity} free directions in the metric family")]
    Underdetermined { nullity: usize },

    #[error("observable constraints only admit the zero metric")]
    Inconsistent,

    #[error("beta = {0} is outside (-1, 1); metric would not be positive definite")]
    BetaOutOfRange(f64),

    #[error("observable has d = a and does not determine beta")]
    DegenerateObservable,

    #[error("matrix is not Hermitian (relative asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("metric is not quasi-Hermitian for the Hamiltonian (residual {residual:e})")]
    NotQuasiHermitian { residual: f64 },

    #[error("solvability violated at order {order} (kernel residual {residual:e})")]
    SolvabilityViolated { order: usize, residual: f64 },

    #[error("1 + lambda*Delta is numerically singular (condition number {cond:e})")]
    SingularResolvent { cond: f64 },

    #[error("bracket [{lo}, {hi}] does not straddle a reality transition")]
    InvalidBracket { lo: f64, hi: f64 },

    #[error("invalid parameter grid: {0}")]
    InvalidGrid(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),
}
