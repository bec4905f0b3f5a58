use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("not Hermitian (residual {0:.3e})")]
    NotHermitian(f64),
    #[error("not positive semidefinite (smallest eigenvalue {0:.3e})")]
    NotPsd(f64),
    #[error("trace is {0}, expected 1")]
    NotUnitTrace(f64),
    #[error("eigen/SVD solver did not converge: {0}")]
    ConvergenceFailure(&'static str),
    #[error("argument outside the domain: {0}")]
    DomainError(String),
    #[error("monotone function is not normalized (f(1) = {0})")]
    NotNormalized(f64),
    #[error("rank deficient: {0}")]
    RankDeficient(String),
    #[error("Gram-Schmidt breakdown at seed {0}")]
    LinearDependence(usize),
    #[error("standard matrix residual {0:.3e} exceeds the discard tolerance")]
    ImagResidualTooLarge(f64),
    #[error("leading eigenvalue {0} is not 1")]
    LeadingEigenvalue(f64),
    #[error("coefficient {0} outside [0,1] beyond tolerance")]
    OutOfRange(f64),
    #[error("monotone function outside the required band: {0}")]
    BandViolation(String),
    #[error("not a CPTP map: {0}")]
    NotCptp(String),
    #[error("state is not a fixed point (residual {0:.3e})")]
    NotFixedPoint(f64),
    #[error("no unique fixed point (gap {0:.3e})")]
    NoUniqueFixedPoint(f64),
    #[error("support condition violated: {0}")]
    SupportViolation(String),
    #[error("not a probability distribution: {0}")]
    NotADistribution(String),
    #[error("invalid projectors: {0}")]
    InvalidProjectors(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
