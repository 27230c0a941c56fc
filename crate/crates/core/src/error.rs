use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("particle index {index} out of range for {n} particles")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("empty particle subset")]
    EmptySubset,
    #[error("particle index {0} repeated in subset")]
    DuplicateIndex(usize),
    #[error("invalid system shape: {0}")]
    InvalidShape(String),
    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
    #[error("invalid subspace: {0}")]
    InvalidSubspace(String),
    #[error("zero matrix has no logarithm on its support")]
    ZeroMatrix,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("pattern mismatch: {0}")]
    PatternMismatch(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("no convergence after {iterations} iterations (best residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("not K-correlated: {0}")]
    NotKCorrelated(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no parent Hamiltonian found: {0}")]
    NoParentFound(String),
}

pub type Result<T> = std::result::Result<T, Error>;
