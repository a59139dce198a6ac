use nalgebra::Complex;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has no entries")]
    Empty,

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error(
        "eigendecomposition is ill-conditioned (min gap {min_gap:.3e}, basis condition {condition:.3e}, residual {residual:.3e})"
    )]
    IllConditioned {
        eigenvalues: Vec<Complex<f64>>,
        min_gap: f64,
        condition: f64,
        residual: f64,
    },

    #[error("entries overflow the floating-point range")]
    Overflow,

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("eigenvalues are repeated; perturb the matrix first")]
    RepeatedEigenvalues,

    #[error("eigenvalue {0} lies on the closed negative real axis")]
    NegativeRealEigenvalue(f64),

    #[error("could not separate eigenvalues after {attempts} perturbation attempts")]
    PerturbationFailed { attempts: usize },

    #[error("matrix is not a Z-matrix: off-diagonal ({row}, {col}) = {value}")]
    NotZMatrix { row: usize, col: usize, value: f64 },

    #[error("matrix is not stochastic: {0}")]
    NotStochastic(String),

    #[error("matrix is not nonnegative: entry ({row}, {col}) = {value}")]
    NotNonnegative { row: usize, col: usize, value: f64 },

    #[error("matrix is not monomial: {0}")]
    NotMonomial(String),

    #[error("index {index} out of range (limit {limit})")]
    OutOfRange { index: usize, limit: usize },

    #[error("exp(-Q) does not reconstruct B (relative residual {residual:.3e})")]
    NotAValidPair { residual: f64 },

    #[error("determinant is zero")]
    SingularDeterminant,

    #[error("generator has off-diagonal entry ({row}, {col}) = {value} that is not strictly positive")]
    OffDiagonalZeros { row: usize, col: usize, value: f64 },

    #[error("branch enumeration would visit {count} tuples (limit {limit})")]
    TooManyBranches { count: u64, limit: u64 },

    #[error("no inverse-M root found up to order {ceiling}")]
    RootSearchExhausted { ceiling: u64 },

    #[error("invalid tolerance configuration: {0}")]
    InvalidTolerance(&'static str),
}
