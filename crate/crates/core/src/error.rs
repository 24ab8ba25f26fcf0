use thiserror::Error;

use crate::borel::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix is empty")]
    Empty,
    #[error("hermiticity violated: skew part {skew:e} exceeds tolerance {tolerance:e}")]
    HermiticityViolation { skew: f64, tolerance: f64 },
    #[error("eigensolver did not converge")]
    EigensolverFailure,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("state vector must be non-zero and finite")]
    ZeroVector,
    #[error("not a density matrix: {0}")]
    NotADensityMatrix(String),
    #[error("invalid spectral decomposition: {0}")]
    InvalidDecomposition(String),
    #[error("expression evaluation failed: {0}")]
    Evaluation(String),
    #[error("expression parse failed: {0}")]
    Parse(#[from] ParseError),
    #[error("hidden parameter {0} outside (0, 1)")]
    InvalidHiddenParameter(f64),
    #[error("complex argument must be non-zero")]
    ZeroInput,
    #[error("matrix is not an orthogonal projector (residual {residual:e})")]
    NotAProjector { residual: f64 },
    #[error("first moments are not a quadratic form (held-out residual {residual:e})")]
    NonQuadraticFirstMoment { residual: f64 },
    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),
    #[error("operators {first} and {second} do not commute (commutator norm {norm:e})")]
    NotCommuting { first: usize, second: usize, norm: f64 },
    #[error("joint eigenspaces could not be separated after {attempts} attempts")]
    DegeneracyResolutionFailure { attempts: usize },
    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("projector family is not pairwise orthogonal: {0}")]
    NotOrthogonalFamily(String),
    #[error("invalid sample count {0}")]
    InvalidSampleCount(usize),
    #[error("empty operator family")]
    EmptyFamily,
    #[error("malformed matrix JSON: {0}")]
    Json(String),
}
