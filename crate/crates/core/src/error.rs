use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension/corner pair (N={dim}, k={corner}): need N >= 2 and 0 <= k <= N")]
    InvalidDimension { dim: usize, corner: usize },

    #[error("lambda = {lambda} exceeds the Hardy constant {hardy} (supercritical, ill-posed)")]
    Supercritical { lambda: f64, hardy: f64 },

    #[error("point has {got} coordinates, expected {expected}")]
    PointDimension { expected: usize, got: usize },

    #[error("point lies outside the closed corner (coordinate {index} = {value} < 0)")]
    OutsideCorner { index: usize, value: f64 },

    #[error("ground function is singular at this point: {0}")]
    Singular(String),

    #[error("invalid radial grid: {0}")]
    InvalidGrid(String),

    #[error("discretization rejected: {0}")]
    Discretization(String),

    #[error("eigensolver failure: {0}")]
    Solver(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("ill-conditioned fit: {0}")]
    IllConditionedFit(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
