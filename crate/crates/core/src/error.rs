//! Error type shared by every module of the crate.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("side length {0} is odd; every side of the torus must be even")]
    OddSideLength(usize),
    #[error("side length {0} is below 2")]
    SideTooSmall(usize),
    #[error("torus has no dimensions")]
    EmptyDims,
    #[error("a one-dimensional torus of side 2 is a multigraph")]
    DegenerateTorus,
    #[error("vertex index {0} is outside the torus")]
    VertexOutOfRange(usize),
    #[error("boundary set is empty")]
    EmptyBoundary,
    #[error("boundary values violate the parity rule at vertex {0}")]
    IllegalParity(usize),
    #[error("boundary condition admits no height function (conflict at vertex {0})")]
    InfeasibleBC(usize),
    #[error("boundary values must be non-positive")]
    PositiveBoundary,
    #[error("boundary condition does not carry fixed values")]
    NoFixedValues,
    #[error("search budget of {budget} nodes exceeded after {visited} nodes and {emitted} emitted functions")]
    BudgetExceeded { budget: u64, visited: u64, emitted: u64 },
    #[error("vertex {0} has no allowed value")]
    NoAllowedValue(usize),
    #[error("coupling from the past did not coalesce within {0} epochs")]
    CoalescenceBudgetExceeded(u32),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("dominating-set construction failed after {0} draws")]
    RetriesExhausted(usize),
    #[error("supplied cutset is not the level set of the function")]
    NotALevelSet,
    #[error("reconstruction does not validate")]
    Inconsistent,
    #[error("torus and boundary condition do not fit the linear layout")]
    NotLinearLayout,
    #[error("base vertex lies in the reflected peak")]
    BoundaryInPeak,
    #[error("column {0} is not a wall")]
    NotAWall(usize),
    #[error("walls have different heights")]
    HeightMismatch,
    #[error("no zero value on the wall sets of column {0}")]
    NoZeroOnColumn(usize),
    #[error("function does not live on a product with Z_2")]
    NotLifted,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
