use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),
    #[error("spectrum has an empty right nullspace (n + k - d - 1 = 0)")]
    ZeroNullspace,
    #[error("face enumeration supports affine dimension at most 3, got {0}")]
    UnsupportedDimension(usize),
    #[error("expected a null basis with 2 columns, got {0}")]
    WrongColumnCount(usize),
    #[error("lambda lies on the hyperplane arrangement (row {row})")]
    HyperplaneHit { row: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("box {0:?} is degenerate")]
    DegenerateBox([f64; 4]),
    #[error("coefficient {index} is zero")]
    ZeroCoefficient { index: usize },
    #[error("reduced point ({x}, {y}) lies outside the chamber box")]
    OutsideBox { x: f64, y: f64 },
    #[error("reduced point ({x}, {y}) lies on the thickened contour")]
    OnContour { x: f64, y: f64 },
    #[error("spectrum is defective for this operation: d(A) = {d}, n = {n}")]
    DefectiveSpectrum { d: usize, n: usize },
    #[error("Gale systems with {0} unknowns are not supported")]
    UnsupportedJ(usize),
    #[error("invalid sign vector: {0}")]
    InvalidSign(String),
    #[error("component count did not stabilize up to radius {radius}")]
    NotStabilized { radius: f64 },
    #[error("chamber {chamber} of sign class {sigma} has inconsistent component counts {first} and {second}")]
    InconsistentChamber {
        sigma: String,
        chamber: usize,
        first: usize,
        second: usize,
    },
    #[error("{0}")]
    Precondition(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
