use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("rate {rate} on edge ({from}, {to}) is not strictly positive")]
    NonPositiveRate { from: usize, to: usize, rate: f64 },
    #[error("invalid edge ({from}, {to}): {reason}")]
    InvalidEdge {
        from: usize,
        to: usize,
        reason: &'static str,
    },
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("detailed balance fails on ({x}, {y}): mu(x)w(x,y) = {lhs}, mu(y)w(y,x) = {rhs}")]
    ReversibilityViolation { x: usize, y: usize, lhs: f64, rhs: f64 },
    #[error("support graph is disconnected ({components} components)")]
    Disconnected { components: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("eigensolver did not converge")]
    ConvergenceFailure,
    #[error("parameter {name} must be positive, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("graph has {n} vertices; exhaustive enumeration supports at most {max}")]
    GraphTooLarge { n: usize, max: usize },
    #[error("edge ({from}, {to}) used by the forest is not in the graph")]
    EdgeNotInGraph { from: usize, to: usize },
    #[error("kept set is empty")]
    EmptyKeptSet,
    #[error("kept set is the whole vertex set; nothing to coarsen")]
    FullKeptSet,
    #[error("vertex {0} is out of range or repeated in the subset")]
    InvalidSubset(usize),
    #[error("restricted generator block is singular")]
    SingularBlock,
    #[error("Neumann series did not reach tolerance within {terms} terms")]
    NotConverged { terms: usize },
    #[error("linear solve failed")]
    SolverFailure,
    #[error("Chebyshev degree {degree} too low: residual {residual:e} above {threshold:e}")]
    DegreeTooLow {
        degree: usize,
        residual: f64,
        threshold: f64,
    },
    #[error("graph has a single vertex")]
    DegenerateGraph,
    #[error("complement of the kept set is empty")]
    EmptyComplement,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("geometric graph with radius {radius} is disconnected")]
    RadiusDisconnected { radius: f64 },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable tag for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonPositiveRate { .. } => "NonPositiveRate",
            Error::InvalidEdge { .. } => "InvalidEdge",
            Error::InvalidMeasure(_) => "InvalidMeasure",
            Error::ReversibilityViolation { .. } => "ReversibilityViolation",
            Error::Disconnected { .. } => "Disconnected",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::ConvergenceFailure => "ConvergenceFailure",
            Error::NonPositiveParameter { .. } => "NonPositiveParameter",
            Error::InvalidParameter { .. } => "InvalidParameter",
            Error::GraphTooLarge { .. } => "GraphTooLarge",
            Error::EdgeNotInGraph { .. } => "EdgeNotInGraph",
            Error::EmptyKeptSet => "EmptyKeptSet",
            Error::FullKeptSet => "FullKeptSet",
            Error::InvalidSubset(_) => "InvalidSubset",
            Error::SingularBlock => "SingularBlock",
            Error::NotConverged { .. } => "NotConverged",
            Error::SolverFailure => "SolverFailure",
            Error::DegreeTooLow { .. } => "DegreeTooLow",
            Error::DegenerateGraph => "DegenerateGraph",
            Error::EmptyComplement => "EmptyComplement",
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::RadiusDisconnected { .. } => "RadiusDisconnected",
            Error::Parse { .. } => "Parse",
            Error::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
