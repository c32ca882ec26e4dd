use thiserror::Error;

/// Which recursion step produced a degenerate value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Convolution,
    Closure,
}

impl std::fmt::Display for Step {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Step::Convolution => "convolution off-diagonal step",
            Step::Closure => "closure off-diagonal step",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("requested size {requested} exceeds the {available} distinct nodes of the measure")]
    RankExceeded { requested: usize, available: usize },

    #[error("degenerate measure: {0}")]
    DegenerateMeasure(String),

    #[error("size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("index out of range: need entries up to index {needed}, matrix has size {size}")]
    IndexOutOfRange { needed: usize, size: usize },

    #[error("{step} degenerate at n={n}: b_{next}^2 = {value:e} is below the positivity threshold", next = .n + 1)]
    DegenerateStep { step: Step, n: usize, value: f64 },

    #[error("fixed-point iteration did not converge after {iterations} iterations (last distance {distance:e})")]
    NoConvergence { iterations: usize, distance: f64 },

    #[error("tridiagonal eigensolver did not converge for eigenvalue {index}")]
    EigenFailure { index: usize },

    #[error("invalid inverse target: {0}")]
    InvalidTarget(String),

    #[error("empty fit window")]
    EmptyWindow,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Variant name, for diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::RankExceeded { .. } => "RankExceeded",
            Error::DegenerateMeasure(_) => "DegenerateMeasure",
            Error::SizeMismatch { .. } => "SizeMismatch",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::DegenerateStep { .. } => "DegenerateStep",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::EigenFailure { .. } => "EigenFailure",
            Error::InvalidTarget(_) => "InvalidTarget",
            Error::EmptyWindow => "EmptyWindow",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::Parse { .. } => "ParseError",
            Error::Json(_) => "JsonError",
            Error::Io(_) => "IoError",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
