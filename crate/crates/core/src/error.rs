use thiserror::Error;

/// Errors raised by the numerical and geometric routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("singular division: divisor has no nonzero leading coefficient")]
    SingularDivision,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("out of scope: {0}")]
    Scope(String),
    #[error("pole: {0}")]
    Pole(String),
    #[error("fit quality: {0}")]
    FitQuality(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("extraction failure: {0}")]
    Extraction(String),
    #[error("resonance: {0}")]
    Resonance(String),
    #[error("differentiation unstable: {0}")]
    Differentiation(String),
    #[error("configuration error at `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("usage error: {0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;
