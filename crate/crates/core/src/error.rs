use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported dimension {0} (expected 1, 2 or 3)")]
    UnsupportedDim(usize),

    #[error("domain has no interior nodes")]
    EmptyDomain,

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("point {point:?} lies outside the closed bounding box")]
    OutOfDomain { point: Vec<f64> },

    #[error("step {step} at node {node} is not below the boundary distance {sigma}")]
    StepViolation { node: usize, step: f64, sigma: f64 },

    #[error("sample for node {node} (tap {tap}) left the closed domain at {point:?}")]
    SampleOutside {
        node: usize,
        tap: usize,
        point: Vec<f64>,
    },

    #[error("certification of {what} failed at node {node}: value {value} vs bound {bound}")]
    Certification {
        what: String,
        node: usize,
        value: f64,
        bound: f64,
    },

    #[error("precondition `{what}` violated at node {node} (margin {margin})")]
    Precondition {
        what: String,
        node: usize,
        margin: f64,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
