use thiserror::Error;

/// Errors raised across the estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("outcome {0} is not in the model's support")]
    OutcomeNotInSupport(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown model `{0}` (expected one of bt, thurstone, rao-kupper, davidson, clm4, cardinal)")]
    UnknownModel(String),
    #[error("{0} is not available for continuous outcome support")]
    UnsupportedForContinuousSupport(&'static str),
    #[error("invalid probability bounds: p={p}, q={q}")]
    InvalidProbability { p: f64, q: f64 },
    #[error("vertex {vertex} out of range for graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-comparison at vertex {0}")]
    SelfComparison(String),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unrecognized best-of-3 score `{0}`")]
    UnrecognizedScore(String),
    #[error("vertex {0} has no comparisons")]
    IsolatedVertex(usize),
    #[error("significance level must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error("degree must be positive")]
    ZeroDegree,
    #[error("comparison graph is disconnected")]
    DisconnectedGraph,
    #[error("spectral series does not converge: ‖A − P1‖₂ = {0} ≥ 1")]
    NonContractive(f64),
    #[error("no finite maximum-likelihood estimate at any grid point")]
    NoFiniteEstimate,
    #[error("empty input")]
    EmptyInput,
    #[error("invalid experiment configuration: {0}")]
    ConfigInvalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
