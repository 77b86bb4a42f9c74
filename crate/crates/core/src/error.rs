use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-differentiable point at xi = {xi} (band edge)")]
    NonDifferentiable { xi: f64 },

    #[error("quadrature did not converge: achieved error {achieved:e} above tolerance {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid sampling scheme: {0}")]
    InvalidScheme(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("wavelet construction failed: {reason} (achieved residual {residual:e})")]
    WaveletConstruction { reason: String, residual: f64 },

    #[error("covariance not positive semi-definite after maximal jitter; most negative eigenvalue {min_eigenvalue:e}")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error(
        "{n} points exceed the dense factorization limit {limit}; use the circulant or grid-conditional simulator"
    )]
    TooLarge { n: usize, limit: usize },

    #[error("horizon too short for rho = {rho}: T = {horizon} but at least {min_horizon} is required")]
    HorizonTooShort { horizon: f64, rho: f64, min_horizon: f64 },

    #[error("bandwidth too small: lambda_n = {lambda} <= cap {cap}; need tau_n > {min_tau}")]
    BandwidthTooSmall { lambda: f64, cap: f64, min_tau: f64 },

    #[error("grid too coarse: spacing {delta} gives phase {phase} per gap; need spacing <= {required_delta}")]
    GridTooCoarse {
        delta: f64,
        phase: f64,
        required_delta: f64,
    },

    #[error("scale too fine for sampling: lookup mismatch {mismatch} exceeds {limit}")]
    ScaleTooFine { mismatch: f64, limit: f64 },

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("ingest error at line {line}: {reason}")]
    Ingest { line: usize, reason: String },

    #[error("budget exceeded: {reason}; suggested: {suggestion}")]
    Budget { reason: String, suggestion: String },

    #[error("nothing to emit")]
    NothingToEmit,

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
