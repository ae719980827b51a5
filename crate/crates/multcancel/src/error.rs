use thiserror::Error;

/// Errors surfaced by grid construction, sampling, symbol evaluation and
/// the verification harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical error: non-finite value at lattice point {point:?}")]
    NonFinite { point: Vec<f64> },

    #[error("domain error: symbol singular at {point:?} ({what})")]
    SingularPoint { point: Vec<f64>, what: String },

    #[error("sampler error: {0}")]
    Sampler(String),

    #[error("grid error: {0}")]
    Grid(String),

    #[error("construction error: {0}")]
    Construction(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
