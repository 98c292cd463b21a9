use thiserror::Error;

/// Errors produced by the bias-measurement library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("RB undefined on prior-null value")]
    PriorNull,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("impossible data: prior predictive mass is zero at x index {0}")]
    ImpossibleData(usize),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error(
        "rejection sampler exceeded {cap} iterations at psi = {psi}; \
         use an importance-sampling fallback for values this far into the prior tail"
    )]
    RejectionCap { cap: u64, psi: f64 },

    #[error("monte carlo failure at chunk {chunk}, replicate {replicate}: {source}")]
    Mc {
        chunk: u64,
        replicate: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("csv error at line {line}: {msg}")]
    Csv { line: usize, msg: String },

    #[error("numeric error: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
