use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{what}: block length {n} exceeds the configured cap of {cap}")]
    TooLarge {
        what: &'static str,
        n: usize,
        cap: usize,
    },

    #[error("block length must be even and at least 2, got {0}")]
    OddLength(usize),

    #[error("invalid bit string {0:?}: only '0' and '1' are allowed")]
    InvalidBits(String),

    #[error("input bit string must be non-empty")]
    EmptyInput,

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("invalid initial state {0:?}: expected 0 or 1")]
    InvalidState(String),

    #[error("invalid dyadic string {0:?}: expected \"a/2^e\" or \"0\"")]
    ParseDyadic(String),

    #[error("malformed matrix file: {0}")]
    MalformedMatrix(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("IFS map {index} cannot act on dyadic grids: {reason}")]
    NonGridMap { index: usize, reason: String },

    #[error("IFS map {index} is not a contraction in the xy-plane (norm {norm})")]
    NotContraction { index: usize, norm: f64 },

    #[error("IFS must contain at least one map")]
    EmptyIfs,

    #[error("IFS images overlap at grid cell (row {row}, col {col})")]
    Overlap { row: usize, col: usize },

    #[error("Blahut-Arimoto did not converge in {iterations} iterations (bracket {gap:e})")]
    NotConverged { iterations: usize, gap: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
