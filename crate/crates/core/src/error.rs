use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch in {op}: {detail}")]
    DimensionMismatch { op: &'static str, detail: String },

    #[error("{algorithm} did not converge for a {rows}x{cols} matrix after {sweeps} sweeps")]
    Convergence {
        algorithm: &'static str,
        rows: usize,
        cols: usize,
        sweeps: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("matrix has numerical rank {rank} < {cols} columns")]
    RankDeficient { rank: usize, cols: usize },

    #[error("degenerate basis: {0}")]
    DegenerateBasis(String),

    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),

    #[error("no unique sufficiently-near geodesic: top angle {top_angle} is within tolerance of pi/2")]
    NoUniqueGeodesic { top_angle: f64 },

    #[error("matrix is not bistochastic (worst deviation {worst:e})")]
    NotBistochastic { worst: f64 },

    #[error("matrix is not quasistochastic (worst absolute line sum {worst})")]
    NotQuasistochastic { worst: f64 },

    #[error("capability bound exceeded: {0}")]
    Capability(String),

    #[error("numerical consistency violated: {0}")]
    NumericalConsistency(String),

    #[error("invalid norm: {0}")]
    InvalidNorm(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("path must contain at least one subspace")]
    EmptyPath,
}
