use thiserror::Error;

/// Failures reported by the decomposition routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("combined rank {rank} exceeds dimension {dim}; use the dense fallback")]
    RankExceedsDimension { rank: usize, dim: usize },

    #[error("{routine} did not converge after {sweeps} sweeps (residual {residual:e})")]
    NoConvergence {
        routine: &'static str,
        sweeps: usize,
        residual: f64,
    },

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("matrix is not symmetric (asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("columns are not orthonormal (deviation {0:e})")]
    NotOrthonormal(f64),

    #[error("eigenvalue {0:e} is not positive")]
    NonPositiveEigenvalue(f64),

    #[error("rank {k} must be smaller than dimension {m}")]
    InvalidRank { k: usize, m: usize },

    #[error("every truncation window keeps a position without an explicit eigenvector")]
    InfeasibleTruncation,

    #[error("dimension {m} exceeds dense bound {bound}")]
    TooLarge { m: usize, bound: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
