//! Thin eigendecomposition of matrices `αI + QBQᵀ + XXᵀ − YYᵀ` whose
//! low-rank part carries both positive and negative weights.
//!
//! The work is `O(m(n + nx + ny)²)` for an m×m matrix with an n-column basis
//! and `nx + ny` update vectors, against `O(m³)` for a dense solve. On top of
//! the decomposition sit a log-spectrum rank truncation and a streaming
//! metric learner that uses both.

pub mod dense;
mod error;
pub mod fast_eigh;
pub mod learner;
pub mod matrix;
pub mod oracle;
pub mod truncation;

pub use dense::{orthonormal_residual, symmetric_eig, thin_svd, SymEig, ThinSvd};
pub use error::{Error, Result};
pub use fast_eigh::{
    augment, dense_fallback, factor_to_eig, fast_eigh, svd_route, Augmented, EigenFactor,
    LowRankFactor, Sign, WeightedData,
};
pub use learner::{Label, LabeledBatch, MetricModel, UpdateConfig, UpdateReport};
pub use matrix::Matrix;
pub use truncation::{select_feasible_tau, select_tau, truncate, Spectrum, TruncationResult};
