//! Tridiagonal and small dense linear algebra.

// The kernels index several arrays in step; iterator forms read worse.
#![allow(clippy::needless_range_loop)]

mod dense;
mod eigen;
mod norms;
mod tridiagonal;

use num_complex::Complex64;
use thiserror::Error;

pub use dense::{dense_solve, DenseLu, DenseMatrix, DenseSolution};
pub use eigen::eigenvalues_dense;
pub use norms::{
    lanczos_largest, min_singular_value, min_singular_value_dense, spectral_norm,
    spectral_norm_tridiagonal, POWER_ITERATION_CAP,
};
pub use tridiagonal::{thomas_solve, TridiagonalLu, TridiagonalMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("zero pivot at row {row}")]
    ZeroPivot { row: usize },
    #[error("singular matrix ({0})")]
    Singular(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite {0}")]
    NonFinite(String),
    #[error("{method} did not converge within {iterations} iterations ({} values found)", partial.len())]
    NoConvergence {
        method: &'static str,
        iterations: usize,
        partial: Vec<Complex64>,
    },
}
