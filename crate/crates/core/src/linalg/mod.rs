//! Dense complex linear algebra: Hermitian eigenproblems, PSD square roots,
//! singular values, inverses and polar decomposition.

mod eig;
mod matrix;
mod svd;

use thiserror::Error;

pub use eig::{hermitian_eig, psd_sqrt, EigenDecomposition, HermitianMatrix, PsdMatrix};
pub use matrix::{inner, vec_norm, ComplexMatrix};
pub use svd::{invert, min_singular_value, operator_norm, polar_decompose, svd, Inverse, Svd};

/// Eigenvalues within `PSD_REL_TOL * ‖A‖` below zero count as zero.
pub const PSD_REL_TOL: f64 = 1e-10;
/// `σ_min ≤ SINGULAR_REL_TOL * σ_max` is treated as singular.
pub const SINGULAR_REL_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix has no entries")]
    EmptyMatrix,
    #[error("expected {expected} entries, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("no convergence after {sweeps} sweeps (off-diagonal {off_norm:e}, target {target:e})")]
    NoConvergence { sweeps: usize, off_norm: f64, target: f64 },
    #[error("not positive semidefinite: min eigenvalue {min_eigenvalue:e} below -{tolerance:e}")]
    NotPsd { min_eigenvalue: f64, tolerance: f64 },
    #[error("singular matrix: sigma_min {sigma_min:e}, sigma_max {sigma_max:e}")]
    Singular { sigma_min: f64, sigma_max: f64 },
    #[error("condition number {condition:e} exceeds limit {limit:e}")]
    IllConditioned { condition: f64, limit: f64 },
}
