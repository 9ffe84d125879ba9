//! Dense complex linear algebra for small matrices: arithmetic, SVD,
//! eigendecomposition, eigenvalue grouping and the block Sylvester solver.

mod eigen;
mod matrix;
mod partition;
mod svd;
mod sylvester;

pub use eigen::{canonical_order, eig, eigenvalues, is_diagonable, normalise_vector, Diagonability, EigenDecomposition};
pub use matrix::{vec_norm, ComplexMatrix, Lu, C64, MAX_DIM};
pub use partition::{bdiag, group_eigenvalues, is_block_diagonal, permute, Partition};
pub use svd::{singular_values, svd, Svd};
pub use sylvester::{sylvester_offdiag_solve, sylvester_within};

/// Numerical tolerances shared by the schemes.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerances {
    /// Eigenvector-matrix conditioning limit is `1 / eig`.
    pub eig: f64,
    /// Relative radius for treating eigenvalues (or expansion coefficients)
    /// as equal.
    pub group: f64,
    /// Smallest admissible gap in a Sylvester division.
    pub sep_min: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eig: 1e-10,
            group: 1e-8,
            sep_min: 1e-8,
        }
    }
}
