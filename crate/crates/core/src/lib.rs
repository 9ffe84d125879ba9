//! Asymptotic diagonalisation of matrix families `A(rho) = sum rho^k A_k`.
//!
//! The [`standard`] scheme handles families whose leading coefficient has
//! distinct eigenvalues; the [`block`] scheme refines repeated eigenvalues
//! step by step. Applications cover characteristic roots of hyperbolic
//! polynomials ([`hyperbolic`]), asymptotic integration of linear ODEs
//! ([`wkb`]) and a damped thermo-elastic model ([`thermo`]).
//! Families are read and written as JSON through [`document`].

// `!(x > 0.0)` deliberately rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod block;
pub mod document;
pub mod error;
pub mod hyperbolic;
pub mod linalg;
pub mod oracle;
pub mod series;
pub mod standard;
pub mod thermo;
pub mod wkb;

pub use block::{block_diagonalize, check_assumption, nondegeneracy_order, BlockMode, NondegOrder, PartitionFiltration, SchemeTrace};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, Partition, Tolerances, C64};
pub use series::MatrixSeries;
pub use standard::{diagonalize, eigenprojection, residual, spectral_bound, DiagonalizationResult};
