//! Entrywise solution of `[Lambda, K] + B - bdiag(P, B) = 0` for diagonal
//! `Lambda`.

use super::matrix::{ComplexMatrix, ZERO};
use super::partition::Partition;
use crate::error::{Error, Result};

/// Solves `[lambda, K] + B - bdiag(p, B) = 0` with `K` vanishing on the
/// diagonal blocks of `p`:
///
/// `K_ij = -B_ij / (lambda_i - lambda_j)` for `i` and `j` in different groups.
pub fn sylvester_offdiag_solve(
    lambda: &ComplexMatrix,
    b: &ComplexMatrix,
    p: &Partition,
    sep_min: f64,
) -> Result<ComplexMatrix> {
    sylvester_within(lambda, b, p, None, sep_min)
}

/// Variant restricted to the diagonal blocks of a coarser partition: entries
/// `(i, j)` in the same `coarse` group but different `fine` groups are
/// eliminated, everything else in `K` is zero. With `coarse = None` this is
/// [`sylvester_offdiag_solve`].
///
/// The result commutes with every diagonal matrix that is constant on the
/// `coarse` groups.
pub fn sylvester_within(
    lambda: &ComplexMatrix,
    b: &ComplexMatrix,
    fine: &Partition,
    coarse: Option<&Partition>,
    sep_min: f64,
) -> Result<ComplexMatrix> {
    let n = lambda.dim();
    lambda.check_same_dim(b)?;
    if fine.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: fine.dim(),
        });
    }
    if let Some(c) = coarse {
        if c.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: c.dim(),
            });
        }
    }
    if !lambda.is_diagonal() {
        return Err(Error::InvalidInput("Sylvester operator must be diagonal".into()));
    }
    let fine_labels = fine.labels();
    let coarse_labels = coarse.map(|c| c.labels());
    let d = lambda.diagonal();

    let mut k = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            if fine_labels[i] == fine_labels[j] {
                continue;
            }
            if let Some(cl) = &coarse_labels {
                if cl[i] != cl[j] {
                    continue;
                }
            }
            let gap = d[i] - d[j];
            if gap.norm() < sep_min {
                return Err(Error::SmallDivisor {
                    i,
                    j,
                    gap: gap.norm(),
                    sep_min,
                });
            }
            let bij = b[(i, j)];
            k[(i, j)] = if bij == ZERO { ZERO } else { -bij / gap };
        }
    }
    Ok(k)
}
