//! Diagonalisation of families whose leading coefficient has distinct
//! eigenvalues.
//!
//! With `M_0` a diagonaliser of `A_0` and `Ã = M_0^{-1} A M_0`, the scheme
//! builds `T = I + sum rho^k M^(k)` and diagonal `Lambda = sum rho^k
//! Lambda^(k)` order by order. At order `k` the coefficient
//!
//! ```text
//! B̃^(k) = [Ã T_{k-1} - T_{k-1} Lambda_{k-1}]_k
//! ```
//!
//! is split into its diagonal, which becomes `Lambda^(k)`, and its
//! off-diagonal part, which is removed by the zero-diagonal solution `M^(k)`
//! of `[Lambda_0, M^(k)] + B̃^(k) - diag B̃^(k) = 0`. The diagonaliser of the
//! original family is `M = M_0 T`.

use serde::{Deserialize, Serialize};

use crate::block::PartitionFiltration;
use crate::error::{Error, Result};
use crate::linalg::{
    eig, eigenvalues, group_eigenvalues, sylvester_offdiag_solve, ComplexMatrix, Partition,
    Tolerances, C64,
};
use crate::oracle;
use crate::series::MatrixSeries;

/// Output of either diagonalisation scheme.
#[derive(Clone, Debug)]
pub struct DiagonalizationResult {
    /// Diagonaliser `M(rho)`, retained through `order`.
    pub m: MatrixSeries,
    /// Diagonal series `Lambda(rho)`; off-diagonal entries are literal zeros.
    pub lambda: MatrixSeries,
    pub order: usize,
    /// Diagonaliser of the leading coefficient; equals `m.coeff(0)`.
    pub m0: ComplexMatrix,
    /// `(rho, ||A M - M Lambda||)` on the default sampling grid.
    pub residual_samples: Vec<(f64, f64)>,
    /// Largest sampled `rho` up to which `M(rho)` stays well conditioned.
    pub empirical_radius: f64,
    pub filtration: PartitionFiltration,
    /// Order of non-degeneracy, `None` when not reached within `order`.
    pub nondeg_order: Option<usize>,
}

impl DiagonalizationResult {
    /// Expansion coefficients per branch: `branches()[j][k]` is entry `(j, j)`
    /// of `Lambda^(k)`.
    pub fn branches(&self) -> Vec<Vec<C64>> {
        self.lambda.diagonal_branches()
    }

    /// The same construction cut back to order `k` (`M_k`, `Lambda_k`).
    pub fn truncated(&self, k: usize) -> (MatrixSeries, MatrixSeries) {
        (self.m.truncate(k), self.lambda.truncate(k))
    }

    /// Evaluates `M(rho)` and its inverse.
    pub fn diagonaliser_at(&self, rho: C64) -> Result<(ComplexMatrix, ComplexMatrix)> {
        let m = self.m.evaluate(rho);
        let inv = m.inverse().map_err(|_| Error::SingularDiagonaliser { rho })?;
        Ok((m, inv))
    }
}

/// Report of the spectral bound check at one parameter value.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralBound {
    pub rho: f64,
    /// `||M(rho)^{-1} (A M - M Lambda)(rho)||_2`
    pub bound: f64,
    /// Largest distance from an eigenvalue of `A(rho)` to the spectrum of
    /// `Lambda(rho)`.
    pub distance: f64,
    pub verified: bool,
}

/// Absolute slack added to the spectral bound to absorb eigenvalue round-off.
pub const SPECTRAL_SLACK: f64 = 1e-12;

/// Runs the standard scheme to order `n`.
///
/// The input is taken as an exact polynomial family: coefficients beyond its
/// retained order are zero.
pub fn diagonalize(a: &MatrixSeries, n: usize, tol: &Tolerances) -> Result<DiagonalizationResult> {
    let d = eig(a.coeff(0), tol.eig)?;
    diagonalize_from(a, n, &d.vectors, tol)
}

/// Runs the standard scheme with a caller-supplied diagonaliser `m0` of the
/// leading coefficient. Columns of `m0` fix the branch order.
pub fn diagonalize_from(
    a: &MatrixSeries,
    n: usize,
    m0: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<DiagonalizationResult> {
    m0.check_same_dim(a.coeff(0))?;
    let m0_inv = m0.inverse().map_err(|_| Error::SingularDiagonaliser { rho: C64::new(0.0, 0.0) })?;
    let at = transform(a, m0, &m0_inv, n);
    let lambda0 = leading_diagonal(&at, tol)?;
    check_distinct(&lambda0, tol)?;

    let (t, lambda) = standard_recursion(&at, &lambda0, n, tol.sep_min, false)?;
    let m = t.left_mul(m0);
    let levels = vec![Partition::finest(a.dim()); n + 1];
    let tables = (0..=n).map(|k| lambda.coeff(k).diagonal()).collect();
    finish(a, m, lambda, m0.clone(), PartitionFiltration::new(levels, tables), Some(0), tol)
}

/// `M_0^{-1} A_k M_0` for `k = 0..=n`, padding with zeros past the input
/// order.
pub(crate) fn transform(
    a: &MatrixSeries,
    m0: &ComplexMatrix,
    m0_inv: &ComplexMatrix,
    n: usize,
) -> MatrixSeries {
    a.extend_to(n).truncate(n).left_mul(m0_inv).right_mul(m0)
}

/// Diagonal of the transformed leading coefficient, after checking that the
/// supplied diagonaliser really diagonalises it.
pub(crate) fn leading_diagonal(at: &MatrixSeries, tol: &Tolerances) -> Result<Vec<C64>> {
    let c0 = at.coeff(0);
    let off = (c0 - &c0.diag_part()).max_abs();
    let scale = c0.max_abs().max(f64::MIN_POSITIVE);
    if off > 1e3 * tol.eig.sqrt() * scale {
        return Err(Error::InvalidInput(format!(
            "supplied diagonaliser leaves off-diagonal entries of size {off:.3e}"
        )));
    }
    Ok(c0.diagonal())
}

pub(crate) fn check_distinct(values: &[C64], tol: &Tolerances) -> Result<()> {
    let (p, _) = group_eigenvalues(values, tol.group)?;
    let mut min_gap = f64::INFINITY;
    for i in 0..values.len() {
        for j in (i + 1)..values.len() {
            min_gap = min_gap.min((values[i] - values[j]).norm());
        }
    }
    if !p.is_finest() || min_gap < tol.sep_min {
        return Err(Error::DegenerateLeading {
            values: values.to_vec(),
            sep_min: tol.sep_min,
        });
    }
    Ok(())
}

/// Core recursion on the transformed family. With `derivative` set, the
/// coefficients are read as powers of `1/t` and the term coming from
/// `-d/dt` acting on `T` is included (asymptotic ODE integration).
pub(crate) fn standard_recursion(
    at: &MatrixSeries,
    lambda0: &[C64],
    n: usize,
    sep_min: f64,
    derivative: bool,
) -> Result<(MatrixSeries, MatrixSeries)> {
    let dim = at.dim();
    let finest = Partition::finest(dim);
    let lam0 = ComplexMatrix::from_diag(lambda0);
    let mut t = vec![ComplexMatrix::identity(dim)];
    let mut lam = vec![lam0.clone()];
    for k in 1..=n {
        let mut b = ComplexMatrix::zeros(dim);
        for i in 1..=k {
            let ai = at.coeff(i);
            if ai.max_abs() != 0.0 {
                b += &(ai * &t[k - i]);
            }
        }
        for j in 1..k {
            b -= &(&t[j] * &lam[k - j]);
        }
        if derivative && k >= 2 {
            b += &t[k - 1].scale_real((k - 1) as f64);
        }
        let lk = b.diag_part();
        let mk = sylvester_offdiag_solve(&lam0, &b, &finest, sep_min)?;
        t.push(mk);
        lam.push(lk);
    }
    Ok((MatrixSeries::new(t)?, MatrixSeries::new(lam)?))
}

/// Attaches sampled diagnostics to a finished construction.
pub(crate) fn finish(
    a: &MatrixSeries,
    m: MatrixSeries,
    lambda: MatrixSeries,
    m0: ComplexMatrix,
    filtration: PartitionFiltration,
    nondeg_order: Option<usize>,
    tol: &Tolerances,
) -> Result<DiagonalizationResult> {
    let order = lambda.order();
    let mut r = DiagonalizationResult {
        m,
        lambda,
        order,
        m0,
        residual_samples: Vec::new(),
        empirical_radius: 0.0,
        filtration,
        nondeg_order,
    };
    let tail = residual_series(a, &r)?;
    r.residual_samples = oracle::default_grid()
        .into_iter()
        .map(|rho| (rho, tail.evaluate(C64::new(rho, 0.0)).norm_fro()))
        .collect();
    r.empirical_radius = empirical_radius(&r.m, tol.eig);
    Ok(r)
}

fn empirical_radius(m: &MatrixSeries, tol_eig: f64) -> f64 {
    let mut radius = 0.0;
    for k in -20..=8 {
        let rho = 2f64.powf(k as f64 / 2.0);
        let cond = m.evaluate(C64::new(rho, 0.0)).condition();
        if !(cond < 1.0 / tol_eig) {
            break;
        }
        radius = rho;
    }
    radius
}

/// `A(rho) M(rho) - M(rho) Lambda(rho)` by direct evaluation.
pub fn residual(a: &MatrixSeries, r: &DiagonalizationResult, rho: C64) -> Result<ComplexMatrix> {
    if a.dim() != r.m.dim() {
        return Err(Error::DimensionMismatch {
            expected: r.m.dim(),
            found: a.dim(),
        });
    }
    let m = r.m.evaluate(rho);
    Ok(&(&a.evaluate(rho) * &m) - &(&m * &r.lambda.evaluate(rho)))
}

/// The residual `A M - M Lambda` as an exact polynomial in `rho`.
///
/// Coefficients through the construction order vanish in exact arithmetic;
/// those at round-off level are set to zero so the sampled residual resolves
/// the genuine `O(rho^{N+1})` tail instead of floating-point noise. Larger
/// low-order coefficients (a broken construction) are kept.
pub fn residual_series(a: &MatrixSeries, r: &DiagonalizationResult) -> Result<MatrixSeries> {
    let am = a.mul_polynomial(&r.m)?;
    let ml = r.m.mul_polynomial(&r.lambda)?;
    let top = am.order().max(ml.order());
    let am = am.extend_to(top);
    let ml = ml.extend_to(top);
    let mut out = am.sub(&ml)?;
    let noise = 1e3 * f64::EPSILON * a.scale_norm().max(1.0) * r.m.scale_norm().max(1.0)
        * (r.order + 1) as f64;
    for k in 0..=r.order.min(top) {
        if out.coeff(k).max_abs() <= noise {
            *out.coeff_mut(k) = ComplexMatrix::zeros(a.dim());
        }
    }
    Ok(out)
}

/// Residual of the construction evaluated at `rho`, using the cleaned
/// polynomial form.
pub fn residual_accurate(a: &MatrixSeries, r: &DiagonalizationResult, rho: C64) -> Result<ComplexMatrix> {
    Ok(residual_series(a, r)?.evaluate(rho))
}

/// Checks that every eigenvalue of `A(rho)` lies within
/// `||M(rho)^{-1} B(rho)||_2` of the spectrum of `Lambda(rho)`.
pub fn spectral_bound(a: &MatrixSeries, r: &DiagonalizationResult, rho: C64) -> Result<SpectralBound> {
    let (_, m_inv) = r.diagonaliser_at(rho)?;
    let b = residual_accurate(a, r, rho)?;
    let bound = (&m_inv * &b).norm2();
    let spec_a = eigenvalues(&a.evaluate(rho))?;
    let spec_l = r.lambda.evaluate(rho).diagonal();
    let distance = oracle::one_sided_hausdorff(&spec_a, &spec_l);
    Ok(SpectralBound {
        rho: rho.norm(),
        bound,
        distance,
        verified: distance <= bound + SPECTRAL_SLACK,
    })
}

/// Approximate eigenprojection `M(rho) (e_j ⊗ e_j) M(rho)^{-1}` (0-based `j`).
pub fn eigenprojection(r: &DiagonalizationResult, j: usize, rho: C64) -> Result<ComplexMatrix> {
    let dim = r.m.dim();
    if j >= dim {
        return Err(Error::InvalidInput(format!("branch index {j} out of range for dimension {dim}")));
    }
    let (m, m_inv) = r.diagonaliser_at(rho)?;
    let col = m.column(j);
    let row = m_inv.row(j);
    Ok(ComplexMatrix::from_fn(dim, |a, b| col[a] * row[b]))
}
