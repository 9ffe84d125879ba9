//! Damped one-dimensional thermo-elasticity.
//!
//! After a Fourier transform in `x` and the substitution
//! `V = (u_t + i tau xi u, u_t - i tau xi u, theta)`, the system
//!
//! ```text
//! u_tt - tau^2 u_xx + gamma1 theta_x + m u_t = 0
//! theta_t - kappa theta_xx + gamma2 u_tx = 0
//! ```
//!
//! becomes `V' = A(xi) V` with `A(xi) = A0 + xi A1 + xi^2 A2`. The module
//! expands the eigenvalues of `A(xi)` at `xi = 0` and `xi = infinity` with
//! the block scheme and checks the sign of their real parts on a grid.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::block::{block_diagonalize, BlockMode};
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, ComplexMatrix, Tolerances, C64};
use crate::series::MatrixSeries;
use crate::standard::DiagonalizationResult;

/// Model constants; all must be strictly positive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermoParams {
    pub tau: f64,
    pub kappa: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub m: f64,
}

impl Default for ThermoParams {
    fn default() -> Self {
        Self {
            tau: 1.0,
            kappa: 1.0,
            gamma1: 1.0,
            gamma2: 1.0,
            m: 1.0,
        }
    }
}

impl ThermoParams {
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("tau", self.tau),
            ("kappa", self.kappa),
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("m", self.m),
        ];
        for (name, v) in named {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be a positive finite number, got {v}")));
            }
        }
        Ok(())
    }

    /// `(lambda0, lambda_plus, lambda_minus)` with
    /// `nu_0 = -m + lambda0 xi^2` and `nu_pm = -lambda_pm xi^2` up to `O(xi^3)`.
    pub fn small_xi_constants(&self) -> (f64, f64, f64) {
        let l0 = (self.tau * self.tau + self.gamma1 * self.gamma2) / self.m;
        let half = 0.5 * (self.kappa + l0);
        let root = self.small_xi_discriminant().max(0.0).sqrt();
        (l0, half - root, half + root)
    }

    /// `(kappa + lambda0)^2 / 4 - tau^2 kappa / m`; the two parabolic
    /// branches at `xi = 0` separate at second order iff this is nonzero.
    pub fn small_xi_discriminant(&self) -> f64 {
        let l0 = (self.tau * self.tau + self.gamma1 * self.gamma2) / self.m;
        0.25 * (self.kappa + l0).powi(2) - self.tau * self.tau * self.kappa / self.m
    }

    /// Constant terms `(parabolic, hyperbolic)` of the expansions at
    /// infinity, `nu_par = -kappa xi^2 + c_par` and
    /// `nu_hyp = +-i tau xi + c_hyp` up to `O(1/xi)`.
    pub fn large_xi_constants(&self) -> (f64, f64) {
        let g = self.gamma1 * self.gamma2;
        (g / self.kappa, -0.5 * self.m - 0.5 * g / self.kappa)
    }
}

/// `A(xi) = A0 + xi A1 + xi^2 A2` as an exact series of order 2.
pub fn build_family(p: &ThermoParams) -> Result<MatrixSeries> {
    p.validate()?;
    let r = |x: f64| C64::new(x, 0.0);
    let i = |x: f64| C64::new(0.0, x);
    let h = -0.5 * p.m;
    let a0 = ComplexMatrix::from_rows(&[
        vec![r(h), r(h), r(0.0)],
        vec![r(h), r(h), r(0.0)],
        vec![r(0.0), r(0.0), r(0.0)],
    ])?;
    let a1 = ComplexMatrix::from_rows(&[
        vec![i(p.tau), r(0.0), i(p.gamma1)],
        vec![r(0.0), i(-p.tau), i(p.gamma1)],
        vec![i(0.5 * p.gamma2), i(0.5 * p.gamma2), r(0.0)],
    ])?;
    let a2 = ComplexMatrix::from_diag(&[r(0.0), r(0.0), r(-p.kappa)]);
    MatrixSeries::new(vec![a0, a1, a2])
}

/// `rho^2 A(1/rho) = A2 + rho A1 + rho^2 A0`, whose eigenvalues are
/// `rho^2 nu(1/rho)`.
pub fn rescaled_family(p: &ThermoParams) -> Result<MatrixSeries> {
    let a = build_family(p)?;
    MatrixSeries::new(vec![a.coeff(2).clone(), a.coeff(1).clone(), a.coeff(0).clone()])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// `xi -> 0`, expansion in powers of `xi`.
    Small,
    /// `xi -> infinity`, expansion of `nu` in powers `xi^{2-k}`.
    Large,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ThermoBranch {
    pub label: String,
    /// Coefficients in the regime's expansion variable: `xi^k` for
    /// [`Regime::Small`], `xi^{2-k}` for [`Regime::Large`].
    pub coeffs: Vec<C64>,
}

#[derive(Clone, Debug)]
pub struct ThermoExpansion {
    pub regime: Regime,
    pub params: ThermoParams,
    /// Family the block scheme was run on (`A` or its rescaling).
    pub family: MatrixSeries,
    pub result: DiagonalizationResult,
    pub branches: Vec<ThermoBranch>,
}

impl ThermoExpansion {
    pub fn nondeg_order(&self) -> Option<usize> {
        self.result.nondeg_order
    }

    pub fn branch(&self, label: &str) -> Option<&ThermoBranch> {
        self.branches.iter().find(|b| b.label == label)
    }

    /// Truncated expansion of every branch at `xi`.
    pub fn evaluate(&self, xi: f64) -> Vec<C64> {
        self.branches
            .iter()
            .map(|b| {
                b.coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, c)| {
                        let e = match self.regime {
                            Regime::Small => k as i32,
                            Regime::Large => 2 - k as i32,
                        };
                        c * xi.powi(e)
                    })
                    .sum()
            })
            .collect()
    }

    /// Largest `|sum_j coeff_k(branch j) - trace(family_k)|` over the orders.
    pub fn trace_defect(&self) -> f64 {
        (0..=self.result.order)
            .map(|k| {
                let s: C64 = self.branches.iter().map(|b| b.coeffs[k]).sum();
                (s - self.family.coeff_or_zero(k).trace()).norm()
            })
            .fold(0.0, f64::max)
    }
}

fn run_scheme(family: &MatrixSeries, n: usize, tol: &Tolerances) -> Result<DiagonalizationResult> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("expansion order must be at least 2, got {n}")));
    }
    Ok(block_diagonalize(family, n, BlockMode::SubSteps, tol)?.0)
}

fn sort_by(items: &mut [Vec<C64>], key: impl Fn(&[C64]) -> f64) {
    items.sort_by(|a, b| key(a).total_cmp(&key(b)));
}

/// Expansion at `xi = 0` to order `n >= 2`. Branches are labelled `nu0`
/// (from `-m`), `nu+` and `nu-` (from the double zero, `nu+` the slower
/// decaying one).
pub fn small_xi_expansion(p: &ThermoParams, n: usize, tol: &Tolerances) -> Result<ThermoExpansion> {
    let family = build_family(p)?;
    let result = run_scheme(&family, n, tol)?;
    let mut raw = result.branches();
    // nu0 has the most negative leading term; the parabolic pair is ordered
    // by its xi^2 coefficient, largest (least negative) first.
    sort_by(&mut raw, |c| c[0].re);
    let nu0 = raw.remove(0);
    sort_by(&mut raw, |c| -c[2].re);
    let mut branches = vec![ThermoBranch {
        label: "nu0".into(),
        coeffs: nu0,
    }];
    for (label, coeffs) in ["nu+", "nu-"].into_iter().zip(raw) {
        branches.push(ThermoBranch {
            label: label.into(),
            coeffs,
        });
    }
    Ok(ThermoExpansion {
        regime: Regime::Small,
        params: *p,
        family,
        result,
        branches,
    })
}

/// Expansion at `xi = infinity` to order `n >= 2`, computed on
/// [`rescaled_family`]. Branches are `par` (leading `-kappa xi^2`),
/// `hyp+` and `hyp-` (leading `+-i tau xi`).
pub fn large_xi_expansion(p: &ThermoParams, n: usize, tol: &Tolerances) -> Result<ThermoExpansion> {
    let family = rescaled_family(p)?;
    let result = run_scheme(&family, n, tol)?;
    let mut raw = result.branches();
    sort_by(&mut raw, |c| c[0].re);
    let par = raw.remove(0);
    sort_by(&mut raw, |c| -c[1].im);
    let mut branches = vec![ThermoBranch {
        label: "par".into(),
        coeffs: par,
    }];
    for (label, coeffs) in ["hyp+", "hyp-"].into_iter().zip(raw) {
        branches.push(ThermoBranch {
            label: label.into(),
            coeffs,
        });
    }
    Ok(ThermoExpansion {
        regime: Regime::Large,
        params: *p,
        family,
        result,
        branches,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SignPoint {
    pub xi: f64,
    pub values: Vec<C64>,
    pub max_re: f64,
    /// Margin `-max_re`; positive when every mode decays.
    pub delta: f64,
    /// Smallest pairwise eigenvalue distance at this `xi`.
    pub gap: f64,
    /// `|prod nu - det A(xi)| / max(1, |det A(xi)|)`.
    pub det_defect: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SignReport {
    pub points: Vec<SignPoint>,
    pub max_re: f64,
    pub min_gap: f64,
    pub max_det_defect: f64,
    /// Grid values where the sign condition fails (or the spectrum could
    /// not be computed).
    pub violations: Vec<f64>,
}

impl SignReport {
    pub fn all_negative(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Tolerance on `max Re nu` at `xi = 0`, where two eigenvalues vanish.
pub const ZERO_XI_TOL: f64 = 1e-10;

/// Computes the spectrum of `A(xi)` at every grid point and checks
/// `max Re nu(xi) < 0` for `xi != 0` (`<= ZERO_XI_TOL` at `xi = 0`).
pub fn verify_spectral_signs(p: &ThermoParams, xi_grid: &[f64]) -> Result<SignReport> {
    let family = build_family(p)?;
    let points: Vec<std::result::Result<SignPoint, f64>> = xi_grid
        .par_iter()
        .map(|&xi| {
            let a = family.evaluate(C64::new(xi, 0.0));
            let values = eigenvalues(&a).map_err(|_| xi)?;
            let max_re = values.iter().map(|v| v.re).fold(f64::NEG_INFINITY, f64::max);
            let mut gap = f64::INFINITY;
            for i in 0..values.len() {
                for j in i + 1..values.len() {
                    gap = gap.min((values[i] - values[j]).norm());
                }
            }
            let det = a.det();
            let prod: C64 = values.iter().product();
            Ok(SignPoint {
                xi,
                max_re,
                delta: -max_re,
                gap,
                det_defect: (prod - det).norm() / det.norm().max(1.0),
                values,
            })
        })
        .collect();

    let mut report = SignReport {
        points: Vec::with_capacity(points.len()),
        max_re: f64::NEG_INFINITY,
        min_gap: f64::INFINITY,
        max_det_defect: 0.0,
        violations: Vec::new(),
    };
    for entry in points {
        match entry {
            Ok(pt) => {
                let ok = if pt.xi == 0.0 { pt.max_re <= ZERO_XI_TOL } else { pt.max_re < 0.0 };
                if !ok {
                    report.violations.push(pt.xi);
                }
                if pt.xi != 0.0 {
                    report.max_re = report.max_re.max(pt.max_re);
                    report.min_gap = report.min_gap.min(pt.gap);
                }
                report.max_det_defect = report.max_det_defect.max(pt.det_defect);
                report.points.push(pt);
            }
            Err(xi) => report.violations.push(xi),
        }
    }
    Ok(report)
}

/// Writes `xi,branch,re,im` rows, one per eigenvalue in the order found.
pub fn write_spectrum_csv<W: Write>(report: &SignReport, mut out: W) -> std::io::Result<()> {
    writeln!(out, "xi,branch,re,im")?;
    for pt in &report.points {
        for (j, v) in pt.values.iter().enumerate() {
            writeln!(out, "{:?},{},{:?},{:?}", pt.xi, j, v.re, v.im)?;
        }
    }
    Ok(())
}
