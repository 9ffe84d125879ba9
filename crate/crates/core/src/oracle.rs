//! Independent checks: dense spectra on parameter grids, branch matching,
//! convergence-order fits and exact eigenprojections.

use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eig, ComplexMatrix, C64};
use crate::series::MatrixSeries;

/// Nine log-spaced points from `2^-10` to `2^-2`.
pub fn default_grid() -> Vec<f64> {
    log2_grid(-10.0, -2.0, 9)
}

/// `count` points `2^e` with exponents evenly spaced in `[lo, hi]`.
pub fn log2_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo.exp2()];
    }
    (0..count)
        .map(|i| (lo + (hi - lo) * i as f64 / (count - 1) as f64).exp2())
        .collect()
}

/// `count` points spaced evenly in `log10` between `lo` and `hi`.
pub fn log10_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    if count == 1 {
        return vec![lo];
    }
    (0..count)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64))
        .collect()
}

const MIN_POINTS: usize = 5;
const MIN_DECADES: f64 = 2.0;

/// Least-squares slope of `log y` against `log x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(&a, &b)| a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite())
        .map(|(&a, &b)| (a.ln(), b.ln()))
        .collect();
    let insufficient = Error::InsufficientGrid {
        min_points: MIN_POINTS,
        min_decades: MIN_DECADES,
    };
    if pts.len() < MIN_POINTS {
        return Err(insufficient);
    }
    let lo = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    if (hi - lo) / std::f64::consts::LN_10 < MIN_DECADES - 1e-9 {
        return Err(insufficient);
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Result of a convergence fit for one branch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlopeFit {
    Fitted(f64),
    /// Every residual is at or below the round-off floor.
    Exact,
}

impl SlopeFit {
    pub fn accepts(&self, n: usize) -> bool {
        match *self {
            SlopeFit::Exact => true,
            SlopeFit::Fitted(s) => s >= n as f64 + 0.8,
        }
    }
}

/// Fits the slope using only points above `floor`; reports [`SlopeFit::Exact`]
/// when nothing rises above it.
pub fn fit_above_floor(x: &[f64], y: &[f64], floor: f64) -> Result<SlopeFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter(|(_, &b)| b > floor)
        .map(|(&a, &b)| (a, b))
        .unzip();
    if xs.is_empty() {
        return Ok(SlopeFit::Exact);
    }
    fit_slope(&xs, &ys).map(SlopeFit::Fitted)
}

/// Spectrum of `A(rho)` at one grid point, or the reason it was skipped.
#[derive(Clone, Debug)]
pub struct SpectrumSample {
    pub rho: f64,
    pub values: Result<Vec<C64>>,
}

/// Eigenvalues of `A(rho)` in canonical order for every grid point.
pub fn sample_spectrum(a: &MatrixSeries, grid: &[f64], tol_eig: f64) -> Vec<SpectrumSample> {
    grid.par_iter()
        .map(|&rho| SpectrumSample {
            rho,
            values: eig(&a.evaluate(C64::new(rho, 0.0)), tol_eig).map(|d| d.values),
        })
        .collect()
}

/// Pairing of numeric eigenvalues with expansion branches over a grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BranchMatch {
    pub grid: Vec<f64>,
    /// `matched[p][j]` is the index of the numeric eigenvalue assigned to
    /// branch `j` at grid point `p`.
    pub matched: Vec<Vec<usize>>,
    /// `residuals[p][j] = |nu_num - nu_exp|` for branch `j`.
    pub residuals: Vec<Vec<f64>>,
}

/// Matches each successfully sampled spectrum against the diagonal of
/// `lambda` evaluated at the same point. Skipped samples are left out.
pub fn match_branches(spectra: &[SpectrumSample], lambda: &MatrixSeries) -> BranchMatch {
    let mut out = BranchMatch {
        grid: Vec::new(),
        matched: Vec::new(),
        residuals: Vec::new(),
    };
    let mut previous: Option<Vec<usize>> = None;
    for s in spectra {
        let Ok(values) = &s.values else { continue };
        let expansion = lambda.evaluate(C64::new(s.rho, 0.0)).diagonal();
        let m = expansion.len().min(values.len());
        let cost: Vec<Vec<f64>> = (0..m)
            .map(|j| (0..m).map(|i| (values[i] - expansion[j]).norm()).collect())
            .collect();
        let mut perm = assignment(&cost);
        if let Some(prev) = &previous {
            let total = |p: &[usize]| p.iter().enumerate().map(|(j, &i)| cost[j][i]).sum::<f64>();
            let best = total(&perm);
            if prev.len() == m && total(prev) <= best * (1.0 + 1e-9) + 1e-15 {
                perm = prev.clone();
            }
        }
        out.residuals
            .push(perm.iter().enumerate().map(|(j, &i)| cost[j][i]).collect());
        out.grid.push(s.rho);
        out.matched.push(perm.clone());
        previous = Some(perm);
    }
    out
}

/// Minimum-cost assignment on a square cost matrix (Hungarian method).
/// Returns `p` with row `j` assigned to column `p[j]`.
pub fn assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    // Potentials formulation with 1-based sentinel column 0.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![0; n];
    for j in 1..=n {
        out[p[j] - 1] = j - 1;
    }
    out
}

/// Per-branch convergence slope of a match. Residuals at or below `floor`
/// are treated as round-off.
pub fn convergence_order(m: &BranchMatch, floor: f64) -> Result<Vec<SlopeFit>> {
    let branches = m.residuals.first().map_or(0, Vec::len);
    (0..branches)
        .map(|j| {
            let y: Vec<f64> = m.residuals.iter().map(|r| r[j]).collect();
            fit_above_floor(&m.grid, &y, floor)
        })
        .collect()
}

/// Eigenprojection onto `values[j]` by the product formula
/// `prod_{i != j} (lambda_i - lambda_j)^{-1} (lambda_i I - A)`, oriented so
/// that the result projects onto the `values[j]` eigenspace.
pub fn exact_projection(a_eval: &ComplexMatrix, values: &[C64], j: usize, sep_min: f64) -> Result<ComplexMatrix> {
    let n = a_eval.dim();
    if values.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: values.len(),
        });
    }
    if j >= n {
        return Err(Error::InvalidInput(format!("branch index {j} out of range for dimension {n}")));
    }
    let mut p = ComplexMatrix::identity(n);
    for (i, &li) in values.iter().enumerate() {
        if i == j {
            continue;
        }
        let gap = li - values[j];
        if gap.norm() < sep_min {
            return Err(Error::SmallDivisor {
                i,
                j,
                gap: gap.norm(),
                sep_min,
            });
        }
        let factor = (&ComplexMatrix::identity(n).scale(li) - a_eval).scale(gap.inv());
        p = &p * &factor;
    }
    Ok(p)
}

/// Largest distance from a point of `from` to the nearest point of `to`.
pub fn one_sided_hausdorff(from: &[C64], to: &[C64]) -> f64 {
    from.iter()
        .map(|a| to.iter().map(|b| (a - b).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

fn gaussian(rng: &mut StdRng) -> C64 {
    C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

/// Random polynomial family of order `order` whose leading coefficient has
/// eigenvalues at least `1/2` apart and a moderately conditioned
/// eigenvector matrix. Higher coefficients have standard complex Gaussian
/// entries.
pub fn random_family(dim: usize, order: usize, seed: u64) -> MatrixSeries {
    let mut rng = StdRng::seed_from_u64(seed);
    let values: Vec<C64> = loop {
        let v: Vec<C64> = (0..dim)
            .map(|j| C64::new(j as f64, 0.0) + gaussian(&mut rng).scale(0.3))
            .collect();
        let separated = (0..dim).all(|i| (i + 1..dim).all(|j| (v[i] - v[j]).norm() >= 0.5));
        if separated {
            break v;
        }
    };
    let s = loop {
        let g = ComplexMatrix::from_fn(dim, |_, _| gaussian(&mut rng).scale(0.3));
        let s = &ComplexMatrix::identity(dim) + &g;
        if s.condition() < 10.0 {
            break s;
        }
    };
    let s_inv = s.inverse().expect("conditioned by construction");
    let mut coeffs = vec![&(&s * &ComplexMatrix::from_diag(&values)) * &s_inv];
    for _ in 0..order {
        coeffs.push(ComplexMatrix::from_fn(dim, |_, _| gaussian(&mut rng)));
    }
    MatrixSeries::new(coeffs).expect("square coefficients of equal size")
}

/// Random family with Hermitian coefficients and a diagonal leading
/// coefficient with distinct integer eigenvalues.
pub fn random_hermitian_family(dim: usize, order: usize, seed: u64) -> MatrixSeries {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut coeffs = vec![ComplexMatrix::from_fn(dim, |i, j| {
        if i == j {
            C64::new(i as f64, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })];
    for _ in 0..order {
        let g = ComplexMatrix::from_fn(dim, |_, _| gaussian(&mut rng));
        coeffs.push((&g + &g.conj_transpose()).scale_real(0.5));
    }
    MatrixSeries::new(coeffs).expect("square coefficients of equal size")
}
