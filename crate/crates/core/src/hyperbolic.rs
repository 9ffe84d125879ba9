//! Large-frequency expansions of the characteristic roots of strictly
//! hyperbolic polynomials `L(tau, xi)`.
//!
//! Writing `L / c = sum_k tau^{m-k} q_k(xi)` and `tau = |xi| sigma`, the
//! rescaled roots `sigma` are the eigenvalues of a companion matrix that is a
//! polynomial in `rho = 1/|xi|`: the homogeneous part of degree `h` of `q_k`
//! contributes to the power `rho^{k-h}`. The standard scheme applied to this
//! series gives
//!
//! ```text
//! tau_j(xi) ~ |xi| phi_j(eta) + tau_j^(0)(eta) + |xi|^{-1} tau_j^(1)(eta) + ...
//! ```

use std::collections::BTreeMap;
use std::io::Write;

use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, ComplexMatrix, Tolerances, C64};
use crate::series::MatrixSeries;
use crate::standard::diagonalize;

/// One monomial `coeff * tau^tau * xi^xi`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub tau: u32,
    pub xi: Vec<u32>,
    pub coeff: C64,
}

/// Polynomial in `tau` and `xi in R^n` of total degree `degree`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolynomialDocument", into = "PolynomialDocument")]
pub struct HyperbolicPolynomial {
    degree: u32,
    n: usize,
    terms: BTreeMap<(u32, Vec<u32>), C64>,
    leading: C64,
}

/// Serialised form: `{"degree": m, "dim": n, "terms": [...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolynomialDocument {
    pub degree: u32,
    pub dim: usize,
    pub terms: Vec<Term>,
}

impl TryFrom<PolynomialDocument> for HyperbolicPolynomial {
    type Error = Error;
    fn try_from(d: PolynomialDocument) -> Result<Self> {
        HyperbolicPolynomial::new(d.degree, d.dim, d.terms)
    }
}

impl From<HyperbolicPolynomial> for PolynomialDocument {
    fn from(p: HyperbolicPolynomial) -> Self {
        PolynomialDocument {
            degree: p.degree,
            dim: p.n,
            terms: p.terms(),
        }
    }
}

impl HyperbolicPolynomial {
    pub fn new(degree: u32, n: usize, terms: Vec<Term>) -> Result<Self> {
        if degree == 0 || n == 0 {
            return Err(Error::InvalidInput("degree and spatial dimension must be positive".into()));
        }
        if degree as usize > crate::linalg::MAX_DIM {
            return Err(Error::TooLarge(degree as usize));
        }
        let mut map = BTreeMap::new();
        for t in terms {
            if t.xi.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: t.xi.len(),
                });
            }
            if !(t.coeff.re.is_finite() && t.coeff.im.is_finite()) {
                return Err(Error::InvalidInput("non-finite polynomial coefficient".into()));
            }
            let total = t.tau + t.xi.iter().sum::<u32>();
            if total > degree {
                return Err(Error::DegreeViolation {
                    tau_power: t.tau,
                    multi_index: t.xi,
                    degree,
                });
            }
            if map.insert((t.tau, t.xi.clone()), t.coeff).is_some() {
                return Err(Error::InvalidInput(format!(
                    "duplicate term tau^{} xi^{:?}",
                    t.tau, t.xi
                )));
            }
        }
        let leading = map.get(&(degree, vec![0; n])).copied().unwrap_or_default();
        if leading.norm() == 0.0 {
            return Err(Error::InvalidInput(format!("coefficient of tau^{degree} must be nonzero")));
        }
        Ok(Self {
            degree,
            n,
            terms: map,
            leading,
        })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Coefficient `c` of `tau^m`.
    pub fn leading(&self) -> C64 {
        self.leading
    }

    pub fn terms(&self) -> Vec<Term> {
        self.terms
            .iter()
            .map(|((tau, xi), &coeff)| Term {
                tau: *tau,
                xi: xi.clone(),
                coeff,
            })
            .collect()
    }

    /// `L(tau, xi)`.
    pub fn evaluate(&self, tau: C64, xi: &[f64]) -> C64 {
        self.terms
            .iter()
            .map(|((p, alpha), &c)| c * tau.powu(*p) * monomial(alpha, xi))
            .sum()
    }

    /// Degree of `L - L_m`; `None` when `L` is homogeneous.
    pub fn lower_degree(&self) -> Option<u32> {
        self.terms
            .keys()
            .map(|(p, alpha)| p + alpha.iter().sum::<u32>())
            .filter(|&d| d < self.degree)
            .max()
    }

    /// `q_{k,h}(eta)`: the degree-`h` part of `q_k` at `eta`, with
    /// `q_k` the coefficient of `tau^{m-k}` divided by `c`.
    fn homogeneous_part(&self, k: u32, h: u32, eta: &[f64]) -> C64 {
        let tau_power = self.degree - k;
        self.terms
            .iter()
            .filter(|((p, alpha), _)| *p == tau_power && alpha.iter().sum::<u32>() == h)
            .map(|((_, alpha), &c)| c * monomial(alpha, eta))
            .sum::<C64>()
            / self.leading
    }

    /// The companion matrix `𝓛(xi)` whose characteristic polynomial is
    /// `L(., xi) / c`.
    pub fn companion_matrix(&self, xi: &[f64]) -> Result<ComplexMatrix> {
        let norm = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidInput("frequency must be nonzero".into()));
        }
        let eta: Vec<f64> = xi.iter().map(|x| x / norm).collect();
        let s = companion_series(self, &eta)?;
        Ok(s.evaluate(C64::new(1.0 / norm, 0.0)).scale_real(norm))
    }
}

fn monomial(alpha: &[u32], x: &[f64]) -> C64 {
    C64::new(alpha.iter().zip(x).map(|(&a, &v)| v.powi(a as i32)).product(), 0.0)
}

fn check_direction(l: &HyperbolicPolynomial, eta: &[f64]) -> Result<()> {
    if eta.len() != l.n {
        return Err(Error::DimensionMismatch {
            expected: l.n,
            found: eta.len(),
        });
    }
    let norm = eta.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::NotNormalised { norm });
    }
    Ok(())
}

/// Companion series `𝓛_0(eta) + rho 𝓛_1(eta) + ... + rho^m 𝓛_m(eta)` in
/// `rho = 1/|xi|`.
pub fn companion_series(l: &HyperbolicPolynomial, eta: &[f64]) -> Result<MatrixSeries> {
    check_direction(l, eta)?;
    let m = l.degree as usize;
    let coeffs = (0..=m)
        .map(|d| {
            let mut c = ComplexMatrix::zeros(m);
            if d == 0 {
                for i in 0..m - 1 {
                    c[(i, i + 1)] = C64::new(1.0, 0.0);
                }
            }
            for k in d.max(1)..=m {
                c[(m - 1, m - k)] = -l.homogeneous_part(k as u32, (k - d) as u32, eta);
            }
            c
        })
        .collect();
    MatrixSeries::new(coeffs)
}

/// Expansion of all characteristic roots along one direction.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RootExpansion {
    pub eta: Vec<f64>,
    /// `branches[j] = [phi_j, tau_j^(0), ..., tau_j^(K)]`.
    pub branches: Vec<Vec<C64>>,
    /// Smallest distance between two values `phi_j`.
    pub min_gap: f64,
}

impl RootExpansion {
    /// Truncated expansion of every root at `|xi| = xi_norm`.
    pub fn evaluate(&self, xi_norm: f64) -> Vec<C64> {
        self.branches
            .iter()
            .map(|b| {
                b.iter()
                    .enumerate()
                    .map(|(d, &c)| c * xi_norm.powi(1 - d as i32))
                    .sum()
            })
            .collect()
    }

    pub fn phi(&self) -> Vec<f64> {
        self.branches.iter().map(|b| b[0].re).collect()
    }

    /// `tau_j^(k)` for `k >= 0`.
    pub fn tau(&self, j: usize, k: usize) -> C64 {
        self.branches[j][k + 1]
    }
}

fn strict_hyperbolicity(eta: &[f64], l0: &ComplexMatrix, tol: &Tolerances) -> Result<f64> {
    let values = eigenvalues(l0)?;
    let scale = values.iter().map(|z| z.norm()).fold(1.0, f64::max);
    for v in &values {
        if v.im.abs() > tol.group * scale {
            return Err(Error::NotStrictlyHyperbolic {
                eta: eta.to_vec(),
                first: *v,
                second: v.conj(),
                gap: 2.0 * v.im.abs(),
            });
        }
    }
    let mut best = (f64::INFINITY, 0, 0);
    for i in 0..values.len() {
        for j in (i + 1)..values.len() {
            let g = (values[i] - values[j]).norm();
            if g < best.0 {
                best = (g, i, j);
            }
        }
    }
    if best.0 < tol.sep_min.max(tol.group * scale) {
        return Err(Error::NotStrictlyHyperbolic {
            eta: eta.to_vec(),
            first: values[best.1],
            second: values[best.2],
            gap: best.0,
        });
    }
    Ok(best.0)
}

/// Root expansions through `tau^(k_max)` along `eta`.
pub fn root_expansion(
    l: &HyperbolicPolynomial,
    eta: &[f64],
    k_max: usize,
    tol: &Tolerances,
) -> Result<RootExpansion> {
    let series = companion_series(l, eta)?;
    let min_gap = strict_hyperbolicity(eta, series.coeff(0), tol)?;
    let res = diagonalize(&series, k_max + 1, tol)?;
    Ok(RootExpansion {
        eta: eta.to_vec(),
        branches: res.branches(),
        min_gap,
    })
}

/// One entry of the low-order vanishing check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VanishingEntry {
    pub branch: usize,
    pub k: usize,
    pub modulus: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VanishingReport {
    /// Degree of `L - L_m`, `None` when `L` is homogeneous.
    pub lower_degree: Option<u32>,
    /// Number of coefficients `tau^(0) .. tau^(count-1)` required to vanish.
    pub count: usize,
    pub entries: Vec<VanishingEntry>,
    pub pass: bool,
}

/// Threshold for a coefficient to count as vanishing.
pub const VANISHING_TOL: f64 = 1e-12;

/// When `deg(L - L_m) < m - 1`, checks that `tau_j^(0) .. tau_j^(m - deg - 2)`
/// vanish. A homogeneous polynomial has all of `tau^(0) .. tau^(m-1)`
/// checked.
pub fn check_low_order_vanishing(l: &HyperbolicPolynomial, eta: &[f64], tol: &Tolerances) -> Result<VanishingReport> {
    let m = l.degree as i64;
    let lower = l.lower_degree();
    let count = match lower {
        None => m as usize,
        Some(d) => (m - d as i64 - 1).max(0) as usize,
    };
    let mut entries = Vec::new();
    if count > 0 {
        let exp = root_expansion(l, eta, count - 1, tol)?;
        for (j, _) in exp.branches.iter().enumerate() {
            for k in 0..count {
                let modulus = exp.tau(j, k).norm();
                entries.push(VanishingEntry {
                    branch: j,
                    k,
                    modulus,
                    pass: modulus <= VANISHING_TOL,
                });
            }
        }
    }
    Ok(VanishingReport {
        lower_degree: lower,
        count,
        pass: entries.iter().all(|e| e.pass),
        entries,
    })
}

/// Directions on the unit sphere of `R^n`: `{+1, -1}` for `n = 1`, evenly
/// spaced angles for `n = 2`, a Fibonacci lattice for `n = 3` and seeded
/// normalised Gaussian samples beyond.
pub fn sample_directions(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    match n {
        0 => Vec::new(),
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let a = golden * k as f64;
                    vec![r * a.cos(), r * a.sin(), z]
                })
                .collect()
        }
        _ => {
            let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
            (0..count)
                .map(|_| loop {
                    let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
                    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if norm > 1e-6 {
                        break v.into_iter().map(|x| x / norm).collect();
                    }
                })
                .collect()
        }
    }
}

/// Expansions over a set of directions, with the smallest root separation
/// seen.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DirectionScan {
    pub expansions: Vec<RootExpansion>,
    pub min_gap: f64,
}

/// Runs [`root_expansion`] for every direction in parallel.
pub fn scan_directions(
    l: &HyperbolicPolynomial,
    directions: &[Vec<f64>],
    k_max: usize,
    tol: &Tolerances,
) -> Result<DirectionScan> {
    let expansions = directions
        .par_iter()
        .map(|eta| root_expansion(l, eta, k_max, tol))
        .collect::<Result<Vec<_>>>()?;
    let min_gap = expansions.iter().map(|e| e.min_gap).fold(f64::INFINITY, f64::min);
    Ok(DirectionScan {
        expansions,
        min_gap,
    })
}

/// Writes one CSV row per direction and branch:
/// `eta_1..eta_n, branch, phi, tau0_re, tau0_im, ...`.
pub fn write_csv<W: Write>(scan: &DirectionScan, out: &mut W) -> std::io::Result<()> {
    let Some(first) = scan.expansions.first() else {
        return Ok(());
    };
    let n = first.eta.len();
    let k = first.branches.first().map_or(0, |b| b.len() - 1);
    let mut header: Vec<String> = (1..=n).map(|i| format!("eta_{i}")).collect();
    header.push("branch".into());
    header.push("phi".into());
    for d in 0..k {
        header.push(format!("tau{d}_re"));
        header.push(format!("tau{d}_im"));
    }
    writeln!(out, "{}", header.join(","))?;
    for e in &scan.expansions {
        for (j, b) in e.branches.iter().enumerate() {
            let mut row: Vec<String> = e.eta.iter().map(|x| format!("{x:?}")).collect();
            row.push(j.to_string());
            row.push(format!("{:?}", b[0].re));
            for c in &b[1..] {
                row.push(format!("{:?}", c.re));
                row.push(format!("{:?}", c.im));
            }
            writeln!(out, "{}", row.join(","))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn term(tau: u32, xi: &[u32], c: f64) -> Term {
        Term {
            tau,
            xi: xi.to_vec(),
            coeff: r(c),
        }
    }

    fn wave(mass: f64) -> HyperbolicPolynomial {
        let mut t = vec![term(2, &[0], 1.0), term(0, &[2], -1.0)];
        if mass != 0.0 {
            t.push(term(0, &[0], -mass));
        }
        HyperbolicPolynomial::new(2, 1, t).unwrap()
    }

    #[test]
    fn wave_companion() {
        let s = companion_series(&wave(0.0), &[1.0]).unwrap();
        let l0 = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(s.coeff(0), &l0);
        assert_eq!(s.coeff(1).max_abs(), 0.0);
        assert_eq!(s.coeff(2).max_abs(), 0.0);
        let e = root_expansion(&wave(0.0), &[1.0], 3, &Tolerances::default()).unwrap();
        assert_eq!(e.phi(), vec![1.0, -1.0]);
        for j in 0..2 {
            for k in 0..=3 {
                assert_eq!(e.tau(j, k).norm(), 0.0);
            }
        }
    }

    #[test]
    fn klein_gordon_expansion() {
        let l = wave(1.0);
        let s = companion_series(&l, &[1.0]).unwrap();
        let l2 = ComplexMatrix::from_real_rows(&[vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(s.coeff(2), &l2);
        let e = root_expansion(&l, &[-1.0], 4, &Tolerances::default()).unwrap();
        // sqrt(x^2 + 1) = x + 1/(2x) - 1/(8x^3) + ...
        assert!(e.tau(0, 0).norm() < 1e-15);
        assert!((e.tau(0, 1) - r(0.5)).norm() < 1e-14);
        assert!((e.tau(1, 1) + r(0.5)).norm() < 1e-14);
        assert!(e.tau(0, 2).norm() < 1e-14);
        assert!((e.tau(0, 3) + r(0.125)).norm() < 1e-13);
        let x = 50.0;
        let exact = (x * x + 1.0f64).sqrt();
        assert!((e.evaluate(x)[0] - r(exact)).norm() < 1e-9);
    }

    #[test]
    fn characteristic_identity() {
        // (tau - xi1)(tau + 2 xi2)(tau - 3 xi1 - xi2) + tau xi1 - 2 tau + xi2 + 1, n = 2.
        let l = HyperbolicPolynomial::new(
            3,
            2,
            vec![
                term(3, &[0, 0], 2.0),
                term(2, &[1, 0], -8.0),
                term(2, &[0, 1], 2.0),
                term(1, &[2, 0], 6.0),
                term(1, &[1, 1], -14.0),
                term(1, &[0, 2], -4.0),
                term(0, &[2, 1], 12.0),
                term(0, &[1, 2], 4.0),
                term(1, &[1, 0], 1.0),
                term(1, &[0, 0], -2.0),
                term(0, &[0, 1], 1.0),
                term(0, &[0, 0], 1.0),
            ],
        )
        .unwrap();
        use rand::Rng;
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..20 {
            let xi = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            let tau = C64::new(rng.gen_range(-5.0..5.0), rng.gen_range(-1.0..1.0));
            let c = l.companion_matrix(&xi).unwrap();
            let det = c.shifted(tau).scale_real(-1.0).det() * l.leading();
            let want = l.evaluate(tau, &xi);
            assert!((det - want).norm() <= 1e-8 * want.norm().max(1.0), "{det} vs {want}");
        }
    }

    #[test]
    fn low_order_vanishing() {
        let rep = check_low_order_vanishing(&wave(1.0), &[1.0], &Tolerances::default()).unwrap();
        assert_eq!(rep.lower_degree, Some(0));
        assert_eq!(rep.count, 1);
        assert!(rep.pass);

        // tau^3 - 7 tau xi^2 + 6 xi^3 + 5 with roots -3, 1, 2 in phi.
        let l = HyperbolicPolynomial::new(
            3,
            1,
            vec![term(3, &[0], 1.0), term(1, &[2], -7.0), term(0, &[3], 6.0), term(0, &[0], 5.0)],
        )
        .unwrap();
        let rep = check_low_order_vanishing(&l, &[1.0], &Tolerances::default()).unwrap();
        assert_eq!(rep.count, 2);
        assert_eq!(rep.entries.len(), 6);
        assert!(rep.pass, "{rep:?}");

        // deg(L - L_m) = m - 1: nothing to check.
        let l = HyperbolicPolynomial::new(2, 1, vec![term(2, &[0], 1.0), term(0, &[2], -1.0), term(1, &[0], 1.0)])
            .unwrap();
        let rep = check_low_order_vanishing(&l, &[1.0], &Tolerances::default()).unwrap();
        assert_eq!(rep.count, 0);
        assert!(rep.pass && rep.entries.is_empty());
    }

    #[test]
    fn input_validation() {
        assert!(matches!(
            HyperbolicPolynomial::new(2, 1, vec![term(2, &[0], 1.0), term(1, &[2], 1.0)]),
            Err(Error::DegreeViolation { .. })
        ));
        assert!(HyperbolicPolynomial::new(2, 1, vec![term(0, &[2], 1.0)]).is_err());
        assert!(matches!(
            companion_series(&wave(0.0), &[0.5]),
            Err(Error::NotNormalised { .. })
        ));
    }

    #[test]
    fn elliptic_rejected() {
        // tau^2 + xi^2 has roots ±i|xi|.
        let l = HyperbolicPolynomial::new(2, 1, vec![term(2, &[0], 1.0), term(0, &[2], 1.0)]).unwrap();
        assert!(matches!(
            root_expansion(&l, &[1.0], 2, &Tolerances::default()),
            Err(Error::NotStrictlyHyperbolic { .. })
        ));
        // tau^2 - xi1^2 is degenerate along (0, 1).
        let l = HyperbolicPolynomial::new(2, 2, vec![term(2, &[0, 0], 1.0), term(0, &[2, 0], -1.0)]).unwrap();
        assert!(matches!(
            root_expansion(&l, &[0.0, 1.0], 2, &Tolerances::default()),
            Err(Error::NotStrictlyHyperbolic { .. })
        ));
    }

    #[test]
    fn directions_are_unit() {
        for n in 1..=5 {
            let d = sample_directions(n, 50, 3);
            assert!(!d.is_empty());
            for v in d {
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!((norm - 1.0).abs() < 1e-14);
            }
        }
        assert_eq!(sample_directions(4, 10, 9), sample_directions(4, 10, 9));
    }

    #[test]
    fn scan_over_sphere() {
        // tau^2 - |xi|^2 - 1 in three dimensions.
        let l = HyperbolicPolynomial::new(
            2,
            3,
            vec![
                term(2, &[0, 0, 0], 1.0),
                term(0, &[2, 0, 0], -1.0),
                term(0, &[0, 2, 0], -1.0),
                term(0, &[0, 0, 2], -1.0),
                term(0, &[0, 0, 0], -1.0),
            ],
        )
        .unwrap();
        let scan = scan_directions(&l, &sample_directions(3, 50, 0), 2, &Tolerances::default()).unwrap();
        assert_eq!(scan.expansions.len(), 50);
        assert!((scan.min_gap - 2.0).abs() < 1e-12);
        for e in &scan.expansions {
            assert!((e.tau(0, 1) - r(0.5)).norm() < 1e-12);
        }
        let mut buf = Vec::new();
        write_csv(&scan, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 101);
        assert!(text.starts_with("eta_1,eta_2,eta_3,branch,phi,tau0_re"));
    }

    #[test]
    fn real_coefficients_give_conjugate_closed_expansions() {
        // tau^3 - tau xi^2 + i-free lower terms with complex root pairs at second order.
        let l = HyperbolicPolynomial::new(
            3,
            1,
            vec![term(3, &[0], 1.0), term(1, &[2], -4.0), term(1, &[0], 3.0), term(0, &[1], 2.0), term(2, &[0], 1.0)],
        )
        .unwrap();
        let e = root_expansion(&l, &[1.0], 4, &Tolerances::default()).unwrap();
        for b in &e.branches {
            assert!(b[0].im.abs() < 1e-12);
            // Real polynomial with real, distinct phi: each branch is real.
            for c in b {
                assert!(c.im.abs() < 1e-10, "{c}");
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let l = wave(1.0);
        let s = serde_json::to_string(&l).unwrap();
        let back: HyperbolicPolynomial = serde_json::from_str(&s).unwrap();
        assert_eq!(back, l);
        let bad = r#"{"degree":2,"dim":1,"terms":[{"tau":1,"xi":[2],"coeff":[1.0,0.0]}]}"#;
        assert!(serde_json::from_str::<HyperbolicPolynomial>(bad).is_err());
    }
}
