//! Asymptotic integration of `v' = A(t) v` with `A(t) ~ sum t^{-k} A_k`.
//!
//! The standard scheme in the variable `s = 1/t`, with the extra term coming
//! from `d/dt`, yields `M(t)` and diagonal `Lambda(t)` such that
//! `w = M^{-1} v` solves `w' = (Lambda + R) w` with
//!
//! ```text
//! R = M^{-1} (A M - M' - M Lambda) = O(t^{-N-1}).
//! ```
//!
//! The diagonal part is solved in closed form by `E(t)` (anchored at `t0`),
//! and the correction `Q` with `Q' = E^{-1} R E Q`, `Q(t0) = I`, is
//! integrated numerically. Then `v(t) = M(t) E(t) Q(t) M(t0)^{-1} v0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eig, vec_norm, ComplexMatrix, Tolerances, C64};
use crate::series::MatrixSeries;
use crate::standard::{check_distinct, leading_diagonal, standard_recursion, transform};

/// `A(t) = sum_k t^{-k} A_k` with base time `t0`.
#[derive(Clone, Debug)]
pub struct OdeFamily {
    series: MatrixSeries,
    t0: f64,
    skew_leading: bool,
}

impl OdeFamily {
    /// `skew_leading` claims `A_0^H = -A_0`; the claim is checked.
    pub fn new(series: MatrixSeries, t0: f64, skew_leading: bool) -> Result<Self> {
        if !(t0 > 0.0 && t0.is_finite()) {
            return Err(Error::InvalidInput(format!("base time must be positive, got {t0}")));
        }
        if skew_leading {
            let a0 = series.coeff(0);
            let defect = (a0 + &a0.conj_transpose()).max_abs();
            if defect > 1e-12 {
                return Err(Error::InvalidInput(format!(
                    "leading coefficient is not skew-Hermitian (defect {defect:.3e})"
                )));
            }
        }
        Ok(Self {
            series,
            t0,
            skew_leading,
        })
    }

    /// Sets `skew_leading` from the leading coefficient itself.
    pub fn detect(series: MatrixSeries, t0: f64) -> Result<Self> {
        let a0 = series.coeff(0);
        let skew = (a0 + &a0.conj_transpose()).max_abs() <= 1e-12;
        Self::new(series, t0, skew)
    }

    pub fn series(&self) -> &MatrixSeries {
        &self.series
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn skew_leading(&self) -> bool {
        self.skew_leading
    }

    pub fn dim(&self) -> usize {
        self.series.dim()
    }

    /// `A(t)`.
    pub fn evaluate(&self, t: f64) -> ComplexMatrix {
        self.series.evaluate(C64::new(1.0 / t, 0.0))
    }
}

/// Diagonaliser and diagonal part in `1/t`, with the remainder polynomial.
#[derive(Clone, Debug)]
pub struct OdeDiagonalisation {
    pub m: MatrixSeries,
    pub lambda: MatrixSeries,
    pub order: usize,
    /// `A M - M' - M Lambda` as a polynomial in `1/t`, round-off cleaned
    /// through `order`.
    numerator: MatrixSeries,
    t0: f64,
}

/// Runs the scheme to order `n`.
pub fn asymptotic_diagonalize_ode(f: &OdeFamily, n: usize, tol: &Tolerances) -> Result<OdeDiagonalisation> {
    let a = &f.series;
    let d = eig(a.coeff(0), tol.eig)?;
    let m0 = d.vectors;
    let m0_inv = m0.inverse().map_err(|_| Error::Singular)?;
    let at = transform(a, &m0, &m0_inv, n);
    let lambda0 = leading_diagonal(&at, tol)?;
    check_distinct(&lambda0, tol)?;
    let (t, lambda) = standard_recursion(&at, &lambda0, n, tol.sep_min, true)?;
    let m = t.left_mul(&m0);
    let numerator = remainder_numerator(a, &m, &lambda)?;
    Ok(OdeDiagonalisation {
        m,
        lambda,
        order: n,
        numerator,
        t0: f.t0,
    })
}

fn remainder_numerator(a: &MatrixSeries, m: &MatrixSeries, lambda: &MatrixSeries) -> Result<MatrixSeries> {
    let n = lambda.order();
    let dim = a.dim();
    let am = a.mul_polynomial(m)?;
    let ml = m.mul_polynomial(lambda)?;
    // d/dt s^k = -k s^{k+1}
    let mut dm = vec![ComplexMatrix::zeros(dim)];
    for k in 0..=m.order() {
        dm.push(m.coeff(k).scale_real(-(k as f64)));
    }
    let dm = MatrixSeries::new(dm)?;
    let top = am.order().max(ml.order()).max(dm.order());
    let mut out = am.extend_to(top).sub(&ml.extend_to(top))?.sub(&dm.extend_to(top))?;
    let noise = 1e3 * f64::EPSILON * a.scale_norm().max(1.0) * m.scale_norm().max(1.0) * (n + 1) as f64;
    for k in 0..=n.min(top) {
        if out.coeff(k).max_abs() <= noise {
            *out.coeff_mut(k) = ComplexMatrix::zeros(dim);
        }
    }
    Ok(out)
}

impl OdeDiagonalisation {
    pub fn m_at(&self, t: f64) -> ComplexMatrix {
        self.m.evaluate(C64::new(1.0 / t, 0.0))
    }

    /// `R(t) = M^{-1} (A M - M' - M Lambda)`.
    pub fn remainder(&self, t: f64) -> Result<ComplexMatrix> {
        let s = C64::new(1.0 / t, 0.0);
        let lu = self.m.evaluate(s).lu().map_err(|_| Error::SingularDiagonaliser { rho: s })?;
        let num = self.numerator.evaluate(s);
        let dim = num.dim();
        let mut out = ComplexMatrix::zeros(dim);
        for j in 0..dim {
            out.set_column(j, &lu.solve(&num.column(j)));
        }
        Ok(out)
    }

    pub fn remainder_norm(&self, t: f64) -> Result<f64> {
        Ok(self.remainder(t)?.norm2())
    }

    /// Exponents `int_{t0}^t lambda_j(s) ds` of the diagonal fundamental
    /// solution.
    pub fn phases(&self, t: f64) -> Vec<C64> {
        phases(&self.lambda, self.t0, t)
    }

    /// `E(t)`.
    pub fn fundamental(&self, t: f64) -> ComplexMatrix {
        fundamental_diagonal(&self.lambda, self.t0, t)
    }

    /// `E(t)^{-1} R(t) E(t)`, formed from phase differences.
    pub fn conjugated_remainder(&self, t: f64) -> Result<ComplexMatrix> {
        let r = self.remainder(t)?;
        let p = self.phases(t);
        Ok(ComplexMatrix::from_fn(r.dim(), |i, j| r[(i, j)] * (p[j] - p[i]).exp()))
    }
}

fn phases(lambda: &MatrixSeries, t0: f64, t: f64) -> Vec<C64> {
    let dim = lambda.dim();
    (0..dim)
        .map(|j| {
            let mut acc = lambda.coeff(0)[(j, j)] * (t - t0);
            if lambda.order() >= 1 {
                acc += lambda.coeff(1)[(j, j)] * (t / t0).ln();
            }
            for k in 2..=lambda.order() {
                let e = 1 - k as i32;
                acc += lambda.coeff(k)[(j, j)] * ((t0.powi(e) - t.powi(e)) / (k - 1) as f64);
            }
            acc
        })
        .collect()
}

/// Closed-form `exp(int_{t0}^t Lambda(s) ds)` for diagonal `Lambda` in `1/s`.
pub fn fundamental_diagonal(lambda: &MatrixSeries, t0: f64, t: f64) -> ComplexMatrix {
    let p = phases(lambda, t0, t);
    ComplexMatrix::from_diag(&p.iter().map(|z| z.exp()).collect::<Vec<_>>())
}

/// How the correction `Q` is computed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeanoBakerMode {
    /// Fourth-order time stepping of `Q' = 𝓡 Q`.
    Volterra,
    /// `depth` Picard iterations `Q <- I + int 𝓡 Q` with cumulative
    /// Simpson quadrature, i.e. the series truncated after `depth` iterated
    /// integrals.
    Picard { depth: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeanoBakerOptions {
    pub mode: PeanoBakerMode,
    /// Largest quadrature step.
    pub quad_step: f64,
    /// Abort when `int ||𝓡||` exceeds this.
    pub blowup_limit: f64,
}

impl Default for PeanoBakerOptions {
    fn default() -> Self {
        Self {
            mode: PeanoBakerMode::Volterra,
            quad_step: 0.05,
            blowup_limit: 50.0,
        }
    }
}

/// `Q` at the requested times together with the quantities needed for its
/// a-priori bounds.
#[derive(Clone, Debug)]
pub struct PeanoBakerResult {
    pub times: Vec<f64>,
    pub q: Vec<ComplexMatrix>,
    /// `int_{t0}^{T} ||𝓡(s)|| ds`.
    pub integral_norm: f64,
    /// `int_{t0}^{T} trace 𝓡(s) ds`.
    pub integral_trace: C64,
    /// `||Q(T)|| <= exp(int ||𝓡||)` holds.
    pub bound_holds: bool,
}

/// Solves `Q' = rcal(t) Q`, `Q(times[0]) = I`, reporting `Q` at every entry
/// of the increasing list `times`.
pub fn peano_baker<F>(rcal: F, times: &[f64], opts: &PeanoBakerOptions) -> Result<PeanoBakerResult>
where
    F: Fn(f64) -> Result<ComplexMatrix>,
{
    if times.is_empty() || times.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::InvalidInput("sample times must be increasing".into()));
    }
    if !(opts.quad_step > 0.0) {
        return Err(Error::InvalidInput("quadrature step must be positive".into()));
    }
    if let PeanoBakerMode::Picard { depth } = opts.mode {
        if depth == 0 {
            return Err(Error::InvalidInput("Peano-Baker depth must be at least 1".into()));
        }
    }
    // Quadrature nodes: each segment split into equal steps, with midpoints.
    let mut nodes = vec![times[0]];
    let mut sample_idx = vec![0];
    for w in times.windows(2) {
        let len = w[1] - w[0];
        let steps = ((len / opts.quad_step).ceil() as usize).max(if len > 0.0 { 1 } else { 0 });
        for i in 1..=steps {
            let t = if i == steps { w[1] } else { w[0] + len * i as f64 / steps as f64 };
            nodes.push(0.5 * (nodes.last().unwrap() + t));
            nodes.push(t);
        }
        sample_idx.push(nodes.len() - 1);
    }
    let values: Vec<ComplexMatrix> = nodes.iter().map(|&t| rcal(t)).collect::<Result<_>>()?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::BlowUp("remainder is not finite on the integration interval".into()));
    }
    let dim = values[0].dim();

    // Simpson on each (left, mid, right) triple.
    let mut integral_norm = 0.0;
    let mut integral_trace = C64::new(0.0, 0.0);
    let norms: Vec<f64> = values.iter().map(|v| v.norm2()).collect();
    for i in (0..nodes.len() - 1).step_by(2) {
        let h = nodes[i + 2] - nodes[i];
        integral_norm += h / 6.0 * (norms[i] + 4.0 * norms[i + 1] + norms[i + 2]);
        integral_trace += (values[i].trace() + values[i + 1].trace().scale(4.0) + values[i + 2].trace()) * (h / 6.0);
        if integral_norm > opts.blowup_limit {
            return Err(Error::BlowUp(format!(
                "integral of the conjugated remainder exceeds {} by t = {}",
                opts.blowup_limit,
                nodes[i + 2]
            )));
        }
    }

    let path: Vec<ComplexMatrix> = match opts.mode {
        PeanoBakerMode::Volterra => {
            let mut q = ComplexMatrix::identity(dim);
            let mut out = vec![q.clone()];
            for i in (0..nodes.len() - 1).step_by(2) {
                let h = nodes[i + 2] - nodes[i];
                let (r0, rm, r1) = (&values[i], &values[i + 1], &values[i + 2]);
                let k1 = r0 * &q;
                let k2 = rm * &(&q + &k1.scale_real(0.5 * h));
                let k3 = rm * &(&q + &k2.scale_real(0.5 * h));
                let k4 = r1 * &(&q + &k3.scale_real(h));
                let incr = &(&k1 + &k2.scale_real(2.0)) + &(&k3.scale_real(2.0) + &k4);
                q = &q + &incr.scale_real(h / 6.0);
                out.push(q.clone());
            }
            // `out` holds values at the right end of every step.
            let mut full = Vec::with_capacity(nodes.len());
            for (k, q) in out.into_iter().enumerate() {
                if k > 0 {
                    full.push(q.clone());
                }
                full.push(q);
            }
            full
        }
        PeanoBakerMode::Picard { depth } => {
            let mut q: Vec<ComplexMatrix> = vec![ComplexMatrix::identity(dim); nodes.len()];
            for _ in 0..depth {
                let f: Vec<ComplexMatrix> = values.iter().zip(&q).map(|(r, q)| r * q).collect();
                let mut next = Vec::with_capacity(nodes.len());
                let mut acc = ComplexMatrix::identity(dim);
                next.push(acc.clone());
                for i in (0..nodes.len() - 1).step_by(2) {
                    let h = nodes[i + 2] - nodes[i];
                    let (f0, fm, f1) = (&f[i], &f[i + 1], &f[i + 2]);
                    // Quadratic through the three nodes, integrated to the
                    // midpoint and to the right end.
                    let half = &(&f0.scale_real(5.0) + &fm.scale_real(8.0)) - f1;
                    next.push(&acc + &half.scale_real(h / 24.0));
                    let full = &(f0 + &fm.scale_real(4.0)) + f1;
                    acc += &full.scale_real(h / 6.0);
                    next.push(acc.clone());
                }
                q = next;
            }
            q
        }
    };
    let q: Vec<ComplexMatrix> = sample_idx.iter().map(|&i| path[i].clone()).collect();
    let bound_holds = q.last().unwrap().norm2() <= integral_norm.exp() * (1.0 + 1e-12);
    Ok(PeanoBakerResult {
        times: times.to_vec(),
        q,
        integral_norm,
        integral_trace,
        bound_holds,
    })
}

/// Output of [`wkb_solve`].
#[derive(Clone, Debug)]
pub struct WkbSolution {
    pub m: MatrixSeries,
    pub lambda: MatrixSeries,
    pub times: Vec<f64>,
    /// `Q(t)` at `times`, with `Q(t0) = I`.
    pub q_samples: Vec<ComplexMatrix>,
    /// Estimate of `Q(infinity)`: `Q` at the last sample time.
    pub q_inf: ComplexMatrix,
    /// `int_{T}^{infinity} ||𝓡||`, estimated from the decay of `||R||`.
    pub q_tail_bound: f64,
    /// `v(t)` at `times`.
    pub v: Vec<Vec<C64>>,
    pub integral_trace: C64,
    pub det_q_inf: C64,
    pub bound_holds: bool,
}

impl WkbSolution {
    /// `|det Q_inf - exp(int trace 𝓡)|`.
    pub fn liouville_defect(&self) -> f64 {
        (self.det_q_inf - self.integral_trace.exp()).norm()
    }

    pub fn v_end(&self) -> &[C64] {
        self.v.last().expect("at least one sample")
    }
}

/// Integrates from `t0` to `t_end`, reporting the solution at `samples`
/// log-spaced times (at least the two end points).
pub fn wkb_solve(
    f: &OdeFamily,
    v0: &[C64],
    t_end: f64,
    n: usize,
    samples: usize,
    opts: &PeanoBakerOptions,
    tol: &Tolerances,
) -> Result<WkbSolution> {
    if !f.skew_leading {
        return Err(Error::InvalidInput(
            "asymptotic integration needs a skew-Hermitian leading coefficient".into(),
        ));
    }
    if v0.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: v0.len(),
        });
    }
    if !(t_end >= f.t0) {
        return Err(Error::InvalidInput(format!("end time {t_end} precedes base time {}", f.t0)));
    }
    let d = asymptotic_diagonalize_ode(f, n, tol)?;
    let times = sample_times(f.t0, t_end, samples);
    let pb = peano_baker(|t| d.conjugated_remainder(t), &times, opts)?;
    let w0 = d
        .m_at(f.t0)
        .lu()
        .map_err(|_| Error::SingularDiagonaliser { rho: C64::new(1.0 / f.t0, 0.0) })?
        .solve(v0);
    let v = times
        .iter()
        .zip(&pb.q)
        .map(|(&t, q)| {
            let eqw = d.fundamental(t).mul_vec(&q.mul_vec(&w0));
            d.m_at(t).mul_vec(&eqw)
        })
        .collect();
    let q_inf = pb.q.last().unwrap().clone();
    let r_end = d.remainder_norm(t_end)?;
    let q_tail_bound = r_end * t_end / n.max(1) as f64;
    Ok(WkbSolution {
        m: d.m,
        lambda: d.lambda,
        times,
        det_q_inf: q_inf.det(),
        q_inf,
        q_samples: pb.q,
        q_tail_bound,
        v,
        integral_trace: pb.integral_trace,
        bound_holds: pb.bound_holds,
    })
}

fn sample_times(t0: f64, t_end: f64, samples: usize) -> Vec<f64> {
    let count = samples.max(2);
    if t_end == t0 {
        return vec![t0];
    }
    let mut out: Vec<f64> = (0..count)
        .map(|i| t0 * (t_end / t0).powf(i as f64 / (count - 1) as f64))
        .collect();
    out[0] = t0;
    out[count - 1] = t_end;
    out
}

/// Reference solution by classical fourth-order stepping with Richardson
/// step halving until the relative change is below `rtol`.
pub fn reference_solve(f: &OdeFamily, v0: &[C64], times: &[f64], rtol: f64) -> Result<Vec<Vec<C64>>> {
    let mut h = 0.1;
    let mut coarse = rk4_path(f, v0, times, h);
    for _ in 0..16 {
        h *= 0.5;
        let fine = rk4_path(f, v0, times, h);
        let mut worst: f64 = 0.0;
        for (a, b) in coarse.iter().zip(&fine) {
            let diff: Vec<C64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
            worst = worst.max(vec_norm(&diff) / 15.0 / vec_norm(b).max(f64::MIN_POSITIVE));
        }
        if worst <= rtol {
            return Ok(fine
                .iter()
                .zip(&coarse)
                .map(|(b, a)| b.iter().zip(a).map(|(y, x)| y + (y - x) / 15.0).collect())
                .collect());
        }
        coarse = fine;
    }
    Err(Error::NonConvergence { iterations: 16 })
}

fn rk4_path(f: &OdeFamily, v0: &[C64], times: &[f64], h: f64) -> Vec<Vec<C64>> {
    let mut v = v0.to_vec();
    let mut out = vec![v.clone()];
    let axpy = |v: &[C64], k: &[C64], s: f64| -> Vec<C64> { v.iter().zip(k).map(|(a, b)| a + b * s).collect() };
    for w in times.windows(2) {
        let len = w[1] - w[0];
        let steps = (len / h).ceil().max(1.0) as usize;
        let dt = len / steps as f64;
        for i in 0..steps {
            let t = w[0] + dt * i as f64;
            let k1 = f.evaluate(t).mul_vec(&v);
            let k2 = f.evaluate(t + 0.5 * dt).mul_vec(&axpy(&v, &k1, 0.5 * dt));
            let k3 = f.evaluate(t + 0.5 * dt).mul_vec(&axpy(&v, &k2, 0.5 * dt));
            let k4 = f.evaluate(t + dt).mul_vec(&axpy(&v, &k3, dt));
            for j in 0..v.len() {
                v[j] += (k1[j] + k2[j] * 2.0 + k3[j] * 2.0 + k4[j]) * (dt / 6.0);
            }
        }
        out.push(v.clone());
    }
    out
}
