//! Eigendecomposition of a single constant matrix.
//!
//! Eigenvalues come from a Householder reduction to Hessenberg form followed
//! by single-shift complex QR iteration. Eigenvectors are not obtained by
//! triangular back-substitution; instead each eigenvalue cluster's eigenspace
//! is read off as the numerical null space of `A - mu I` (one-sided Jacobi
//! SVD). That keeps semisimple repeated eigenvalues, which are the normal
//! case for the leading coefficients handled by the block scheme, well
//! behaved.

use serde::{Deserialize, Serialize};

use super::matrix::{vec_norm, ComplexMatrix, C64, MAX_DIM, ZERO};
use super::svd::{singular_values, svd, trailing_right_vectors};
use crate::error::{Error, Result};

/// Eigenvalues closer than this (relative to `||A||_F`) are treated as one
/// cluster when extracting eigenvectors.
const CLUSTER_RTOL: f64 = 1e-6;
/// Singular values of `A - mu I` below this (relative to `||A||_F`) count as
/// zero when measuring geometric multiplicity.
const NULL_RTOL: f64 = 1e-8;
const QR_ITERATIONS_PER_EIGENVALUE: usize = 60;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EigenDecomposition {
    /// Eigenvalues in canonical order: real part descending, then imaginary
    /// part descending.
    pub values: Vec<C64>,
    /// Right eigenvectors as columns, column `i` pairs with `values[i]`.
    pub vectors: ComplexMatrix,
    /// Condition number of `vectors` in the spectral norm.
    pub cond: f64,
}

impl EigenDecomposition {
    pub fn diag(&self) -> ComplexMatrix {
        ComplexMatrix::from_diag(&self.values)
    }

    /// `||A V - V diag(values)||_F`
    pub fn residual(&self, a: &ComplexMatrix) -> f64 {
        (&(a * &self.vectors) - &(&self.vectors * &self.diag())).norm_fro()
    }
}

/// Outcome of a diagonability test.
#[derive(Clone, Debug)]
pub enum Diagonability {
    Diagonable(EigenDecomposition),
    Defective {
        /// Representative eigenvalue of the offending cluster.
        value: C64,
        /// Number of eigenvalues in the cluster.
        algebraic: usize,
        /// Dimension of the numerical null space of `A - value I`.
        geometric: usize,
    },
}

impl Diagonability {
    pub fn is_diagonable(&self) -> bool {
        matches!(self, Diagonability::Diagonable(_))
    }
}

fn check_input(a: &ComplexMatrix) -> Result<()> {
    if a.dim() > MAX_DIM {
        return Err(Error::TooLarge(a.dim()));
    }
    if a.dim() == 0 {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    if !a.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    Ok(())
}

/// Eigenvalues only, in canonical order. Works for defective matrices too.
pub fn eigenvalues(a: &ComplexMatrix) -> Result<Vec<C64>> {
    check_input(a)?;
    let mut values = qr_eigenvalues(a)?;
    let order = canonical_order(&values);
    values = order.iter().map(|&i| values[i]).collect();
    Ok(values)
}

/// Full eigendecomposition of a diagonable matrix.
pub fn eig(a: &ComplexMatrix, tol_eig: f64) -> Result<EigenDecomposition> {
    check_input(a)?;
    let n = a.dim();
    let scale = a.norm_fro();
    if scale == 0.0 {
        return Ok(EigenDecomposition {
            values: vec![ZERO; n],
            vectors: ComplexMatrix::identity(n),
            cond: 1.0,
        });
    }

    let raw = qr_eigenvalues(a)?;
    let clusters = cluster_indices(&raw, CLUSTER_RTOL * scale);

    let mut pairs: Vec<(C64, Vec<C64>)> = Vec::with_capacity(n);
    for members in &clusters {
        let cluster_values: Vec<C64> = members.iter().map(|&i| raw[i]).collect();
        pairs.extend(cluster_eigenpairs(a, &cluster_values, scale, tol_eig)?);
    }

    for (_, v) in pairs.iter_mut() {
        normalise_vector(v);
    }

    let values: Vec<C64> = pairs.iter().map(|p| p.0).collect();
    let order = canonical_order(&values);
    let mut vectors = ComplexMatrix::zeros(n);
    let mut sorted = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &pairs[src].1);
        sorted.push(pairs[src].0);
    }

    let s = singular_values(&vectors);
    let (hi, lo) = (s[0], s[n - 1]);
    let limit = 1.0 / tol_eig;
    if lo <= tol_eig * hi {
        return Err(Error::NotDiagonable {
            cond: if lo > 0.0 { hi / lo } else { f64::INFINITY },
            limit,
        });
    }
    Ok(EigenDecomposition {
        values: sorted,
        vectors,
        cond: hi / lo,
    })
}

/// Eigenpairs for one cluster of nearby eigenvalues.
fn cluster_eigenpairs(
    a: &ComplexMatrix,
    values: &[C64],
    scale: f64,
    tol_eig: f64,
) -> Result<Vec<(C64, Vec<C64>)>> {
    let p = values.len();
    let mu = values.iter().sum::<C64>() / p as f64;
    let (basis, worst, _) = trailing_right_vectors(&a.shifted(mu), p);

    if p == 1 {
        return Ok(vec![(values[0], basis.into_iter().next().unwrap())]);
    }

    if worst <= NULL_RTOL * scale {
        // Semisimple: the cluster spans a p-dimensional invariant subspace.
        let basis = canonical_basis(&basis);
        let restricted = restrict(a, &basis);
        let spread = restricted.shifted(mu);
        if spread.norm_fro() <= tol_eig * scale {
            return Ok(basis.into_iter().map(|v| (mu, v)).collect());
        }
        // Genuinely split inside the subspace: resolve on the shifted block.
        let inner = eig(&spread, tol_eig)?;
        return Ok((0..p)
            .map(|k| {
                let y = inner.vectors.column(k);
                let v = combine(&basis, &y);
                (inner.values[k] + mu, v)
            })
            .collect());
    }

    // Not semisimple at the cluster level: try one eigenvector per eigenvalue
    // and reject if they are numerically dependent.
    let vectors: Vec<Vec<C64>> = values
        .iter()
        .map(|&lambda| trailing_right_vectors(&a.shifted(lambda), 1).0.remove(0))
        .collect();
    let gram = ComplexMatrix::from_fn(p, |i, j| {
        vectors[i].iter().zip(&vectors[j]).map(|(x, y)| x.conj() * y).sum()
    });
    let s = singular_values(&gram);
    let local_cond = (s[0] / s[p - 1]).sqrt();
    let limit = 1.0 / tol_eig.sqrt();
    if !(local_cond < limit) {
        return Err(Error::NotDiagonable {
            cond: local_cond,
            limit,
        });
    }
    Ok(values.iter().copied().zip(vectors).collect())
}

// W^H A W for a basis with orthonormalised columns.
fn restrict(a: &ComplexMatrix, basis: &[Vec<C64>]) -> ComplexMatrix {
    let q = orthonormalise(basis);
    let p = q.len();
    let aq: Vec<Vec<C64>> = q.iter().map(|v| a.mul_vec(v)).collect();
    ComplexMatrix::from_fn(p, |i, j| q[i].iter().zip(&aq[j]).map(|(x, y)| x.conj() * y).sum())
}

fn combine(basis: &[Vec<C64>], coeffs: &[C64]) -> Vec<C64> {
    let q = orthonormalise(basis);
    let n = q[0].len();
    let mut out = vec![ZERO; n];
    for (v, c) in q.iter().zip(coeffs) {
        for (o, x) in out.iter_mut().zip(v) {
            *o += x * c;
        }
    }
    out
}

fn orthonormalise(basis: &[Vec<C64>]) -> Vec<Vec<C64>> {
    let mut q: Vec<Vec<C64>> = Vec::with_capacity(basis.len());
    for v in basis {
        let mut w = v.clone();
        for _ in 0..2 {
            for u in &q {
                let d: C64 = u.iter().zip(&w).map(|(x, y)| x.conj() * y).sum();
                w.iter_mut().zip(u).for_each(|(wi, ui)| *wi -= d * ui);
            }
        }
        let nrm = vec_norm(&w);
        w.iter_mut().for_each(|z| *z /= nrm);
        q.push(w);
    }
    q
}

/// Reduced row-echelon basis of the span of `basis`. Independent of which
/// basis of the subspace was supplied, so eigenspace bases are reproducible.
fn canonical_basis(basis: &[Vec<C64>]) -> Vec<Vec<C64>> {
    let p = basis.len();
    let n = basis[0].len();
    let mut rows: Vec<Vec<C64>> = basis.to_vec();
    let big = rows
        .iter()
        .flat_map(|r| r.iter().map(|z| z.norm()))
        .fold(0.0, f64::max);
    let mut r = 0;
    for c in 0..n {
        if r == p {
            break;
        }
        let (piv, pmax) = (r..p)
            .map(|i| (i, rows[i][c].norm()))
            .fold((r, -1.0), |b, x| if x.1 > b.1 { x } else { b });
        if pmax <= 1e-8 * big {
            continue;
        }
        rows.swap(r, piv);
        let inv = 1.0 / rows[r][c];
        rows[r].iter_mut().for_each(|z| *z *= inv);
        for i in 0..p {
            if i != r {
                let f = rows[i][c];
                if f != ZERO {
                    let pivot_row = rows[r].clone();
                    rows[i].iter_mut().zip(&pivot_row).for_each(|(z, y)| *z -= f * y);
                }
            }
        }
        r += 1;
    }
    rows
}

/// Unit Euclidean norm; the first component of largest modulus is made real
/// and positive.
pub fn normalise_vector(v: &mut [C64]) {
    let nrm = vec_norm(v);
    if nrm == 0.0 {
        return;
    }
    let big = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let lead = v
        .iter()
        .position(|z| z.norm() >= big * (1.0 - 1e-12))
        .unwrap_or(0);
    let phase = v[lead] / v[lead].norm();
    let f = phase.conj() / nrm;
    v.iter_mut().for_each(|z| *z *= f);
    v[lead] = C64::new(v[lead].re, 0.0);
}

/// Diagonability test with a certificate. `tol` plays the role of `tol_eig`.
pub fn is_diagonable(a: &ComplexMatrix, tol: f64) -> Result<Diagonability> {
    check_input(a)?;
    match eig(a, tol) {
        Ok(d) => Ok(Diagonability::Diagonable(d)),
        Err(Error::NotDiagonable { .. }) => {
            let scale = a.norm_fro();
            let raw = qr_eigenvalues(a)?;
            let clusters = cluster_indices(&raw, CLUSTER_RTOL * scale);
            // Report the cluster with the largest multiplicity deficit.
            let mut worst: Option<(C64, usize, usize)> = None;
            for members in &clusters {
                let p = members.len();
                let mu = members.iter().map(|&i| raw[i]).sum::<C64>() / p as f64;
                let s = svd(&a.shifted(mu)).values;
                let cut = NULL_RTOL.max(tol) * s[0].max(scale);
                let geometric = s.iter().filter(|&&x| x <= cut).count().min(p);
                let deficit = p - geometric;
                if deficit > 0 && worst.is_none_or(|w| deficit > w.1 - w.2) {
                    worst = Some((mu, p, geometric));
                }
            }
            let (value, algebraic, geometric) = worst.unwrap_or_else(|| {
                // Ill-conditioned without an identifiable cluster: report
                // the closest pair.
                let mut best = (raw[0], 2, 1, f64::INFINITY);
                for i in 0..raw.len() {
                    for j in (i + 1)..raw.len() {
                        let d = (raw[i] - raw[j]).norm();
                        if d < best.3 {
                            best = ((raw[i] + raw[j]) / 2.0, 2, 1, d);
                        }
                    }
                }
                (best.0, best.1, best.2)
            });
            Ok(Diagonability::Defective {
                value,
                algebraic,
                geometric,
            })
        }
        Err(e) => Err(e),
    }
}

/// Index permutation sorting `values` by real part descending, then
/// imaginary part descending. Real parts that agree to round-off are treated
/// as ties so conjugate pairs order by imaginary part.
pub fn canonical_order(values: &[C64]) -> Vec<usize> {
    let scale = values.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let tie = 1e-12 * scale;
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].re.total_cmp(&values[a].re));
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && (values[idx[end - 1]].re - values[idx[end]].re).abs() <= tie {
            end += 1;
        }
        idx[start..end].sort_by(|&a, &b| values[b].im.total_cmp(&values[a].im));
        start = end;
    }
    idx
}

/// Groups indices whose values are within `radius` (transitive closure).
/// Groups come back in order of first appearance.
pub(crate) fn cluster_indices(values: &[C64], radius: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (values[i] - values[j]).norm() <= radius {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[rj.max(ri)] = rj.min(ri);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        match slot[r] {
            Some(g) => groups[g].push(i),
            None => {
                slot[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }
    groups
}

// ---------------------------------------------------------------------------
// Hessenberg reduction and shifted QR.

fn hessenberg(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.dim();
    let mut h = a.clone();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = ((k + 1)..n).map(|i| h[(i, k)]).collect();
        let xnorm = vec_norm(&x);
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x[0] == ZERO { C64::new(1.0, 0.0) } else { x[0] / x[0].norm() };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vn = vec_norm(&v);
        if vn == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|z| *z /= vn);
        // H <- (I - 2 v v^H) H
        for j in 0..n {
            let d: C64 = v.iter().enumerate().map(|(r, vr)| vr.conj() * h[(k + 1 + r, j)]).sum();
            for (r, vr) in v.iter().enumerate() {
                h[(k + 1 + r, j)] -= vr * d * 2.0;
            }
        }
        // H <- H (I - 2 v v^H)
        for i in 0..n {
            let d: C64 = v.iter().enumerate().map(|(r, vr)| h[(i, k + 1 + r)] * vr).sum();
            for (r, vr) in v.iter().enumerate() {
                h[(i, k + 1 + r)] -= d * vr.conj() * 2.0;
            }
        }
        for i in (k + 2)..n {
            h[(i, k)] = ZERO;
        }
    }
    h
}

// Complex Givens rotation G = [[c, s], [-conj(s), c]] with G [x; y] = [r; 0].
fn givens(x: C64, y: C64) -> (f64, C64) {
    let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
    if r == 0.0 {
        return (1.0, ZERO);
    }
    if x == ZERO {
        return (0.0, y.conj() / r);
    }
    let ax = x.norm();
    (ax / r, (x / ax) * y.conj() / r)
}

fn qr_eigenvalues(a: &ComplexMatrix) -> Result<Vec<C64>> {
    let n = a.dim();
    let mut h = hessenberg(a);
    let mut eig = vec![ZERO; n];
    if n == 1 {
        eig[0] = h[(0, 0)];
        return Ok(eig);
    }
    let eps = f64::EPSILON;
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    let budget = QR_ITERATIONS_PER_EIGENVALUE * n;
    let anorm = h.norm_fro();
    while hi > 0 {
        // Locate the active window [lo, hi].
        let mut lo = hi;
        while lo > 0 {
            let s = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            let s = if s == 0.0 { anorm } else { s };
            if h[(lo, lo - 1)].norm() <= eps * s {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eig[hi] = h[(hi, hi)];
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > budget {
            return Err(Error::NonConvergence { iterations: total });
        }

        let shift = if iter % 11 == 10 {
            h[(hi, hi)] + C64::new(0.75 * h[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };

        for i in lo..=hi {
            h[(i, i)] -= shift;
        }
        let mut rots = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..=hi {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = x * c + s * y;
                h[(k + 1, j)] = -s.conj() * x + y * c;
            }
            rots.push((c, s));
        }
        for (off, &(c, s)) in rots.iter().enumerate() {
            let k = lo + off;
            let top = (k + 2).min(hi);
            for i in lo..=top {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * c + y * s.conj();
                h[(i, k + 1)] = -x * s + y * c;
            }
        }
        for i in lo..=hi {
            h[(i, i)] += shift;
        }
    }
    eig[0] = h[(0, 0)];
    Ok(eig)
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mid = (a + d) * 0.5;
    let l1 = mid + disc;
    let l2 = mid - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn diagonal_input_gives_identity_vectors() {
        let a = ComplexMatrix::from_diag(&[c(1.0, 0.0), c(3.0, 0.0)]);
        let d = eig(&a, 1e-10).unwrap();
        assert_eq!(d.values, vec![c(3.0, 0.0), c(1.0, 0.0)]);
        let expected = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(d.vectors.approx_eq(&expected, 1e-15));
    }

    #[test]
    fn rank_one_block_from_worked_example() {
        // 1/2 [[a, a], [a, a]] with a = 2.
        let a = ComplexMatrix::from_real_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let d = eig(&a, 1e-10).unwrap();
        assert!((d.values[0] - c(2.0, 0.0)).norm() < 1e-14);
        assert!(d.values[1].norm() < 1e-14);
        let s = 1.0 / 2f64.sqrt();
        assert!((d.vectors[(0, 0)] - c(s, 0.0)).norm() < 1e-14);
        assert!((d.vectors[(1, 0)] - c(s, 0.0)).norm() < 1e-14);
        assert!((d.vectors[(0, 1)] - c(s, 0.0)).norm() < 1e-14);
        assert!((d.vectors[(1, 1)] + c(s, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn jordan_block_is_not_diagonable() {
        let a = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(eig(&a, 1e-10), Err(Error::NotDiagonable { .. })));
        match is_diagonable(&a, 1e-10).unwrap() {
            Diagonability::Defective {
                value,
                algebraic,
                geometric,
            } => {
                assert!(value.norm() < 1e-12);
                assert_eq!(algebraic, 2);
                assert_eq!(geometric, 1);
            }
            other => panic!("expected defective, got {other:?}"),
        }
    }

    #[test]
    fn conjugated_jordan_block_is_detected() {
        let j = ComplexMatrix::from_real_rows(&[
            vec![2.0, 1.0, 0.0],
            vec![0.0, 2.0, 0.0],
            vec![0.0, 0.0, -1.0],
        ])
        .unwrap();
        let t = ComplexMatrix::from_real_rows(&[
            vec![1.0, 0.3, -0.2],
            vec![0.5, 1.0, 0.1],
            vec![-0.4, 0.2, 1.0],
        ])
        .unwrap();
        let a = &(&t * &j) * &t.inverse().unwrap();
        assert!(!is_diagonable(&a, 1e-10).unwrap().is_diagonable());
    }

    #[test]
    fn identity_is_diagonable() {
        let d = is_diagonable(&ComplexMatrix::identity(4), 1e-10).unwrap();
        assert!(d.is_diagonable());
    }

    #[test]
    fn semisimple_repeated_eigenvalue() {
        let t = ComplexMatrix::from_real_rows(&[
            vec![1.0, 2.0, 0.0],
            vec![0.0, 1.0, 1.0],
            vec![1.0, 0.0, 1.0],
        ])
        .unwrap();
        let d0 = ComplexMatrix::from_diag(&[c(5.0, 0.0), c(5.0, 0.0), c(-1.0, 0.0)]);
        let a = &(&t * &d0) * &t.inverse().unwrap();
        let d = eig(&a, 1e-10).unwrap();
        assert!(d.residual(&a) <= 1e-10 * a.norm_fro());
        assert!((d.values[0] - c(5.0, 0.0)).norm() < 1e-12);
        assert!((d.values[1] - c(5.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn complex_spectrum_ordering() {
        // Rotation generator: eigenvalues +i, -i.
        let a = ComplexMatrix::from_real_rows(&[vec![0.0, -1.0], vec![1.0, 0.0]]).unwrap();
        let d = eig(&a, 1e-10).unwrap();
        assert!((d.values[0] - c(0.0, 1.0)).norm() < 1e-14);
        assert!((d.values[1] - c(0.0, -1.0)).norm() < 1e-14);
        assert!(d.residual(&a) < 1e-14);
    }

    #[test]
    fn vector_normalisation_convention() {
        let a = ComplexMatrix::from_rows(&[
            vec![c(1.0, 1.0), c(2.0, 0.0), c(0.0, 0.5)],
            vec![c(0.0, -1.0), c(-2.0, 0.0), c(1.0, 0.0)],
            vec![c(0.3, 0.0), c(0.0, 0.0), c(0.5, -0.5)],
        ])
        .unwrap();
        let d = eig(&a, 1e-10).unwrap();
        for j in 0..3 {
            let col = d.vectors.column(j);
            assert!((vec_norm(&col) - 1.0).abs() < 1e-14);
            let big = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let lead = col.iter().position(|z| z.norm() >= big * (1.0 - 1e-12)).unwrap();
            assert_eq!(col[lead].im, 0.0);
            assert!(col[lead].re > 0.0);
        }
    }

    #[test]
    fn oversized_matrix_rejected() {
        let a = ComplexMatrix::identity(65);
        assert!(matches!(eig(&a, 1e-10), Err(Error::TooLarge(65))));
    }
}
