//! One-sided (Hestenes) Jacobi SVD for small complex matrices.
//!
//! Columns of `A V` are orthogonalised by plane rotations; the singular
//! values are the resulting column norms. Small singular values come out with
//! good relative accuracy, which is what the rank and null-space tests need.

use super::matrix::{ComplexMatrix, C64, ONE, ZERO};

const MAX_SWEEPS: usize = 60;

/// Singular values in descending order together with the matching right
/// singular vectors (columns of `v`).
#[derive(Clone, Debug)]
pub struct Svd {
    pub values: Vec<f64>,
    pub v: ComplexMatrix,
}

pub fn svd(a: &ComplexMatrix) -> Svd {
    let n = a.dim();
    // Column-major working copies.
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| a.column(j)).collect();
    let mut vcols: Vec<Vec<C64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { ONE } else { ZERO }).collect())
        .collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: C64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, p, q, c, s, phase);
                rotate(&mut vcols, p, q, c, s, phase);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<(usize, f64)> = cols
        .iter()
        .enumerate()
        .map(|(j, c)| (j, c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()))
        .collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut v = ComplexMatrix::zeros(n);
    for (dst, (src, _)) in order.iter().enumerate() {
        v.set_column(dst, &vcols[*src]);
    }
    Svd {
        values: order.into_iter().map(|(_, s)| s).collect(),
        v,
    }
}

// Rotates columns p and q so that their inner product vanishes.
fn rotate(cols: &mut [Vec<C64>], p: usize, q: usize, c: f64, s: f64, phase: C64) {
    let (lo, hi) = cols.split_at_mut(q);
    let cp = &mut lo[p];
    let cq = &mut hi[0];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let xp = *x;
        let yq = *y;
        *x = xp * c - yq * phase.conj() * s;
        *y = xp * phase * s + yq * c;
    }
}

pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    svd(a).values
}

/// Orthonormal basis (as columns) for the right singular vectors belonging
/// to the `count` smallest singular values, together with the largest of
/// those singular values.
pub fn trailing_right_vectors(a: &ComplexMatrix, count: usize) -> (Vec<Vec<C64>>, f64, Vec<f64>) {
    let s = svd(a);
    let n = a.dim();
    let start = n - count;
    let basis = (start..n).map(|j| s.v.column(j)).collect();
    let worst = if count == 0 { 0.0 } else { s.values[start] };
    (basis, worst, s.values)
}
