//! Truncated power series `sum_{k<=N} rho^k A_k` with square complex matrix
//! coefficients.
//!
//! The retained order `N` is explicit metadata. Binary operations keep the
//! smaller of the two operand orders, since coefficients beyond it are not
//! known for both operands.

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixSeries {
    dim: usize,
    coeffs: Vec<ComplexMatrix>,
}

impl MatrixSeries {
    /// Builds a series from coefficients `A_0, ..., A_N`.
    pub fn new(coeffs: Vec<ComplexMatrix>) -> Result<Self> {
        let first = coeffs
            .first()
            .ok_or_else(|| Error::InvalidInput("series needs at least one coefficient".into()))?;
        let dim = first.dim();
        for c in &coeffs {
            c.check_same_dim(first)?;
            if !c.is_finite() {
                return Err(Error::InvalidInput("series coefficient has non-finite entries".into()));
            }
        }
        Ok(Self { dim, coeffs })
    }

    pub fn zeros(dim: usize, order: usize) -> Self {
        Self {
            dim,
            coeffs: vec![ComplexMatrix::zeros(dim); order + 1],
        }
    }

    pub fn identity(dim: usize, order: usize) -> Self {
        Self::constant(ComplexMatrix::identity(dim), order)
    }

    pub fn constant(m: ComplexMatrix, order: usize) -> Self {
        let dim = m.dim();
        let mut s = Self::zeros(dim, order);
        s.coeffs[0] = m;
        s
    }

    /// `I + rho^power * k`, truncated at `order`.
    pub fn unipotent(k: &ComplexMatrix, power: usize, order: usize) -> Self {
        let mut s = Self::identity(k.dim(), order);
        if power <= order {
            s.coeffs[power] = k.clone();
        }
        s
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[ComplexMatrix] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> &ComplexMatrix {
        &self.coeffs[k]
    }

    pub fn coeff_mut(&mut self, k: usize) -> &mut ComplexMatrix {
        &mut self.coeffs[k]
    }

    /// Coefficient `k`, or zero beyond the retained order.
    pub fn coeff_or_zero(&self, k: usize) -> ComplexMatrix {
        self.coeffs
            .get(k)
            .cloned()
            .unwrap_or_else(|| ComplexMatrix::zeros(self.dim))
    }

    pub fn truncate(&self, order: usize) -> Self {
        let keep = (order + 1).min(self.coeffs.len());
        Self {
            dim: self.dim,
            coeffs: self.coeffs[..keep].to_vec(),
        }
    }

    /// Pads with zero coefficients up to `order`. For an exactly polynomial
    /// family this raises the known order; the higher coefficients really are
    /// zero.
    pub fn extend_to(&self, order: usize) -> Self {
        let mut s = self.clone();
        while s.coeffs.len() < order + 1 {
            s.coeffs.push(ComplexMatrix::zeros(self.dim));
        }
        s
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let order = self.order().min(other.order());
        Ok(Self {
            dim: self.dim,
            coeffs: (0..=order).map(|k| &self.coeffs[k] + &other.coeffs[k]).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let order = self.order().min(other.order());
        Ok(Self {
            dim: self.dim,
            coeffs: (0..=order).map(|k| &self.coeffs[k] - &other.coeffs[k]).collect(),
        })
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|c| c.scale(s)).collect(),
        }
    }

    /// Cauchy product truncated at the smaller operand order.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let order = self.order().min(other.order());
        Ok(self.product_up_to(other, order))
    }

    /// Untruncated polynomial product of the two retained parts; the result
    /// has order `order(self) + order(other)`.
    pub fn mul_polynomial(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(self.product_up_to(other, self.order() + other.order()))
    }

    fn product_up_to(&self, other: &Self, order: usize) -> Self {
        let mut coeffs = vec![ComplexMatrix::zeros(self.dim); order + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(order + 1) {
            if a.max_abs() == 0.0 {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(order + 1 - i) {
                coeffs[i + j] += &(a * b);
            }
        }
        Self {
            dim: self.dim,
            coeffs,
        }
    }

    /// Multiplies every coefficient on the left by a constant matrix.
    pub fn left_mul(&self, m: &ComplexMatrix) -> Self {
        Self {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|c| m * c).collect(),
        }
    }

    /// Multiplies every coefficient on the right by a constant matrix.
    pub fn right_mul(&self, m: &ComplexMatrix) -> Self {
        Self {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|c| c * m).collect(),
        }
    }

    /// Series inverse to the retained order. Requires an invertible leading
    /// coefficient with condition below `1 / tol_eig`.
    pub fn invert(&self, tol_eig: f64) -> Result<Self> {
        let a0 = &self.coeffs[0];
        let cond = a0.condition();
        if !(cond < 1.0 / tol_eig) {
            return Err(Error::SingularLeadingCoefficient { cond });
        }
        let lu = a0.lu().map_err(|_| Error::SingularLeadingCoefficient { cond })?;
        let a0_inv = lu.inverse();
        let mut inv: Vec<ComplexMatrix> = Vec::with_capacity(self.coeffs.len());
        inv.push(a0_inv.clone());
        for k in 1..self.coeffs.len() {
            let mut acc = ComplexMatrix::zeros(self.dim);
            for i in 1..=k {
                if self.coeffs[i].max_abs() == 0.0 {
                    continue;
                }
                acc += &(&self.coeffs[i] * &inv[k - i]);
            }
            inv.push(-&(&a0_inv * &acc));
        }
        Ok(Self {
            dim: self.dim,
            coeffs: inv,
        })
    }

    /// `F^{-1} * self * F`, truncated at the smaller order.
    pub fn similarity(&self, f: &Self, tol_eig: f64) -> Result<Self> {
        let f_inv = f.invert(tol_eig)?;
        f_inv.mul(&self.mul(f)?)
    }

    /// Horner evaluation at `rho`.
    pub fn evaluate(&self, rho: C64) -> ComplexMatrix {
        let mut acc = self.coeffs[self.order()].clone();
        for c in self.coeffs.iter().rev().skip(1) {
            acc = &acc.scale(rho) + c;
        }
        acc
    }

    /// Largest Frobenius norm over the coefficients.
    pub fn scale_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_fro()).fold(0.0, f64::max)
    }

    /// Diagonal entries of every coefficient: `out[j][k]` is entry `(j, j)` of
    /// coefficient `k`.
    pub fn diagonal_branches(&self) -> Vec<Vec<C64>> {
        (0..self.dim)
            .map(|j| self.coeffs.iter().map(|c| c[(j, j)]).collect())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn k_matrix() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[
            vec![r(0.0), C64::new(1.0, -0.5)],
            vec![r(0.25), C64::new(0.0, 2.0)],
        ])
        .unwrap()
    }

    #[test]
    fn additive_and_multiplicative_identity() {
        let a = MatrixSeries::new(vec![k_matrix(), k_matrix().scale(r(2.0))]).unwrap();
        assert_eq!(a.add(&MatrixSeries::zeros(2, 1)).unwrap(), a);
        assert_eq!(a.mul(&MatrixSeries::identity(2, 3)).unwrap(), a);
    }

    #[test]
    fn subtract_identity_leaves_perturbation() {
        let k = k_matrix();
        let f = MatrixSeries::unipotent(&k, 1, 3);
        let d = f.sub(&MatrixSeries::identity(2, 3)).unwrap();
        assert_eq!(d.coeff(0), &ComplexMatrix::zeros(2));
        assert_eq!(d.coeff(1), &k);
    }

    #[test]
    fn scalar_distributes() {
        let a0 = k_matrix();
        let a1 = ComplexMatrix::identity(2);
        let s = MatrixSeries::new(vec![a0.clone(), a1.clone()]).unwrap().scale(r(2.0));
        assert_eq!(s.coeff(0), &a0.scale(r(2.0)));
        assert_eq!(s.coeff(1), &a1.scale(r(2.0)));
    }

    #[test]
    fn telescoping_product() {
        let k = k_matrix();
        let p = MatrixSeries::unipotent(&k, 1, 3)
            .mul(&MatrixSeries::unipotent(&k.scale(r(-1.0)), 1, 3))
            .unwrap();
        assert_eq!(p.coeff(0), &ComplexMatrix::identity(2));
        assert_eq!(p.coeff(1).max_abs(), 0.0);
        assert!(p.coeff(2).approx_eq(&(&k * &k).scale(r(-1.0)), 1e-15));
        assert_eq!(p.coeff(3).max_abs(), 0.0);
    }

    #[test]
    fn unipotent_inverse_is_geometric() {
        let k = k_matrix();
        let inv = MatrixSeries::unipotent(&k, 1, 4).invert(1e-10).unwrap();
        let mut power = ComplexMatrix::identity(2);
        for n in 0..=4 {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!(inv.coeff(n).approx_eq(&power.scale(r(sign)), 1e-13));
            power = &power * &k;
        }
    }

    #[test]
    fn inverse_of_general_leading_term() {
        let m0 = ComplexMatrix::from_real_rows(&[vec![1.0, 1.0], vec![1.0, -1.0]]).unwrap();
        let m1 = k_matrix();
        let s = MatrixSeries::new(vec![m0.clone(), &m0 * &m1, ComplexMatrix::identity(2)]).unwrap();
        let inv = s.invert(1e-10).unwrap();
        let prod = s.mul(&inv).unwrap();
        assert!(prod.coeff(0).approx_eq(&ComplexMatrix::identity(2), 1e-14));
        assert!(prod.coeff(1).max_abs() < 1e-14);
        assert!(prod.coeff(2).max_abs() < 1e-14);
    }

    #[test]
    fn singular_leading_coefficient_rejected() {
        let s = MatrixSeries::constant(ComplexMatrix::zeros(2), 2);
        assert!(matches!(s.invert(1e-10), Err(Error::SingularLeadingCoefficient { .. })));
    }

    #[test]
    fn evaluation_basics() {
        let a0 = k_matrix();
        let a1 = ComplexMatrix::identity(2);
        let s = MatrixSeries::new(vec![a0.clone(), a1.clone()]).unwrap();
        assert_eq!(s.evaluate(r(0.0)), a0);
        assert!(s.evaluate(r(1.0)).approx_eq(&(&a0 + &a1), 1e-15));
    }

    #[test]
    fn mixing_orders_takes_minimum() {
        let a = MatrixSeries::identity(2, 5);
        let b = MatrixSeries::identity(2, 2);
        assert_eq!(a.add(&b).unwrap().order(), 2);
        assert_eq!(a.mul(&b).unwrap().order(), 2);
        assert_eq!(a.mul_polynomial(&b).unwrap().order(), 7);
        assert!(matches!(
            a.add(&MatrixSeries::identity(3, 2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    fn series_strategy(dim: usize, order: usize) -> impl Strategy<Value = MatrixSeries> {
        prop::collection::vec(-4i32..5, dim * dim * (order + 1)).prop_map(move |v| {
            // Small integers keep products exact so ring axioms hold bit for bit.
            let coeffs = (0..=order)
                .map(|k| {
                    ComplexMatrix::from_fn(dim, |i, j| {
                        let x = v[k * dim * dim + i * dim + j];
                        C64::new(x as f64, (x % 3) as f64)
                    })
                })
                .collect();
            MatrixSeries::new(coeffs).unwrap()
        })
    }

    proptest! {
        #[test]
        fn ring_axioms_at_truncation(
            (a, b, c) in (1usize..=4, 0usize..=6).prop_flat_map(|(m, n)| {
                (series_strategy(m, n), series_strategy(m, n), series_strategy(m, n))
            })
        ) {
            let ab_c = a.mul(&b).unwrap().mul(&c).unwrap();
            let a_bc = a.mul(&b.mul(&c).unwrap()).unwrap();
            prop_assert_eq!(ab_c, a_bc);
            let lhs = a.mul(&b.add(&c).unwrap()).unwrap();
            let rhs = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn evaluation_homomorphism_slope() {
        // ||eval(s t) - eval(s) eval(t)|| ~ rho^{N+1}.
        let n = 3;
        let s = MatrixSeries::new(
            (0..=n)
                .map(|k| ComplexMatrix::from_fn(3, |i, j| C64::new((i + 2 * j + k) as f64 * 0.3 - 1.0, (i * k) as f64 * 0.1)))
                .collect(),
        )
        .unwrap();
        let t = MatrixSeries::new(
            (0..=n)
                .map(|k| ComplexMatrix::from_fn(3, |i, j| C64::new(((i * j + k) % 4) as f64 - 1.5, 0.2 * j as f64)))
                .collect(),
        )
        .unwrap();
        let st = s.mul(&t).unwrap();
        let grid: Vec<f64> = (3..=10).map(|e| 2f64.powi(-e)).collect();
        let errs: Vec<f64> = grid
            .iter()
            .map(|&rho| {
                let z = r(rho);
                (&st.evaluate(z) - &(&s.evaluate(z) * &t.evaluate(z))).norm_fro()
            })
            .collect();
        let slope = crate::oracle::fit_slope(&grid, &errs).unwrap();
        assert!(slope >= n as f64 + 0.8, "slope {slope}");
    }
}
