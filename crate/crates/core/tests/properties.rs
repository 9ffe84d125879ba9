use asympdiag::oracle::{exact_projection, fit_above_floor, random_family, random_hermitian_family};
use asympdiag::standard::{diagonalize_from, spectral_bound};
use asympdiag::{
    block_diagonalize, diagonalize, eigenprojection, BlockMode, ComplexMatrix, MatrixSeries, Tolerances, C64,
};
use proptest::prelude::*;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 24,
        ..ProptestConfig::default()
    }
}

fn rho(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Pairs each branch of `b` with the branch of `a` whose leading value is
/// closest and returns the largest coefficient difference.
fn branch_distance(a: &[Vec<C64>], b: &[Vec<C64>]) -> f64 {
    b.iter()
        .map(|bj| {
            let aj = a
                .iter()
                .min_by(|x, y| (x[0] - bj[0]).norm().total_cmp(&(y[0] - bj[0]).norm()))
                .unwrap();
            aj.iter().zip(bj).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn residual_decays_at_contracted_rate(seed in 0u64..10_000, dim in 2usize..=4, n in 1usize..=5) {
        let a = random_family(dim, n, seed);
        let r = diagonalize(&a, n, &tol()).unwrap();
        let (x, y): (Vec<f64>, Vec<f64>) = r.residual_samples.iter().copied().unzip();
        let fit = fit_above_floor(&x, &y, 0.0).unwrap();
        prop_assert!(fit.accepts(n), "{fit:?} for order {n}");
    }

    #[test]
    fn spectral_bound_holds(seed in 0u64..10_000, dim in 2usize..=4, n in 1usize..=4) {
        let a = random_family(dim, n, seed);
        let r = diagonalize(&a, n, &tol()).unwrap();
        for &x in asympdiag::oracle::default_grid().iter().filter(|&&x| x <= r.empirical_radius) {
            let b = spectral_bound(&a, &r, rho(x)).unwrap();
            prop_assert!(b.verified, "rho {x}: distance {} bound {}", b.distance, b.bound);
        }
    }

    #[test]
    fn lambda_independent_of_eigenvector_scaling(seed in 0u64..10_000, dim in 2usize..=4, n in 1usize..=4,
                                                 scales in proptest::collection::vec((0.2f64..5.0, -3.0f64..3.0), 4)) {
        let a = random_family(dim, n, seed);
        let r1 = diagonalize(&a, n, &tol()).unwrap();
        let mut m0 = r1.m0.clone();
        for (j, &(modulus, arg)) in scales.iter().enumerate().take(dim) {
            let s = C64::from_polar(modulus, arg);
            let col: Vec<C64> = m0.column(j).iter().map(|v| v * s).collect();
            m0.set_column(j, &col);
        }
        let r2 = diagonalize_from(&a, n, &m0, &tol()).unwrap();
        for k in 0..=n {
            prop_assert!((r1.lambda.coeff(k) - r2.lambda.coeff(k)).max_abs() < 1e-9);
        }
    }

    #[test]
    fn hermitian_families_have_real_expansions(seed in 0u64..10_000, dim in 2usize..=4, n in 1usize..=4) {
        let a = random_hermitian_family(dim, n, seed);
        let r = diagonalize(&a, n, &tol()).unwrap();
        for k in 0..=n {
            for v in r.lambda.coeff(k).diagonal() {
                prop_assert!(v.im.abs() < 1e-10, "order {k}: {v}");
            }
        }
    }

    #[test]
    fn higher_order_run_extends_lower(seed in 0u64..10_000, dim in 2usize..=4, n in 1usize..=4) {
        let a = random_family(dim, n, seed);
        let lo = diagonalize(&a, n, &tol()).unwrap();
        let hi = diagonalize(&a, n + 1, &tol()).unwrap();
        let (m, l) = hi.truncated(n);
        for k in 0..=n {
            prop_assert!((l.coeff(k) - lo.lambda.coeff(k)).max_abs() < 1e-10);
            prop_assert!((m.coeff(k) - lo.m.coeff(k)).max_abs() < 1e-9);
        }
    }

    #[test]
    fn trace_matches_order_by_order(seed in 0u64..10_000, dim in 2usize..=4, n in 1usize..=5) {
        let a = random_family(dim, n, seed);
        let r = diagonalize(&a, n, &tol()).unwrap();
        for k in 0..=n {
            let d = (r.lambda.coeff(k).trace() - a.coeff_or_zero(k).trace()).norm();
            prop_assert!(d < 1e-10 * a.scale_norm().max(1.0), "order {k}: {d}");
        }
    }

    #[test]
    fn block_scheme_agrees_when_nondegenerate(seed in 0u64..10_000, dim in 2usize..=4, n in 1usize..=3) {
        let a = random_family(dim, n, seed);
        let s = diagonalize(&a, n, &tol()).unwrap();
        for mode in [BlockMode::SubSteps, BlockMode::PerfectBlock] {
            let (b, _) = block_diagonalize(&a, n, mode, &tol()).unwrap();
            prop_assert_eq!(b.nondeg_order, Some(0));
            prop_assert!(branch_distance(&s.branches(), &b.branches()) < 1e-9);
        }
    }

    #[test]
    fn projections_resolve_identity(seed in 0u64..10_000, dim in 2usize..=4, n in 1usize..=3, x in 0.001f64..0.2) {
        let a = random_family(dim, n, seed);
        let r = diagonalize(&a, n, &tol()).unwrap();
        prop_assume!(x <= r.empirical_radius);
        let mut sum = ComplexMatrix::zeros(dim);
        for j in 0..dim {
            sum = &sum + &eigenprojection(&r, j, rho(x)).unwrap();
        }
        prop_assert!((&sum - &ComplexMatrix::identity(dim)).max_abs() < 1e-10 * dim as f64);
    }
}

#[test]
fn projection_error_decays() {
    for (seed, dim, n) in [(3, 2, 1), (5, 3, 2), (8, 4, 2), (13, 3, 3)] {
        let a = random_family(dim, n, seed);
        let r = diagonalize(&a, n, &tol()).unwrap();
        let grid: Vec<f64> = asympdiag::oracle::default_grid()
            .into_iter()
            .filter(|&x| x <= r.empirical_radius)
            .collect();
        for j in 0..dim {
            let errs: Vec<f64> = grid
                .iter()
                .map(|&x| {
                    let p = eigenprojection(&r, j, rho(x)).unwrap();
                    let values = asympdiag::linalg::eigenvalues(&a.evaluate(rho(x))).unwrap();
                    let lj = r.lambda.evaluate(rho(x))[(j, j)];
                    let mut order: Vec<usize> = (0..dim).collect();
                    order.sort_by(|&u, &v| (values[u] - lj).norm().total_cmp(&(values[v] - lj).norm()));
                    let jj = order[0];
                    let exact = exact_projection(&a.evaluate(rho(x)), &values, jj, 1e-8).unwrap();
                    (&exact - &p).norm2()
                })
                .collect();
            let fit = fit_above_floor(&grid, &errs, 1e-11).unwrap_or_else(|e| panic!("{e}: {errs:?}"));
            assert!(fit.accepts(n), "seed {seed} branch {j}: {fit:?}");
        }
    }
}

#[test]
fn exact_family_is_reported_exact() {
    let a = MatrixSeries::new(vec![ComplexMatrix::from_diag(&[rho(1.0), rho(-1.0)]), ComplexMatrix::from_diag(&[rho(0.5), rho(2.0)])])
        .unwrap();
    let r = diagonalize(&a, 3, &tol()).unwrap();
    let (x, y): (Vec<f64>, Vec<f64>) = r.residual_samples.iter().copied().unzip();
    assert_eq!(fit_above_floor(&x, &y, 0.0).unwrap(), asympdiag::oracle::SlopeFit::Exact);
}
