//! Multi-step block diagonalisation for families with repeated leading
//! eigenvalues.
//!
//! The transformed family `C(rho)` is kept with coefficients
//! `C_0, ..., C_{k}` equal to the diagonal matrices `Lambda_0, ...,
//! Lambda_k` found so far. Coefficient `k + 1` is then cleaned in sub-steps
//! `l = 0..=k`: a similarity with `I + rho^{k+1-l} K_l` removes the entries
//! that couple different groups of `Pi_l` inside one group of `Pi_{l-1}`.
//! The resulting `Pi_k`-block-diagonal matrix `Λ̃_{k+1}` is diagonalised
//! block by block, which fixes `Lambda_{k+1}` and the refined partition
//! `Pi_{k+1}`.
//!
//! Every `K_l` is constant on the groups of `Pi_{l-1}` wherever every earlier
//! `Lambda` is, so the lower coefficients stay untouched.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    bdiag, eig, group_eigenvalues, is_diagonable, sylvester_within, ComplexMatrix, Diagonability,
    Partition, Tolerances, C64,
};
use crate::series::MatrixSeries;
use crate::standard::{finish, DiagonalizationResult};

/// Partitions `Pi_0 ⊇ Pi_1 ⊇ ...` with the diagonal of `Lambda_k` per level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionFiltration {
    pub levels: Vec<Partition>,
    pub eigenvalue_tables: Vec<Vec<C64>>,
}

impl PartitionFiltration {
    pub fn new(levels: Vec<Partition>, eigenvalue_tables: Vec<Vec<C64>>) -> Self {
        Self {
            levels,
            eigenvalue_tables,
        }
    }

    pub fn last(&self) -> Option<&Partition> {
        self.levels.last()
    }

    /// Each level refines its predecessor.
    pub fn is_refinement_chain(&self) -> bool {
        self.levels.windows(2).all(|w| w[1].refines(&w[0]))
    }

    /// First level whose partition is the finest one.
    pub fn first_finest(&self) -> Option<usize> {
        self.levels.iter().position(Partition::is_finest)
    }
}

/// Which variant of the scheme to run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockMode {
    /// Clean one new coefficient per step with `k + 1` sub-steps.
    #[default]
    SubSteps,
    /// As soon as `Pi_k` is known, make every remaining coefficient
    /// `Pi_k`-block-diagonal.
    PerfectBlock,
}

/// One similarity `I + rho^power K` applied during the scheme.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubStep {
    /// Partition level whose off-block entries `K` removes.
    pub level: usize,
    pub power: usize,
    pub k: ComplexMatrix,
    /// Coefficient of `rho^target` after the transformation.
    pub target: usize,
    pub coefficient: ComplexMatrix,
}

/// How coefficient `level` of `Lambda` was obtained.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StepTrace {
    pub level: usize,
    pub substeps: Vec<SubStep>,
    /// Block-diagonal matrix `Λ̃_level` before diagonalisation (`A_0` at
    /// level 0).
    pub lambda_tilde: ComplexMatrix,
    /// Blockwise diagonaliser `M̃_level` (`M_0` at level 0).
    pub m_tilde: ComplexMatrix,
    pub partition: Partition,
    /// Full block eliminations performed right after this level in
    /// [`BlockMode::PerfectBlock`].
    pub perfect: Vec<SubStep>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SchemeTrace {
    pub steps: Vec<StepTrace>,
}

/// What is known when `Λ̃_level` turns out not to be diagonable.
#[derive(Clone, Debug)]
pub struct PartialBlockResult {
    pub level: usize,
    /// `Lambda_0 .. Lambda_{level-1}`; `None` when the leading coefficient
    /// itself fails.
    pub lambda: Option<MatrixSeries>,
    /// Transformation applied so far.
    pub m: MatrixSeries,
    /// The block-diagonal matrix `Λ̃_level`.
    pub block_matrix: ComplexMatrix,
    /// Index of the offending group of `Pi_{level-1}` and its block.
    pub group: usize,
    pub block: ComplexMatrix,
    /// Defective eigenvalue with algebraic and geometric multiplicity.
    pub defect: Option<(C64, usize, usize)>,
    pub filtration: PartitionFiltration,
    pub trace: SchemeTrace,
}

struct State<'a> {
    n: usize,
    tol: &'a Tolerances,
    c: MatrixSeries,
    m: MatrixSeries,
    lambdas: Vec<ComplexMatrix>,
    parts: Vec<Partition>,
    tables: Vec<Vec<C64>>,
    trace: SchemeTrace,
}

impl State<'_> {
    /// Similarity with `I + rho^power K`, then restores the known diagonal
    /// coefficients below `keep` and projects coefficient `target` onto the
    /// blocks of `p`.
    fn transform(&mut self, k: &ComplexMatrix, power: usize, target: usize, p: &Partition) -> Result<()> {
        if k.max_abs() != 0.0 {
            let f = MatrixSeries::unipotent(k, power, self.n);
            self.c = self.c.similarity(&f, self.tol.eig)?;
            self.m = self.m.mul(&f)?;
        }
        self.restore_known();
        *self.c.coeff_mut(target) = bdiag(p, self.c.coeff(target))?;
        Ok(())
    }

    /// Coefficients already identified as `Lambda_j` are reset to their exact
    /// diagonal values, discarding round-off.
    fn restore_known(&mut self) {
        for (j, l) in self.lambdas.iter().enumerate() {
            *self.c.coeff_mut(j) = l.clone();
        }
    }

    fn substep(&mut self, level: usize, target: usize, sink: &mut Vec<SubStep>) -> Result<()> {
        let coarse = if level == 0 { None } else { Some(&self.parts[level - 1]) };
        let fine = self.parts[level].clone();
        let k = sylvester_within(&self.lambdas[level], self.c.coeff(target), &fine, coarse, self.tol.sep_min)?;
        let power = target - level;
        self.transform(&k, power, target, &fine)?;
        sink.push(SubStep {
            level,
            power,
            k,
            target,
            coefficient: self.c.coeff(target).clone(),
        });
        Ok(())
    }

    fn perfect_pass(&mut self, level: usize) -> Result<Vec<SubStep>> {
        let mut out = Vec::new();
        for target in (level + 1)..=self.n {
            self.substep(level, target, &mut out)?;
        }
        Ok(out)
    }

    fn filtration(&self) -> PartitionFiltration {
        PartitionFiltration::new(self.parts.clone(), self.tables.clone())
    }

    fn failure(&self, level: usize, block_matrix: ComplexMatrix, group: usize, block: ComplexMatrix) -> Error {
        let defect = match is_diagonable(&block, self.tol.eig) {
            Ok(Diagonability::Defective {
                value,
                algebraic,
                geometric,
            }) => Some((value, algebraic, geometric)),
            _ => None,
        };
        let lambda = if self.lambdas.is_empty() {
            None
        } else {
            MatrixSeries::new(self.lambdas.clone()).ok()
        };
        Error::AssumptionFailure(Box::new(PartialBlockResult {
            level,
            lambda,
            m: self.m.clone(),
            block_matrix,
            group,
            block,
            defect,
            filtration: self.filtration(),
            trace: self.trace.clone(),
        }))
    }
}

/// Replaces every value by the mean of its group.
fn snap(values: &[C64], p: &Partition) -> Vec<C64> {
    let mut out = values.to_vec();
    for r in p.ranges() {
        let mean = values[r.clone()].iter().sum::<C64>() / r.len() as f64;
        for v in &mut out[r] {
            *v = mean;
        }
    }
    out
}

fn sub_block(m: &ComplexMatrix, r: &std::ops::Range<usize>) -> ComplexMatrix {
    ComplexMatrix::from_fn(r.len(), |i, j| m[(r.start + i, r.start + j)])
}

/// Runs the block scheme to order `n`.
///
/// Fails with [`Error::AssumptionFailure`] when some `Λ̃_k` is not
/// diagonable; the error carries everything computed up to that point.
pub fn block_diagonalize(
    a: &MatrixSeries,
    n: usize,
    mode: BlockMode,
    tol: &Tolerances,
) -> Result<(DiagonalizationResult, SchemeTrace)> {
    let dim = a.dim();
    let a0 = a.coeff(0);
    let scale = a.scale_norm().max(1.0);

    let mut st = State {
        n,
        tol,
        c: MatrixSeries::zeros(dim, n),
        m: MatrixSeries::identity(dim, n),
        lambdas: Vec::new(),
        parts: Vec::new(),
        tables: Vec::new(),
        trace: SchemeTrace::default(),
    };

    let d = match eig(a0, tol.eig) {
        Ok(d) => d,
        Err(Error::NotDiagonable { .. }) => {
            return Err(st.failure(0, a0.clone(), 0, a0.clone()));
        }
        Err(e) => return Err(e),
    };
    let (p0, perm) = group_eigenvalues(&d.values, tol.group)?;
    let mut m0 = ComplexMatrix::zeros(dim);
    for (k, &src) in perm.iter().enumerate() {
        m0.set_column(k, &d.vectors.column(src));
    }
    let values0 = snap(&perm.iter().map(|&i| d.values[i]).collect::<Vec<_>>(), &p0);
    let m0_inv = m0.inverse().map_err(|_| Error::SingularDiagonaliser { rho: C64::new(0.0, 0.0) })?;
    st.c = a.extend_to(n).truncate(n).left_mul(&m0_inv).right_mul(&m0);
    st.m = MatrixSeries::constant(m0.clone(), n);
    st.lambdas.push(ComplexMatrix::from_diag(&values0));
    st.parts.push(p0.clone());
    st.tables.push(values0);
    st.restore_known();
    let perfect = if mode == BlockMode::PerfectBlock {
        st.perfect_pass(0)?
    } else {
        Vec::new()
    };
    st.trace.steps.push(StepTrace {
        level: 0,
        substeps: Vec::new(),
        lambda_tilde: a0.clone(),
        m_tilde: m0.clone(),
        partition: p0,
        perfect,
    });

    for level in 1..=n {
        let mut substeps = Vec::new();
        for l in 0..level {
            st.substep(l, level, &mut substeps)?;
        }
        let lt = st.c.coeff(level).clone();
        let prev = st.parts[level - 1].clone();
        let mut mt = ComplexMatrix::identity(dim);
        let mut values = Vec::with_capacity(dim);
        let mut groups = Vec::new();
        for (g, r) in prev.ranges().into_iter().enumerate() {
            let block = sub_block(&lt, &r);
            let size = r.len();
            let mean = block.trace() / size as f64;
            if size == 1 || block.shifted(mean).norm_fro() <= tol.eig * scale {
                values.extend(std::iter::repeat_n(mean, size));
                groups.push(size);
                continue;
            }
            let bd = match eig(&block, tol.eig) {
                Ok(bd) => bd,
                Err(Error::NotDiagonable { .. }) => return Err(st.failure(level, lt, g, block)),
                Err(e) => return Err(e),
            };
            let (pb, permb) = group_eigenvalues(&bd.values, tol.group)?;
            let ordered: Vec<C64> = permb.iter().map(|&i| bd.values[i]).collect();
            values.extend(snap(&ordered, &pb));
            groups.extend_from_slice(pb.groups());
            for (k, &src) in permb.iter().enumerate() {
                let col = bd.vectors.column(src);
                for (i, v) in col.into_iter().enumerate() {
                    mt[(r.start + i, r.start + k)] = v;
                }
            }
        }
        let part = Partition::new(groups)?;
        if mt != ComplexMatrix::identity(dim) {
            let mt_inv = mt.inverse().map_err(|_| Error::SingularDiagonaliser { rho: C64::new(0.0, 0.0) })?;
            st.c = st.c.left_mul(&mt_inv).right_mul(&mt);
            st.m = st.m.right_mul(&mt);
        }
        st.lambdas.push(ComplexMatrix::from_diag(&values));
        st.parts.push(part.clone());
        st.tables.push(values);
        st.restore_known();
        let perfect = if mode == BlockMode::PerfectBlock {
            st.perfect_pass(level)?
        } else {
            Vec::new()
        };
        st.trace.steps.push(StepTrace {
            level,
            substeps,
            lambda_tilde: lt,
            m_tilde: mt,
            partition: part,
            perfect,
        });
    }

    let filtration = st.filtration();
    let nondeg = filtration.first_finest();
    let lambda = MatrixSeries::new(st.lambdas)?;
    let result = finish(a, st.m, lambda, m0, filtration, nondeg, tol)?;
    Ok((result, st.trace))
}

/// Per-level verdict of the diagonability assumption.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LevelCheck {
    pub level: usize,
    pub diagonable: bool,
    /// Eigenvalues of `Λ̃_level` when diagonable.
    pub eigenvalues: Vec<C64>,
    pub partition: Option<Partition>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub n: usize,
    pub levels: Vec<LevelCheck>,
    pub holds: bool,
    /// Defective eigenvalue, algebraic and geometric multiplicity at the
    /// failing level.
    pub defect: Option<(C64, usize, usize)>,
}

/// Checks that `Λ̃_0, ..., Λ̃_n` are all diagonable.
pub fn check_assumption(a: &MatrixSeries, n: usize, tol: &Tolerances) -> Result<AssumptionReport> {
    let ok_levels = |f: &PartitionFiltration, upto: usize| -> Vec<LevelCheck> {
        (0..upto)
            .map(|k| LevelCheck {
                level: k,
                diagonable: true,
                eigenvalues: f.eigenvalue_tables[k].clone(),
                partition: Some(f.levels[k].clone()),
            })
            .collect()
    };
    match block_diagonalize(a, n, BlockMode::SubSteps, tol) {
        Ok((r, _)) => Ok(AssumptionReport {
            n,
            levels: ok_levels(&r.filtration, n + 1),
            holds: true,
            defect: None,
        }),
        Err(Error::AssumptionFailure(p)) => {
            let mut levels = ok_levels(&p.filtration, p.level);
            levels.push(LevelCheck {
                level: p.level,
                diagonable: false,
                eigenvalues: Vec::new(),
                partition: None,
            });
            Ok(AssumptionReport {
                n,
                levels,
                holds: false,
                defect: p.defect,
            })
        }
        Err(e) => Err(e),
    }
}

/// Outcome of the search for the order of non-degeneracy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NondegOrder {
    Order(usize),
    AssumptionFailed { level: usize },
    /// Still degenerate at the largest order examined. `coinciding` lists
    /// the index groups whose branches agree through that order.
    NotFound {
        filtration: PartitionFiltration,
        coinciding: Vec<Vec<usize>>,
    },
}

/// Smallest `n <= max_n` at which the partition becomes the finest one.
pub fn nondegeneracy_order(a: &MatrixSeries, max_n: usize, tol: &Tolerances) -> Result<NondegOrder> {
    match block_diagonalize(a, max_n, BlockMode::SubSteps, tol) {
        Ok((r, _)) => Ok(match r.nondeg_order {
            Some(k) => NondegOrder::Order(k),
            None => {
                let last = r.filtration.last().cloned().unwrap_or_else(|| Partition::coarsest(a.dim()));
                let coinciding = last
                    .ranges()
                    .into_iter()
                    .filter(|r| r.len() > 1)
                    .map(|r| r.collect())
                    .collect();
                NondegOrder::NotFound {
                    filtration: r.filtration,
                    coinciding,
                }
            }
        }),
        Err(Error::AssumptionFailure(p)) => Ok(NondegOrder::AssumptionFailed { level: p.level }),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::is_block_diagonal;
    use crate::standard::diagonalize;

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn worked_example(alpha: f64, beta: f64, gamma: f64, delta: f64, kappa: f64) -> MatrixSeries {
        MatrixSeries::new(vec![
            ComplexMatrix::from_real_rows(&[
                vec![alpha / 2.0, alpha / 2.0, 0.0],
                vec![alpha / 2.0, alpha / 2.0, 0.0],
                vec![0.0, 0.0, 0.0],
            ])
            .unwrap(),
            ComplexMatrix::from_real_rows(&[
                vec![beta, 0.0, gamma],
                vec![0.0, -beta, gamma],
                vec![delta / 2.0, delta / 2.0, 0.0],
            ])
            .unwrap(),
            ComplexMatrix::from_diag(&[r(0.0), r(0.0), r(kappa)]),
        ])
        .unwrap()
    }

    #[test]
    fn worked_example_second_order() {
        let a = worked_example(2.0, 1.0, 1.0, 1.0, 1.0);
        let (res, trace) = block_diagonalize(&a, 2, BlockMode::SubSteps, &Tolerances::default()).unwrap();
        let f = &res.filtration;
        assert_eq!(f.levels[0].groups(), &[1, 2]);
        assert_eq!(f.levels[1].groups(), &[1, 2]);
        assert!(f.levels[2].is_finest());
        assert_eq!(res.nondeg_order, Some(2));
        assert!(res.lambda.coeff(1).max_abs() < 1e-14);
        let l2 = &f.eigenvalue_tables[2];
        let expected = [r(1.0), r(0.5f64.sqrt()), r(-(0.5f64.sqrt()))];
        for (got, want) in l2.iter().zip(expected) {
            assert!((got - want).norm() < 1e-12, "{got} vs {want}");
        }
        // After the first sub-step coefficient 1 is Pi_0-block-diagonal.
        assert!(is_block_diagonal(&f.levels[0], &trace.steps[1].substeps[0].coefficient));
    }

    #[test]
    fn worked_example_general_parameters() {
        let (al, be, ga, de, ka) = (1.5, 0.7, -1.3, 0.4, 2.2);
        let a = worked_example(al, be, ga, de, ka);
        let (res, _) = block_diagonalize(&a, 3, BlockMode::SubSteps, &Tolerances::default()).unwrap();
        let s = (be * be + ga * de) / al;
        let disc = (0.25 * (ka - s).powi(2) + be * be * ka / al).sqrt();
        let mut want = [s, 0.5 * (ka - s) + disc, 0.5 * (ka - s) - disc];
        want.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let got: Vec<C64> = res.lambda.coeff(2).diagonal();
        // Branch 0 belongs to the alpha eigenvalue; the others to 0.
        assert!((got[0] - r(s)).norm() < 1e-12);
        let mut rest = [got[1].re, got[2].re];
        rest.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let mut want_rest = [0.5 * (ka - s) + disc, 0.5 * (ka - s) - disc];
        want_rest.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!((rest[0] - want_rest[0]).abs() < 1e-12);
        assert!((rest[1] - want_rest[1]).abs() < 1e-12);
        // Residual tail starts at order 4.
        let tail = crate::standard::residual_series(&a, &res).unwrap();
        for k in 0..=3 {
            assert_eq!(tail.coeff(k).max_abs(), 0.0, "order {k}");
        }
    }

    #[test]
    fn perfect_mode_agrees() {
        let a = worked_example(2.0, 0.3, 1.1, -0.6, 0.9);
        let tol = Tolerances::default();
        let (x, _) = block_diagonalize(&a, 4, BlockMode::SubSteps, &tol).unwrap();
        let (y, _) = block_diagonalize(&a, 4, BlockMode::PerfectBlock, &tol).unwrap();
        for k in 0..=4 {
            assert!(x.lambda.coeff(k).approx_eq(y.lambda.coeff(k), 1e-10), "order {k}");
        }
    }

    #[test]
    fn off_diagonal_pair() {
        // [[0, rho], [rho, 0]]: eigenvalues ±rho exactly.
        let a = MatrixSeries::new(vec![
            ComplexMatrix::zeros(2),
            ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap(),
        ])
        .unwrap();
        let (res, _) = block_diagonalize(&a, 3, BlockMode::SubSteps, &Tolerances::default()).unwrap();
        assert_eq!(res.nondeg_order, Some(1));
        let b = res.branches();
        assert!((b[0][1] - r(1.0)).norm() < 1e-14);
        assert!((b[1][1] + r(1.0)).norm() < 1e-14);
        for k in [0, 2, 3] {
            assert!(b[0][k].norm() < 1e-14 && b[1][k].norm() < 1e-14);
        }
    }

    #[test]
    fn matches_standard_when_nondegenerate() {
        let a = MatrixSeries::new(vec![
            ComplexMatrix::from_diag(&[r(2.0), r(0.5), r(-1.0)]),
            ComplexMatrix::from_fn(3, |i, j| C64::new((i + 2 * j) as f64 * 0.1, 0.05 * i as f64)),
            ComplexMatrix::from_fn(3, |i, j| r(((i * j) as f64).sin())),
        ])
        .unwrap();
        let tol = Tolerances::default();
        let (b, _) = block_diagonalize(&a, 4, BlockMode::SubSteps, &tol).unwrap();
        let s = diagonalize(&a, 4, &tol).unwrap();
        assert_eq!(b.nondeg_order, Some(0));
        for k in 0..=4 {
            assert!(b.lambda.coeff(k).approx_eq(s.lambda.coeff(k), 1e-10), "order {k}");
        }
    }

    #[test]
    fn jordan_fails_at_level_zero() {
        let j = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let a = MatrixSeries::constant(j, 2);
        match block_diagonalize(&a, 2, BlockMode::SubSteps, &Tolerances::default()) {
            Err(Error::AssumptionFailure(p)) => {
                assert_eq!(p.level, 0);
                assert!(p.lambda.is_none());
            }
            other => panic!("expected assumption failure, got {other:?}"),
        }
        let rep = check_assumption(&a, 2, &Tolerances::default()).unwrap();
        assert!(!rep.holds);
        assert_eq!(rep.defect.map(|d| (d.1, d.2)), Some((2, 1)));
    }

    #[test]
    fn hidden_jordan_fails_at_level_one() {
        // A_0 = 0 and A_1 a conjugated Jordan block.
        let j = ComplexMatrix::from_real_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let s = ComplexMatrix::from_real_rows(&[vec![2.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let a1 = &(&s * &j) * &s.inverse().unwrap();
        let a = MatrixSeries::new(vec![ComplexMatrix::zeros(2), a1]).unwrap();
        match block_diagonalize(&a, 2, BlockMode::SubSteps, &Tolerances::default()) {
            Err(Error::AssumptionFailure(p)) => {
                assert_eq!(p.level, 1);
                assert_eq!(p.lambda.as_ref().unwrap().order(), 0);
            }
            other => panic!("expected assumption failure, got {other:?}"),
        }
        assert_eq!(
            nondegeneracy_order(&a, 2, &Tolerances::default()).unwrap(),
            NondegOrder::AssumptionFailed { level: 1 }
        );
    }

    #[test]
    fn permanently_degenerate_not_found() {
        let a = MatrixSeries::new(vec![
            ComplexMatrix::from_diag(&[r(1.0), r(1.0), r(-1.0)]),
            ComplexMatrix::from_diag(&[r(2.0), r(2.0), r(0.0)]),
        ])
        .unwrap();
        match nondegeneracy_order(&a, 3, &Tolerances::default()).unwrap() {
            NondegOrder::NotFound { coinciding, filtration } => {
                assert_eq!(coinciding, vec![vec![0, 1]]);
                assert!(filtration.is_refinement_chain());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn substep_invariants() {
        let a = worked_example(1.0, 0.8, 0.6, 1.7, 0.3);
        let (res, trace) = block_diagonalize(&a, 4, BlockMode::SubSteps, &Tolerances::default()).unwrap();
        let f = &res.filtration;
        assert!(f.is_refinement_chain());
        for step in &trace.steps {
            for s in &step.substeps {
                assert!(is_block_diagonal(&f.levels[s.level], &s.coefficient));
                if s.level >= 1 {
                    assert!(is_block_diagonal(&f.levels[s.level - 1], &s.k));
                    for l in 0..s.level {
                        assert_eq!(res.lambda.coeff(l).commutator(&s.k).max_abs(), 0.0);
                    }
                }
                assert_eq!(bdiag(&f.levels[s.level], &s.k).unwrap().max_abs(), 0.0);
            }
        }
        // Branches in one group of Pi_{n-1} agree below order n.
        let n = res.nondeg_order.unwrap();
        let b = res.branches();
        assert!(n >= 1);
        for (x, y) in b[1].iter().zip(&b[2]).take(n) {
            assert!((x - y).norm() < 1e-12);
        }
    }
}
