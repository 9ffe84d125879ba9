//! Contiguous index partitions and block-diagonal projections.

use serde::{Deserialize, Serialize};

use super::eigen::{canonical_order, cluster_indices};
use super::matrix::{ComplexMatrix, C64, ZERO};
use crate::error::{Error, Result};

/// Ordered group sizes `(pi_1, ..., pi_q)`; group `g` covers a contiguous run
/// of indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    groups: Vec<usize>,
}

impl Partition {
    pub fn new(groups: Vec<usize>) -> Result<Self> {
        if groups.is_empty() || groups.contains(&0) {
            return Err(Error::InvalidInput(format!(
                "partition group sizes must be positive, got {groups:?}"
            )));
        }
        Ok(Self { groups })
    }

    /// All indices in one group.
    pub fn coarsest(dim: usize) -> Self {
        Self { groups: vec![dim] }
    }

    /// Every index in its own group.
    pub fn finest(dim: usize) -> Self {
        Self {
            groups: vec![1; dim],
        }
    }

    pub fn groups(&self) -> &[usize] {
        &self.groups
    }

    pub fn dim(&self) -> usize {
        self.groups.iter().sum()
    }

    pub fn is_finest(&self) -> bool {
        self.groups.iter().all(|&g| g == 1)
    }

    /// Index ranges of the groups.
    pub fn ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut start = 0;
        self.groups
            .iter()
            .map(|&g| {
                let r = start..start + g;
                start += g;
                r
            })
            .collect()
    }

    /// Group label of every index.
    pub fn labels(&self) -> Vec<usize> {
        self.groups
            .iter()
            .enumerate()
            .flat_map(|(g, &n)| std::iter::repeat_n(g, n))
            .collect()
    }

    /// `i ~ j` under this partition.
    pub fn same_group(&self, i: usize, j: usize) -> bool {
        let labels = self.labels();
        labels[i] == labels[j]
    }

    /// True when every group of `self` lies inside a single group of `coarse`.
    pub fn refines(&self, coarse: &Partition) -> bool {
        if self.dim() != coarse.dim() {
            return false;
        }
        let fine = self.labels();
        let outer = coarse.labels();
        self.ranges()
            .iter()
            .all(|r| r.clone().all(|i| outer[i] == outer[r.start]))
            && fine.len() == outer.len()
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: dim,
            });
        }
        Ok(())
    }
}

/// Reorders `values` so that values equal within `tol_group` (relative to
/// `max(1, max |value|)`, transitive closure) are contiguous.
///
/// Returns the partition of group sizes and the permutation: position `k` of
/// the reordered list holds `values[perm[k]]`. Groups are ordered by their
/// mean and members within a group by the canonical (real desc, imag desc)
/// order.
pub fn group_eigenvalues(values: &[C64], tol_group: f64) -> Result<(Partition, Vec<usize>)> {
    if values.is_empty() {
        return Err(Error::InvalidInput("no eigenvalues to group".into()));
    }
    if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidInput("non-finite eigenvalue".into()));
    }
    let scale = values.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let clusters = cluster_indices(values, tol_group * scale);
    check_unambiguous(values, &clusters)?;

    let means: Vec<C64> = clusters
        .iter()
        .map(|g| g.iter().map(|&i| values[i]).sum::<C64>() / g.len() as f64)
        .collect();
    let mut perm = Vec::with_capacity(values.len());
    let mut sizes = Vec::with_capacity(clusters.len());
    for g in canonical_order(&means) {
        let members = &clusters[g];
        let member_values: Vec<C64> = members.iter().map(|&i| values[i]).collect();
        perm.extend(canonical_order(&member_values).into_iter().map(|k| members[k]));
        sizes.push(members.len());
    }
    Ok((Partition { groups: sizes }, perm))
}

fn check_unambiguous(values: &[C64], clusters: &[Vec<usize>]) -> Result<()> {
    let diameter = |g: &[usize]| {
        let mut d: f64 = 0.0;
        for (a, &i) in g.iter().enumerate() {
            for &j in &g[a + 1..] {
                d = d.max((values[i] - values[j]).norm());
            }
        }
        d
    };
    let diameters: Vec<f64> = clusters.iter().map(|g| diameter(g)).collect();
    for a in 0..clusters.len() {
        for b in (a + 1)..clusters.len() {
            let mut sep = f64::INFINITY;
            for &i in &clusters[a] {
                for &j in &clusters[b] {
                    sep = sep.min((values[i] - values[j]).norm());
                }
            }
            let diameter = diameters[a].max(diameters[b]);
            if diameter > 0.5 * sep {
                return Err(Error::AmbiguousClustering {
                    diameter,
                    separation: sep,
                });
            }
        }
    }
    Ok(())
}

/// Zeroes every entry `(i, j)` with `i` and `j` in different groups of `p`.
pub fn bdiag(p: &Partition, m: &ComplexMatrix) -> Result<ComplexMatrix> {
    p.check_dim(m.dim())?;
    let labels = p.labels();
    Ok(ComplexMatrix::from_fn(m.dim(), |i, j| {
        if labels[i] == labels[j] {
            m[(i, j)]
        } else {
            ZERO
        }
    }))
}

/// True when all entries outside the diagonal blocks of `p` are exactly zero.
pub fn is_block_diagonal(p: &Partition, m: &ComplexMatrix) -> bool {
    let labels = p.labels();
    (0..m.dim()).all(|i| (0..m.dim()).all(|j| labels[i] == labels[j] || m[(i, j)] == ZERO))
}

/// Applies a permutation to a matrix's rows and columns: `out[(a, b)] =
/// m[(perm[a], perm[b])]`.
pub fn permute(m: &ComplexMatrix, perm: &[usize]) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.dim(), |a, b| m[(perm[a], perm[b])])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn worked_example_grouping() {
        let (p, perm) = group_eigenvalues(&[r(2.0), r(0.0), r(0.0)], 1e-8).unwrap();
        assert_eq!(p.groups(), &[1, 2]);
        assert_eq!(perm[0], 0);
    }

    #[test]
    fn distinct_values_identity_grouping() {
        let (p, perm) = group_eigenvalues(&[r(3.0), r(2.0), r(1.0)], 1e-8).unwrap();
        assert_eq!(p.groups(), &[1, 1, 1]);
        assert_eq!(perm, vec![0, 1, 2]);
        // Unsorted input gets sorted descending.
        let (_, perm) = group_eigenvalues(&[r(1.0), r(2.0), r(3.0)], 1e-8).unwrap();
        assert_eq!(perm, vec![2, 1, 0]);
    }

    #[test]
    fn near_equal_values_merge() {
        let (p, perm) = group_eigenvalues(&[r(1.0), r(1.0 + 1e-12), r(5.0)], 1e-8).unwrap();
        assert_eq!(p.groups(), &[1, 2]);
        assert_eq!(perm[0], 2);
        let (p, _) = group_eigenvalues(&[r(5.0), r(1.0), r(1.0 + 1e-12)], 1e-8).unwrap();
        assert_eq!(p.groups(), &[1, 2]);
    }

    #[test]
    fn chained_cluster_is_ambiguous() {
        let t = 1e-8;
        let vals = [r(0.0), r(0.9 * t), r(1.8 * t), r(3.5 * t)];
        assert!(matches!(
            group_eigenvalues(&vals, t),
            Err(Error::AmbiguousClustering { .. })
        ));
    }

    #[test]
    fn bdiag_examples() {
        let ones = ComplexMatrix::from_fn(3, |_, _| r(1.0));
        let p = Partition::new(vec![1, 2]).unwrap();
        let expected = ComplexMatrix::from_real_rows(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 1.0],
            vec![0.0, 1.0, 1.0],
        ])
        .unwrap();
        assert_eq!(bdiag(&p, &ones).unwrap(), expected);
        assert_eq!(bdiag(&Partition::coarsest(3), &ones).unwrap(), ones);
        assert_eq!(
            bdiag(&Partition::finest(3), &ones).unwrap(),
            ComplexMatrix::identity(3)
        );
        assert!(matches!(
            bdiag(&Partition::finest(2), &ones),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn refinement_relation() {
        let coarse = Partition::new(vec![1, 3]).unwrap();
        assert!(Partition::new(vec![1, 1, 2]).unwrap().refines(&coarse));
        assert!(!Partition::new(vec![2, 2]).unwrap().refines(&coarse));
        assert!(Partition::finest(4).refines(&coarse));
    }

    fn partition_strategy(dim: usize) -> impl Strategy<Value = Partition> {
        prop::collection::vec(any::<bool>(), dim - 1).prop_map(move |cuts| {
            let mut groups = vec![];
            let mut size = 1;
            for c in cuts {
                if c {
                    groups.push(size);
                    size = 1;
                } else {
                    size += 1;
                }
            }
            groups.push(size);
            Partition::new(groups).unwrap()
        })
    }

    fn matrix_strategy(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim).prop_map(move |v| {
            ComplexMatrix::from_fn(dim, |i, j| C64::new(v[i * dim + j].0, v[i * dim + j].1))
        })
    }

    proptest! {
        #[test]
        fn bdiag_is_idempotent(p in partition_strategy(5), m in matrix_strategy(5)) {
            let once = bdiag(&p, &m).unwrap();
            prop_assert_eq!(bdiag(&p, &once).unwrap(), once);
        }

        #[test]
        fn bdiag_subpartition_absorbs(p in partition_strategy(5), m in matrix_strategy(5), split in any::<bool>()) {
            // Build a refinement of p by optionally splitting every group.
            let fine = if split {
                Partition::new(p.groups().iter().flat_map(|&g| vec![1; g]).collect()).unwrap()
            } else {
                p.clone()
            };
            prop_assert!(fine.refines(&p));
            let lhs = bdiag(&fine, &bdiag(&p, &m).unwrap()).unwrap();
            prop_assert_eq!(lhs, bdiag(&fine, &m).unwrap());
        }

        #[test]
        fn grouping_is_bijection(vals in prop::collection::vec(-3i32..3, 1..8)) {
            let values: Vec<C64> = vals.iter().map(|&v| r(v as f64)).collect();
            let (p, perm) = group_eigenvalues(&values, 1e-8).unwrap();
            prop_assert_eq!(p.dim(), values.len());
            let mut seen = perm.clone();
            seen.sort_unstable();
            prop_assert_eq!(seen, (0..values.len()).collect::<Vec<_>>());
            // Each group holds equal values.
            for range in p.ranges() {
                for k in range.clone() {
                    prop_assert_eq!(values[perm[k]], values[perm[range.start]]);
                }
            }
        }
    }
}
