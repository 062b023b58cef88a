//! Cluster assignments and the pairwise co-membership distance between them.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Cluster labels for a set of objects.
///
/// Labels are zero-based cluster indices in `0..k`. `covered_ids` lists the
/// original row indices the labels speak for, strictly increasing. Clusters
/// may be empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    labels: Vec<usize>,
    covered_ids: Vec<usize>,
    k: usize,
}

impl ClusterAssignment {
    pub fn new(labels: Vec<usize>, covered_ids: Vec<usize>, k: usize) -> Result<Self> {
        if labels.len() != covered_ids.len() {
            return Err(Error::DimensionMismatch {
                expected: covered_ids.len(),
                found: labels.len(),
            });
        }
        if k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
            return Err(Error::InvalidArgument(format!("label {bad} outside 0..{k}")));
        }
        if covered_ids.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("covered ids must be strictly increasing".into()));
        }
        Ok(Self { labels, covered_ids, k })
    }

    /// Assignment covering rows `0..labels.len()`.
    pub fn full(labels: Vec<usize>, k: usize) -> Result<Self> {
        let ids = (0..labels.len()).collect();
        Self::new(labels, ids, k)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn covered_ids(&self) -> &[usize] {
        &self.covered_ids
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Label of object `id`, if covered.
    pub fn label_of(&self, id: usize) -> Option<usize> {
        self.covered_ids.binary_search(&id).ok().map(|pos| self.labels[pos])
    }

    pub fn sizes(&self) -> ClusterSizes {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        ClusterSizes::new(sizes)
    }

    pub fn has_empty_clusters(&self) -> bool {
        self.sizes().sizes().contains(&0)
    }

    /// The same labels restricted to `ids` (strictly increasing, all covered).
    pub fn restrict(&self, ids: &[usize]) -> Result<ClusterAssignment> {
        let labels = ids
            .iter()
            .map(|&id| self.label_of(id).ok_or(Error::NotCovered(id)))
            .collect::<Result<Vec<_>>>()?;
        ClusterAssignment::new(labels, ids.to_vec(), self.k)
    }
}

/// Cluster sizes `{n_1, ..., n_K}` and their total.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterSizes {
    sizes: Vec<usize>,
    total: usize,
}

impl ClusterSizes {
    pub fn new(sizes: Vec<usize>) -> Self {
        let total = sizes.iter().sum();
        Self { sizes, total }
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn has_empty(&self) -> bool {
        self.sizes.contains(&0)
    }

    /// Drops empty clusters. Chance co-membership only depends on the
    /// occupied clusters, so this is the form normalization consumes.
    pub fn nonempty(&self) -> ClusterSizes {
        ClusterSizes::new(self.sizes.iter().copied().filter(|&s| s > 0).collect())
    }
}

/// Whether objects `i` and `j` share a cluster.
pub fn co_membership(assignment: &ClusterAssignment, i: usize, j: usize) -> Result<bool> {
    if i == j {
        return Err(Error::InvalidArgument(
            "co-membership needs two distinct objects".into(),
        ));
    }
    let a = assignment.label_of(i).ok_or(Error::NotCovered(i))?;
    let b = assignment.label_of(j).ok_or(Error::NotCovered(j))?;
    Ok(a == b)
}

#[inline]
fn pairs(c: u64) -> u64 {
    c * c.saturating_sub(1) / 2
}

/// Reusable buffer for [`disagreeing_pairs`].
#[derive(Debug, Default)]
pub(crate) struct ContingencyScratch {
    joint: Vec<u64>,
    rows: Vec<u64>,
    cols: Vec<u64>,
}

const DENSE_LIMIT: usize = 1 << 20;

/// Number of unordered object pairs whose co-membership differs between the
/// two labelings, from the contingency table:
/// `same_a + same_b - 2 * same_both`.
pub(crate) fn disagreeing_pairs<I>(labels: I, ka: usize, kb: usize, scratch: &mut ContingencyScratch) -> u64
where
    I: Iterator<Item = (usize, usize)>,
{
    scratch.rows.clear();
    scratch.rows.resize(ka, 0);
    scratch.cols.clear();
    scratch.cols.resize(kb, 0);
    let same_both = if ka.saturating_mul(kb) <= DENSE_LIMIT {
        scratch.joint.clear();
        scratch.joint.resize(ka * kb, 0);
        for (a, b) in labels {
            scratch.rows[a] += 1;
            scratch.cols[b] += 1;
            scratch.joint[a * kb + b] += 1;
        }
        scratch.joint.iter().map(|&c| pairs(c)).sum::<u64>()
    } else {
        let mut joint: HashMap<(usize, usize), u64> = HashMap::new();
        for (a, b) in labels {
            scratch.rows[a] += 1;
            scratch.cols[b] += 1;
            *joint.entry((a, b)).or_default() += 1;
        }
        joint.values().map(|&c| pairs(c)).sum::<u64>()
    };
    let same_a: u64 = scratch.rows.iter().map(|&c| pairs(c)).sum();
    let same_b: u64 = scratch.cols.iter().map(|&c| pairs(c)).sum();
    same_a + same_b - 2 * same_both
}

/// Fraction of unordered object pairs on whose co-membership `a` and `b`
/// disagree. Both assignments must cover the same objects (at least two).
pub fn pair_distance(a: &ClusterAssignment, b: &ClusterAssignment) -> Result<f64> {
    if a.covered_ids != b.covered_ids {
        return Err(Error::CoverageMismatch);
    }
    let m = a.len() as u64;
    if m < 2 {
        return Err(Error::InvalidArgument(
            "pair distance needs at least two objects".into(),
        ));
    }
    let mut scratch = ContingencyScratch::default();
    let d = disagreeing_pairs(
        a.labels.iter().copied().zip(b.labels.iter().copied()),
        a.k,
        b.k,
        &mut scratch,
    );
    Ok(d as f64 / pairs(m) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn full(labels: &[usize]) -> ClusterAssignment {
        let k = labels.iter().max().map_or(1, |m| m + 1);
        ClusterAssignment::full(labels.to_vec(), k).unwrap()
    }

    /// Direct loop over all pairs of the indicator disagreement.
    fn oracle(a: &[usize], b: &[usize]) -> f64 {
        let n = a.len();
        let mut count = 0u64;
        for i in 0..n {
            for j in i + 1..n {
                if (a[i] == a[j]) != (b[i] == b[j]) {
                    count += 1;
                }
            }
        }
        count as f64 / (n * (n - 1) / 2) as f64
    }

    #[test]
    fn co_membership_examples() {
        let a = full(&[0, 0, 1]);
        assert!(co_membership(&a, 0, 1).unwrap());
        assert!(!co_membership(&a, 0, 2).unwrap());
        let singletons = full(&[0, 1, 2, 3]);
        assert!(!co_membership(&singletons, 1, 3).unwrap());
        assert!(matches!(co_membership(&a, 0, 5), Err(Error::NotCovered(5))));
        assert!(co_membership(&a, 1, 1).is_err());
    }

    #[test]
    fn pair_distance_examples() {
        let a = full(&[0, 0, 1, 1]);
        let b = full(&[0, 1, 0, 1]);
        assert_eq!(pair_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(pair_distance(&a, &b).unwrap(), 4.0 / 6.0);
        let one = full(&[0; 7]);
        let single = full(&[0, 1, 2, 3, 4, 5, 6]);
        assert_eq!(pair_distance(&one, &single).unwrap(), 1.0);
    }

    #[test]
    fn pair_distance_errors() {
        let a = full(&[0, 1, 0]);
        let b = ClusterAssignment::new(vec![0, 1, 0], vec![0, 1, 3], 2).unwrap();
        assert!(matches!(pair_distance(&a, &b), Err(Error::CoverageMismatch)));
        let tiny = full(&[0]);
        assert!(pair_distance(&tiny, &tiny).is_err());
    }

    #[test]
    fn restrict_keeps_labels() {
        let a = full(&[2, 0, 1, 1, 0]);
        let r = a.restrict(&[1, 3, 4]).unwrap();
        assert_eq!(r.labels(), &[0, 1, 0]);
        assert_eq!(r.covered_ids(), &[1, 3, 4]);
        assert!(a.restrict(&[9]).is_err());
    }

    #[test]
    fn sizes_track_empty_clusters() {
        let a = ClusterAssignment::full(vec![0, 0, 2], 3).unwrap();
        let s = a.sizes();
        assert_eq!(s.sizes(), &[2, 0, 1]);
        assert_eq!(s.total(), 3);
        assert!(a.has_empty_clusters());
        assert_eq!(s.nonempty().sizes(), &[2, 1]);
    }

    #[test]
    fn large_label_space_matches_oracle() {
        // 1500 x 1100 labels exceeds the dense table limit
        let n = 3000;
        let a: Vec<usize> = (0..n).map(|i| i % 1500).collect();
        let b: Vec<usize> = (0..n).map(|i| (i * 7) % 1100).collect();
        let mut s = ContingencyScratch::default();
        let d = disagreeing_pairs(a.iter().copied().zip(b.iter().copied()), 1500, 1100, &mut s);
        assert_eq!(d as f64 / (n * (n - 1) / 2) as f64, oracle(&a, &b));
    }

    fn labels_pair() -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
        (2usize..=12).prop_flat_map(|n| {
            (
                proptest::collection::vec(0usize..5, n),
                proptest::collection::vec(0usize..5, n),
            )
        })
    }

    proptest! {
        #[test]
        fn matches_oracle_and_is_symmetric((a, b) in labels_pair()) {
            let (fa, fb) = (full(&a), full(&b));
            let d = pair_distance(&fa, &fb).unwrap();
            prop_assert_eq!(d, oracle(&a, &b));
            prop_assert_eq!(d, pair_distance(&fb, &fa).unwrap());
            prop_assert!((0.0..=1.0).contains(&d));
            prop_assert_eq!(pair_distance(&fa, &fa).unwrap(), 0.0);
        }

        #[test]
        fn relabeling_invariance((a, b) in labels_pair(), shift in 1usize..5) {
            let relabeled: Vec<usize> = a.iter().map(|&l| (l + shift) % 5).collect();
            prop_assert_eq!(
                pair_distance(&full(&a), &full(&b)).unwrap(),
                pair_distance(&full(&relabeled), &full(&b)).unwrap()
            );
        }
    }
}
