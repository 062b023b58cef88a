//! Chance-level co-membership and the normalized clustering distance.
//!
//! For cluster sizes `M = {n_1, ..., n_K}` over `m` objects, the number of
//! ways to fill the clusters in order is
//! `N_tot = prod_i C(m_i, n_i)` with `m_i = n_i + ... + n_K`. Fixing one pair
//! of objects inside cluster `i` leaves `m - 2` objects to distribute over
//! sizes `M` with `n_i` reduced by two, counted by the same sequential
//! product. Their ratio summed over clusters is the probability that two
//! objects share a cluster by chance. Everything runs in log space.

use std::sync::OnceLock;

use crate::assignment::ClusterSizes;
use crate::error::{Error, Result};

const TABLE_SIZE: usize = 8192;

fn ln_factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| (0..TABLE_SIZE).map(|i| libm::lgamma(i as f64 + 1.0)).collect())
}

/// `ln(n!)`.
pub fn ln_factorial(n: usize) -> f64 {
    match ln_factorial_table().get(n) {
        Some(&v) => v,
        None => libm::lgamma(n as f64 + 1.0),
    }
}

/// `ln C(n, r)`; `-inf` when `r > n`.
pub fn ln_binomial(n: usize, r: usize) -> f64 {
    if r > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n) - ln_factorial(r) - ln_factorial(n - r)
}

/// Probability that two fixed objects land in the same cluster when `m`
/// objects are allocated uniformly at random to clusters of the given sizes.
///
/// Requires every size to be at least one and `m >= 2`.
pub fn chance_same_cluster(sizes: &ClusterSizes) -> Result<f64> {
    let n = sizes.sizes();
    if sizes.has_empty() || n.is_empty() {
        return Err(Error::EmptyCluster);
    }
    let m = sizes.total();
    if m < 2 {
        return Err(Error::InvalidArgument(format!(
            "chance co-membership needs at least 2 objects, got {m}"
        )));
    }
    let k = n.len();

    // m_i: objects not yet placed when cluster i is filled.
    let mut remaining = vec![0usize; k];
    let mut acc = 0;
    for i in (0..k).rev() {
        acc += n[i];
        remaining[i] = acc;
    }
    let ln_total: f64 = (0..k).map(|i| ln_binomial(remaining[i], n[i])).sum();

    // With the pair pre-committed to cluster i, clusters before i see two
    // fewer remaining objects, cluster i chooses n_i - 2 of m_i - 2, and the
    // clusters after i are unaffected.
    let mut before = vec![0.0; k + 1];
    for j in 0..k {
        before[j + 1] = before[j] + ln_binomial(remaining[j].saturating_sub(2), n[j]);
    }
    let mut after = vec![0.0; k + 1];
    for j in (0..k).rev() {
        after[j] = after[j + 1] + ln_binomial(remaining[j], n[j]);
    }
    let p = (0..k)
        .filter(|&i| n[i] >= 2)
        .map(|i| {
            let ln_pair = before[i] + ln_binomial(remaining[i] - 2, n[i] - 2) + after[i + 1];
            (ln_pair - ln_total).exp()
        })
        .sum::<f64>();
    Ok(p.clamp(0.0, 1.0))
}

/// Expected clustering distance between two independent random allocations
/// with the given sizes: `p_a (1 - p_b) + p_b (1 - p_a)`.
pub fn chance_distance(sizes_a: &ClusterSizes, sizes_b: &ClusterSizes) -> Result<f64> {
    let pa = chance_same_cluster(sizes_a)?;
    let pb = chance_same_cluster(sizes_b)?;
    Ok(pa * (1.0 - pb) + pb * (1.0 - pa))
}

/// `d / d_r`, with `0/0 = 0` and `d/0 = +inf` for `d > 0`.
pub fn normalize_distance(d: f64, d_r: f64) -> f64 {
    if d_r > 0.0 {
        d / d_r
    } else if d > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;
    use num_traits::{One, ToPrimitive};
    use proptest::prelude::*;

    fn sizes(v: &[usize]) -> ClusterSizes {
        ClusterSizes::new(v.to_vec())
    }

    fn closed_form(n: &[usize]) -> f64 {
        let m: usize = n.iter().sum();
        let num: usize = n.iter().map(|&x| x * x.saturating_sub(1)).sum();
        num as f64 / (m * (m - 1)) as f64
    }

    /// Enumerates every labeling of m objects with the given sizes and
    /// returns the fraction in which objects 0 and 1 share a cluster.
    fn enumerate(n: &[usize]) -> f64 {
        fn rec(labels: &mut Vec<usize>, left: &mut [usize], m: usize, same: &mut u64, total: &mut u64) {
            if labels.len() == m {
                *total += 1;
                if labels[0] == labels[1] {
                    *same += 1;
                }
                return;
            }
            for c in 0..left.len() {
                if left[c] > 0 {
                    left[c] -= 1;
                    labels.push(c);
                    rec(labels, left, m, same, total);
                    labels.pop();
                    left[c] += 1;
                }
            }
        }
        let m = n.iter().sum();
        let (mut same, mut total) = (0, 0);
        rec(&mut Vec::new(), &mut n.to_vec(), m, &mut same, &mut total);
        same as f64 / total as f64
    }

    fn big_binomial(n: usize, r: usize) -> BigUint {
        let mut acc = BigUint::one();
        for i in 0..r {
            acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
        }
        acc
    }

    /// The sequential counting products evaluated exactly.
    fn exact_sequential(n: &[usize]) -> f64 {
        let k = n.len();
        let remaining: Vec<usize> = (0..k).map(|i| n[i..].iter().sum()).collect();
        let total: BigUint = (0..k).map(|i| big_binomial(remaining[i], n[i])).product();
        let mut pair = BigUint::from(0u32);
        for i in (0..k).filter(|&i| n[i] >= 2) {
            let mut term = BigUint::one();
            for j in 0..k {
                term *= match j.cmp(&i) {
                    std::cmp::Ordering::Less => big_binomial(remaining[j] - 2, n[j]),
                    std::cmp::Ordering::Equal => big_binomial(remaining[j] - 2, n[j] - 2),
                    std::cmp::Ordering::Greater => big_binomial(remaining[j], n[j]),
                };
            }
            pair += term;
        }
        // total divides m!, ratio well within f64 range
        let scale = BigUint::from(10u64).pow(30);
        (pair * &scale / &total).to_f64().unwrap() / 1e30
    }

    #[test]
    fn examples() {
        assert_eq!(chance_same_cluster(&sizes(&[9])).unwrap(), 1.0);
        assert_eq!(chance_same_cluster(&sizes(&[1, 1, 1, 1])).unwrap(), 0.0);
        assert!((chance_same_cluster(&sizes(&[2, 2])).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        assert!((chance_same_cluster(&sizes(&[3, 1])).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn enumeration_oracle_agrees() {
        for n in [vec![2, 2], vec![3, 1], vec![2, 1, 2], vec![3, 3, 1], vec![4, 2, 1, 1]] {
            let want = enumerate(&n);
            let got = chance_same_cluster(&sizes(&n)).unwrap();
            assert!((got - want).abs() < 1e-13, "{n:?}: {got} vs {want}");
        }
        assert!((enumerate(&[2, 2]) - 1.0 / 3.0).abs() < 1e-15);
        assert!((enumerate(&[3, 1]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_invalid_sizes() {
        assert!(matches!(
            chance_same_cluster(&sizes(&[3, 0, 2])),
            Err(Error::EmptyCluster)
        ));
        assert!(chance_same_cluster(&sizes(&[1])).is_err());
        assert!(chance_same_cluster(&sizes(&[])).is_err());
    }

    #[test]
    fn chance_distance_examples() {
        let half = sizes(&[3, 1]);
        assert!((chance_distance(&half, &half).unwrap() - 0.5).abs() < 1e-14);
        let singles = sizes(&[1; 6]);
        assert_eq!(chance_distance(&singles, &singles).unwrap(), 0.0);
        assert_eq!(chance_distance(&sizes(&[6]), &singles).unwrap(), 1.0);
    }

    #[test]
    fn normalization_examples() {
        assert!((normalize_distance(0.1, 0.5) - 0.2).abs() < 1e-15);
        assert_eq!(normalize_distance(0.0, 0.0), 0.0);
        assert_eq!(normalize_distance(0.3, 0.0), f64::INFINITY);
        assert_eq!(normalize_distance(0.37, 0.37), 1.0);
    }

    #[test]
    fn exact_counts_for_small_m() {
        for n in [
            vec![2, 2],
            vec![5, 7, 1],
            vec![3, 3, 3, 3, 4],
            vec![10, 10],
            vec![1, 19],
        ] {
            let exact = exact_sequential(&n);
            let got = chance_same_cluster(&sizes(&n)).unwrap();
            assert!((got - exact).abs() <= 1e-12 * exact.max(1e-300), "{n:?}");
        }
    }

    #[test]
    fn decreasing_in_k_for_equal_sizes() {
        let m = 120;
        let mut last = f64::INFINITY;
        for k in (1..=m).filter(|k| m % k == 0) {
            let p = chance_same_cluster(&sizes(&vec![m / k; k])).unwrap();
            assert!(p < last, "k={k}");
            last = p;
        }
    }

    #[test]
    fn large_m_stays_accurate() {
        let n: Vec<usize> = (1..=60).collect();
        let got = chance_same_cluster(&sizes(&n)).unwrap();
        let want = closed_form(&n);
        assert!((got - want).abs() <= 1e-10 * want);
    }

    proptest! {
        #[test]
        fn closed_form_equivalence(n in proptest::collection::vec(1usize..12, 1..8)) {
            prop_assume!(n.iter().sum::<usize>() >= 2);
            let got = chance_same_cluster(&sizes(&n)).unwrap();
            let want = closed_form(&n);
            prop_assert!((got - want).abs() <= 1e-10 * want.max(f64::MIN_POSITIVE));
        }
    }
}
