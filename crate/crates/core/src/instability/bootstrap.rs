//! Bootstrap pairs over object ids.

use rand::Rng;

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::kmeans::WeightedPoints;
use crate::seed::{SeedSpec, Stream};

/// Redraws allowed when a bootstrap sample has fewer distinct rows than `k`.
pub const MAX_REDRAWS: usize = 100;

/// Two independent size-`n` draws with replacement from `0..n`.
pub fn bootstrap_pair(n: usize, rng: &mut Stream) -> (Vec<usize>, Vec<usize>) {
    let a = (0..n).map(|_| rng.random_range(0..n)).collect();
    let b = (0..n).map(|_| rng.random_range(0..n)).collect();
    (a, b)
}

/// Sorted distinct ids present in both samples.
pub fn intersection(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (a, b) = (distinct_counts(a).0, distinct_counts(b).0);
    let mut out = Vec::with_capacity(a.len().min(b.len()));
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Sorted distinct ids with their multiplicities.
fn distinct_counts(sample: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut s = sample.to_vec();
    s.sort_unstable();
    let mut ids = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for id in s {
        if ids.last() == Some(&id) {
            *counts.last_mut().unwrap() += 1;
        } else {
            ids.push(id);
            counts.push(1);
        }
    }
    (ids, counts)
}

/// One drawn pair, prepared for clustering.
#[derive(Debug)]
pub(crate) struct PreparedPair {
    pub(crate) a: WeightedPoints,
    pub(crate) b: WeightedPoints,
    pub(crate) intersection: Vec<usize>,
}

impl PreparedPair {
    fn supports(&self, k: usize) -> bool {
        self.a.distinct() >= k && self.b.distinct() >= k
    }
}

/// The draws for one bootstrap-pair index. Attempt `t` is drawn from
/// `seed.derive(&[index, t])`; each `k` uses the first attempt whose samples
/// both hold at least `k` distinct rows, so the draws are shared by every
/// `k` they can serve.
#[derive(Debug)]
pub(crate) struct PairDraws {
    attempts: Vec<PreparedPair>,
}

impl PairDraws {
    pub(crate) fn draw(data: &DataMatrix, classes: &[usize], seed: SeedSpec, index: usize, k_max: usize) -> Self {
        let mut attempts = Vec::new();
        for t in 0..MAX_REDRAWS {
            let (a, b) = bootstrap_pair(data.n(), &mut seed.derive(&[index as u64, t as u64]).stream());
            let inter = intersection(&a, &b);
            let (ia, ca) = distinct_counts(&a);
            let (ib, cb) = distinct_counts(&b);
            let pair = PreparedPair {
                a: WeightedPoints::from_ids(data, classes, &ia, &ca),
                b: WeightedPoints::from_ids(data, classes, &ib, &cb),
                intersection: inter,
            };
            let done = pair.supports(k_max);
            attempts.push(pair);
            if done {
                break;
            }
        }
        Self { attempts }
    }

    pub(crate) fn for_k(&self, k: usize) -> Result<&PreparedPair> {
        self.attempts.iter().find(|p| p.supports(k)).ok_or_else(|| {
            let distinct = self
                .attempts
                .iter()
                .map(|p| p.a.distinct().min(p.b.distinct()))
                .max()
                .unwrap_or(0);
            Error::TooManyClusters { k, distinct }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_have_size_n_and_valid_ids() {
        let mut rng = SeedSpec::new(3).stream();
        let (a, b) = bootstrap_pair(2, &mut rng);
        assert_eq!((a.len(), b.len()), (2, 2));
        assert!(a.iter().chain(&b).all(|&i| i < 2));
    }

    #[test]
    fn intersection_is_sorted_set() {
        assert_eq!(intersection(&[4, 1, 1, 7, 3], &[3, 3, 9, 1, 0]), vec![1, 3]);
        assert!(intersection(&[0, 0], &[1, 1]).is_empty());
    }

    #[test]
    fn coverage_fractions_match_limits() {
        // P(in one sample) -> 1 - 1/e, P(in both) -> (1 - 1/e)^2
        let n = 1000;
        let draws = 10_000;
        let mut rng = SeedSpec::new(17).stream();
        let (mut single, mut both) = (0.0, 0.0);
        for _ in 0..draws {
            let (a, b) = bootstrap_pair(n, &mut rng);
            single += distinct_counts(&a).0.len() as f64 / n as f64;
            both += intersection(&a, &b).len() as f64 / n as f64;
        }
        let one = 1.0 - (-1.0f64).exp();
        assert!((single / draws as f64 - one).abs() < 0.01);
        assert!((both / draws as f64 - one * one).abs() < 0.01);
        assert!((one * one - 0.400).abs() < 0.001);
    }

    #[test]
    fn redraws_until_enough_distinct_rows() {
        let data = DataMatrix::from_rows(&[[0.0], [1.0], [2.0]]).unwrap();
        let classes = data.value_classes();
        let draws = PairDraws::draw(&data, &classes, SeedSpec::new(5), 0, 3);
        let p = draws.for_k(3).unwrap();
        assert_eq!((p.a.distinct(), p.b.distinct()), (3, 3));
        assert!(draws.for_k(4).is_err());
    }
}
