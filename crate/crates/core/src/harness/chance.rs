use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::{Binomial, Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::output::{format_number, write_csv_file};
use crate::assignment::ClusterSizes;
use crate::error::{Error, Result};
use crate::instability::chance_distance;
use crate::par;
use crate::seed::{SeedSpec, Stream};

/// Percentiles reported per `k`.
pub const QUANTILES: [usize; 5] = [5, 25, 50, 75, 95];

/// Attempts at drawing sizes without an empty cluster before the empty
/// clusters of the last draw are dropped.
const MAX_REDRAWS: usize = 20;

/// Chance distance samples for cluster sizes drawn at random, per `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChanceCurve {
    pub objects: usize,
    /// `(k, samples)` for `k = 2..=k_max`.
    pub samples: Vec<(usize, Vec<f64>)>,
}

/// Cluster sizes `M ~ Multinomial(m, theta)` with `theta ~ Dirichlet(1, ..., 1)`.
fn draw_sizes(k: usize, m: usize, rng: &mut Stream) -> Vec<usize> {
    let w: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let mut rest_weight: f64 = w.iter().sum();
    let mut rest = m as u64;
    let mut sizes = Vec::with_capacity(k);
    for (j, &wj) in w.iter().enumerate() {
        let n = if j + 1 == k || rest == 0 {
            rest
        } else {
            let prob = (wj / rest_weight).clamp(0.0, 1.0);
            Binomial::new(rest, prob).expect("probability in [0, 1]").sample(rng)
        };
        sizes.push(n as usize);
        rest -= n;
        rest_weight -= wj;
    }
    sizes
}

/// For each `k` in `2..=k_max`, draws `draws` size vectors for `m` objects
/// and maps each through the chance distance of two allocations with those
/// sizes. A draw with an empty cluster is redrawn; after repeated failures
/// (unavoidable as `k` approaches `m`) the empty clusters are dropped.
pub fn chance_curve(k_max: usize, objects: usize, draws: usize, seed: SeedSpec) -> Result<ChanceCurve> {
    if k_max < 2 || objects < k_max {
        return Err(Error::Config(format!(
            "chance curve needs 2 <= k_max <= objects, got k_max={k_max}, objects={objects}"
        )));
    }
    if draws == 0 {
        return Err(Error::Config("chance curve needs at least one draw".into()));
    }
    let ks: Vec<usize> = (2..=k_max).collect();
    let samples = par::map_indexed(ks.len(), |i| {
        let k = ks[i];
        let mut rng = seed.derive(&[k as u64]).stream();
        let values = (0..draws)
            .map(|_| {
                let mut sizes = draw_sizes(k, objects, &mut rng);
                for _ in 1..MAX_REDRAWS {
                    if !sizes.contains(&0) {
                        break;
                    }
                    sizes = draw_sizes(k, objects, &mut rng);
                }
                let sizes = ClusterSizes::new(sizes).nonempty();
                chance_distance(&sizes, &sizes)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok((k, values))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(ChanceCurve { objects, samples })
}

/// Linear-interpolation quantile of sorted values, `q` in `[0, 1]`.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

impl ChanceCurve {
    /// `(percentile, value)` pairs for each of [`QUANTILES`] at every `k`.
    pub fn quantiles(&self) -> Vec<(usize, Vec<(usize, f64)>)> {
        self.samples
            .iter()
            .map(|(k, v)| {
                let mut sorted = v.clone();
                sorted.sort_by(f64::total_cmp);
                (
                    *k,
                    QUANTILES
                        .iter()
                        .map(|&q| (q, quantile(&sorted, q as f64 / 100.0)))
                        .collect(),
                )
            })
            .collect()
    }

    /// Columns `k, kind, index, value`: `sample` rows carry the draw index,
    /// `quantile` rows the percentile.
    pub fn write_csv(&self, path: &Path) -> Result<PathBuf> {
        let mut rows = Vec::new();
        for ((k, samples), (_, qs)) in self.samples.iter().zip(self.quantiles()) {
            for (i, v) in samples.iter().enumerate() {
                rows.push(vec![k.to_string(), "sample".into(), i.to_string(), format_number(*v)]);
            }
            for (q, v) in qs {
                rows.push(vec![k.to_string(), "quantile".into(), q.to_string(), format_number(v)]);
            }
        }
        write_csv_file(path, &["k", "kind", "index", "value"], rows)
    }
}
