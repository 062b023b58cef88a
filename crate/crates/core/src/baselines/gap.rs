use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_range, fit_range, Diagnostic};
use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::instability::{select_k_max, SelectionResult};
use crate::kmeans::{within_dispersion, KMeansConfig};
use crate::par;
use crate::seed::SeedSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum GapRule {
    /// The `k` with the largest gap.
    MaxGap,
    /// Smallest `k` with `Gap(k) >= Gap(k+1) - s(k+1)`.
    #[default]
    FirstSeRule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GapConfig {
    /// Uniform reference datasets drawn over the bounding box of the data.
    pub num_reference_sets: usize,
    pub rule: GapRule,
    pub kmeans: KMeansConfig,
}

impl Default for GapConfig {
    fn default() -> Self {
        Self {
            num_reference_sets: 10,
            rule: GapRule::FirstSeRule,
            kmeans: KMeansConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapPoint {
    pub k: usize,
    pub log_w: f64,
    /// Mean of `log W` over the reference sets.
    pub reference_log_w: f64,
    /// Reference standard deviation inflated by `sqrt(1 + 1/B)`.
    pub s: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapResult {
    /// Selection under the configured rule; `path` holds the gaps.
    pub selection: SelectionResult,
    pub points: Vec<GapPoint>,
    pub max_gap_k: usize,
    pub first_se_k: usize,
    pub diagnostics: Vec<Diagnostic>,
}

/// Uniform draws over the per-column range of `data`, same shape.
fn reference_set(data: &DataMatrix, seed: SeedSpec) -> Result<DataMatrix> {
    let bounds = data.bounds();
    let mut rng = seed.stream();
    let mut values = Vec::with_capacity(data.n() * data.p());
    for _ in 0..data.n() {
        for &(lo, hi) in &bounds {
            values.push(if hi > lo { rng.random_range(lo..hi) } else { lo });
        }
    }
    DataMatrix::new(data.n(), data.p(), values)
}

fn log_dispersions(data: &DataMatrix, ks: &[usize], cfg: &KMeansConfig, seed: SeedSpec) -> Vec<Result<f64, String>> {
    fit_range(data, ks, cfg, seed)
        .into_iter()
        .map(|fit| {
            let w = fit
                .and_then(|m| within_dispersion(data, &m.assign(data)?))
                .map_err(|e| e.to_string())?;
            if w > 0.0 {
                Ok(w.ln())
            } else {
                Err("within-cluster dispersion is zero".to_string())
            }
        })
        .collect()
}

/// Gap statistic: `Gap(k) = mean_b log W_b*(k) - log W(k)` with `W` the
/// pooled within-cluster sum of squares of a k-means fit and `W_b*` its
/// value on uniform reference data. Both the max-gap and the 1-SE choice
/// are reported; `config.rule` decides which one is returned.
pub fn gap_statistic(
    data: &DataMatrix,
    k_min: usize,
    k_max: usize,
    config: &GapConfig,
    seed: SeedSpec,
) -> Result<GapResult> {
    check_range(k_min, k_max)?;
    config.kmeans.validate()?;
    let b = config.num_reference_sets;
    if b == 0 {
        return Err(Error::Config("gap needs at least one reference set".into()));
    }
    let ks: Vec<usize> = (k_min..=k_max).collect();
    let observed = log_dispersions(data, &ks, &config.kmeans, seed.derive(&[0]));
    let references = par::map_indexed(b, |r| {
        let reference = reference_set(data, seed.derive(&[1, r as u64]))?;
        Ok(log_dispersions(
            &reference,
            &ks,
            &config.kmeans,
            seed.derive(&[2, r as u64]),
        ))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut points = Vec::new();
    let mut diagnostics = Vec::new();
    for (i, &k) in ks.iter().enumerate() {
        let log_w = match &observed[i] {
            Ok(v) => *v,
            Err(msg) => {
                diagnostics.push(Diagnostic::new(k, msg.clone()));
                continue;
            }
        };
        let refs: std::result::Result<Vec<f64>, String> = references.iter().map(|r| r[i].clone()).collect();
        let refs = match refs {
            Ok(v) => v,
            Err(msg) => {
                diagnostics.push(Diagnostic::new(k, format!("reference: {msg}")));
                continue;
            }
        };
        let mean = refs.iter().sum::<f64>() / b as f64;
        let sd = (refs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / b as f64).sqrt();
        points.push(GapPoint {
            k,
            log_w,
            reference_log_w: mean,
            s: sd * (1.0 + 1.0 / b as f64).sqrt(),
            gap: mean - log_w,
        });
    }
    if points.is_empty() {
        return Err(Error::Numerical("gap statistic undefined for every k".into()));
    }
    let path: Vec<(usize, f64)> = points.iter().map(|p| (p.k, p.gap)).collect();
    let max_gap = select_k_max(&path, "gap")?;
    let first_se_k = points
        .windows(2)
        .find(|w| w[0].gap >= w[1].gap - w[1].s)
        .map_or(points[points.len() - 1].k, |w| w[0].k);
    let max_gap_k = max_gap.k_hat;
    let selection = SelectionResult {
        k_hat: match config.rule {
            GapRule::MaxGap => max_gap_k,
            GapRule::FirstSeRule => first_se_k,
        },
        ..max_gap
    };
    Ok(GapResult {
        selection,
        points,
        max_gap_k,
        first_se_k,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::{generate, ScenarioSpec};
    use rand_distr::StandardNormal;

    fn blob(seed: u64, n: usize) -> DataMatrix {
        let mut rng = SeedSpec::new(seed).stream();
        let rows: Vec<[f64; 2]> = (0..n)
            .map(|_| [rng.sample(StandardNormal), rng.sample(StandardNormal)])
            .collect();
        DataMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn finds_three_separated_clusters() {
        let s = generate(&ScenarioSpec::circular(3, 0.1), SeedSpec::new(3)).unwrap();
        for rule in [GapRule::MaxGap, GapRule::FirstSeRule] {
            let cfg = GapConfig {
                rule,
                ..Default::default()
            };
            let r = gap_statistic(&s.data, 1, 8, &cfg, SeedSpec::new(4)).unwrap();
            assert_eq!(r.selection.k_hat, 3, "{rule:?}");
        }
    }

    #[test]
    fn single_blob_stops_at_smallest_k() {
        let r = gap_statistic(&blob(2, 150), 2, 10, &GapConfig::default(), SeedSpec::new(5)).unwrap();
        assert_eq!(r.first_se_k, 2);
        assert_eq!(r.selection.k_hat, 2);
    }

    #[test]
    fn reference_dispersion_decreases_in_k() {
        let uniform = reference_set(&blob(1, 200), SeedSpec::new(6)).unwrap();
        let r = gap_statistic(&uniform, 1, 8, &GapConfig::default(), SeedSpec::new(7)).unwrap();
        for w in r.points.windows(2) {
            assert!(w[1].reference_log_w < w[0].reference_log_w);
        }
    }

    #[test]
    fn reference_set_stays_inside_bounds() {
        let d = blob(9, 50);
        let r = reference_set(&d, SeedSpec::new(1)).unwrap();
        for ((lo, hi), (rlo, rhi)) in d.bounds().into_iter().zip(r.bounds()) {
            assert!(rlo >= lo && rhi <= hi);
        }
    }

    #[test]
    fn zero_dispersion_is_excluded() {
        let d = DataMatrix::from_rows(&[[0.0], [0.0], [1.0], [1.0], [2.0], [2.0]]).unwrap();
        let r = gap_statistic(&d, 2, 4, &GapConfig::default(), SeedSpec::new(1)).unwrap();
        assert_eq!(r.points.len(), 1);
        assert_eq!(r.diagnostics.iter().map(|d| d.k).collect::<Vec<_>>(), vec![3, 4]);
    }

    #[test]
    fn deterministic() {
        let d = blob(4, 60);
        let a = gap_statistic(&d, 1, 5, &GapConfig::default(), SeedSpec::new(2)).unwrap();
        let b = gap_statistic(&d, 1, 5, &GapConfig::default(), SeedSpec::new(2)).unwrap();
        assert_eq!(a, b);
    }
}
