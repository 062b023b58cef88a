use serde::{Deserialize, Serialize};

use super::{check_range, fit_range, Diagnostic};
use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::instability::{select_k_max, SelectionResult};
use crate::kmeans::KMeansConfig;
use crate::seed::SeedSpec;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JumpConfig {
    /// Transform power `Y`; `p / 2` when unset.
    pub power: Option<f64>,
    pub kmeans: KMeansConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpPoint {
    pub k: usize,
    /// Mean squared distance to the nearest centroid per dimension.
    pub distortion: f64,
    pub jump: f64,
    /// The distortion at `k` is zero, so the transform is infinite.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpResult {
    pub selection: SelectionResult,
    pub points: Vec<JumpPoint>,
    pub power: f64,
    pub diagnostics: Vec<Diagnostic>,
}

/// Jump statistic: with distortion `d_k = inertia / (n p)`, picks the `k`
/// maximizing `J(k) = d_k^-Y - d_{k-1}^-Y`, taking `d_0^-Y = 0`.
///
/// A zero distortion makes `J(k)` infinite, so the first such `k` wins and
/// is flagged. Any later `k` with zero distortion gets `J = 0`.
pub fn jump_statistic(
    data: &DataMatrix,
    k_min: usize,
    k_max: usize,
    config: &JumpConfig,
    seed: SeedSpec,
) -> Result<JumpResult> {
    check_range(k_min, k_max)?;
    config.kmeans.validate()?;
    let power = config.power.unwrap_or(data.p() as f64 / 2.0);
    if !(power > 0.0) || !power.is_finite() {
        return Err(Error::Config("jump power must be positive".into()));
    }
    let first = k_min.saturating_sub(1).max(1);
    let ks: Vec<usize> = (first..=k_max).collect();
    let scale = (data.n() * data.p()) as f64;
    let fits = fit_range(data, &ks, &config.kmeans, seed);

    let mut diagnostics = Vec::new();
    let mut transformed: Vec<Option<(f64, f64)>> = Vec::with_capacity(ks.len());
    for (&k, fit) in ks.iter().zip(fits) {
        match fit {
            Ok(m) => {
                let d = m.inertia() / scale;
                transformed.push(Some((d, if d > 0.0 { d.powf(-power) } else { f64::INFINITY })));
            }
            Err(e) => {
                if k >= k_min {
                    diagnostics.push(Diagnostic::new(k, e.to_string()));
                }
                transformed.push(None);
            }
        }
    }

    let mut points = Vec::new();
    for (i, &k) in ks.iter().enumerate() {
        if k < k_min {
            continue;
        }
        let Some((d, t)) = transformed[i] else { continue };
        let previous = if k == 1 {
            Some(0.0)
        } else if i == 0 {
            None
        } else {
            transformed[i - 1].map(|(_, t)| t)
        };
        let Some(prev) = previous else {
            diagnostics.push(Diagnostic::new(k, format!("no fit at k={}", k - 1)));
            continue;
        };
        let degenerate = d == 0.0;
        let jump = if degenerate && prev.is_infinite() {
            0.0
        } else {
            t - prev
        };
        if degenerate {
            diagnostics.push(Diagnostic::new(k, "zero distortion"));
        }
        points.push(JumpPoint {
            k,
            distortion: d,
            jump,
            degenerate,
        });
    }
    diagnostics.sort_by_key(|d| d.k);
    if points.is_empty() {
        return Err(Error::Numerical("jump statistic undefined for every k".into()));
    }
    let path: Vec<(usize, f64)> = points.iter().map(|p| (p.k, p.jump)).collect();
    Ok(JumpResult {
        selection: select_k_max(&path, "jump")?,
        points,
        power,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kmeans;
    use crate::scenarios::{generate, ScenarioSpec};

    #[test]
    fn two_point_masses_are_degenerate_at_two() {
        let d = DataMatrix::from_rows(&[[0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [4.0, 4.0], [4.0, 4.0]]).unwrap();
        let r = jump_statistic(&d, 2, 3, &JumpConfig::default(), SeedSpec::new(1)).unwrap();
        assert_eq!(r.selection.k_hat, 2);
        assert!(r.points[0].degenerate);
        assert_eq!(r.points[0].jump, f64::INFINITY);
        assert_eq!(r.diagnostics.iter().map(|d| d.k).collect::<Vec<_>>(), vec![2, 3]);
    }

    #[test]
    fn jumps_match_direct_fits() {
        let s = generate(&ScenarioSpec::circular(4, 0.1), SeedSpec::new(2)).unwrap();
        let cfg = JumpConfig::default();
        let r = jump_statistic(&s.data, 2, 6, &cfg, SeedSpec::new(3)).unwrap();
        assert_eq!(r.power, 1.0);
        let distortion = |k: usize| {
            let m = kmeans::fit(&s.data, k, &cfg.kmeans, SeedSpec::new(3).derive(&[k as u64])).unwrap();
            m.inertia() / (s.data.n() * 2) as f64
        };
        for p in &r.points {
            let want = 1.0 / distortion(p.k) - 1.0 / distortion(p.k - 1);
            assert!((p.jump - want).abs() <= 1e-12 * want.abs());
        }
        assert_eq!(r.selection.k_hat, 4);
    }

    #[test]
    fn k_one_uses_zero_baseline() {
        let s = generate(&ScenarioSpec::circular(2, 0.1), SeedSpec::new(5)).unwrap();
        let r = jump_statistic(&s.data, 1, 3, &JumpConfig::default(), SeedSpec::new(1)).unwrap();
        assert_eq!(r.points[0].k, 1);
        assert_eq!(r.points[0].jump, 1.0 / r.points[0].distortion);
    }

    #[test]
    fn rejects_bad_power() {
        let s = generate(&ScenarioSpec::circular(2, 0.1), SeedSpec::new(5)).unwrap();
        let cfg = JumpConfig {
            power: Some(-1.0),
            ..Default::default()
        };
        assert!(jump_statistic(&s.data, 2, 3, &cfg, SeedSpec::new(1)).is_err());
    }
}
