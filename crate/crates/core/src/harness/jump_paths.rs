use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::methods::{TAG_DATA, TAG_JUMP};
use super::output::{format_number, write_csv_file};
use super::table::iteration_seed;
use crate::baselines::{jump_statistic, JumpConfig, JumpPoint};
use crate::error::{Error, Result};
use crate::par;
use crate::scenarios::{generate, ScenarioSpec};
use crate::seed::SeedSpec;

/// Jump-statistic paths over repeated draws of one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpPaths {
    pub paths: Vec<Vec<JumpPoint>>,
}

/// Draws `iterations` datasets from `spec` and records the jump path of each
/// over `k_min..=k_max`. Iteration `i` uses the same data and jump seeds as
/// iteration `i` of a table run of the scenario `name`.
pub fn jump_path_experiment(
    name: &str,
    spec: &ScenarioSpec,
    iterations: usize,
    k_min: usize,
    k_max: usize,
    cfg: &JumpConfig,
    seed: SeedSpec,
) -> Result<JumpPaths> {
    if iterations == 0 {
        return Err(Error::Config("iterations must be at least 1".into()));
    }
    spec.validate()?;
    let paths = par::map_indexed(iterations, |i| {
        let s = iteration_seed(seed, name, i);
        let data = generate(spec, s.derive(&[TAG_DATA]))?.data;
        Ok(jump_statistic(&data, k_min, k_max, cfg, s.derive(&[TAG_JUMP]))?.points)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(JumpPaths { paths })
}

impl JumpPaths {
    /// Sample variance of the finite jumps at each `k`, with the number of
    /// values it was computed from.
    pub fn variance(&self) -> Vec<(usize, f64, usize)> {
        let mut ks: Vec<usize> = self.paths.iter().flatten().map(|p| p.k).collect();
        ks.sort_unstable();
        ks.dedup();
        ks.into_iter()
            .map(|k| {
                let v: Vec<f64> = self
                    .paths
                    .iter()
                    .flatten()
                    .filter(|p| p.k == k && p.jump.is_finite())
                    .map(|p| p.jump)
                    .collect();
                let var = if v.len() < 2 {
                    f64::NAN
                } else {
                    let m = v.iter().sum::<f64>() / v.len() as f64;
                    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64
                };
                (k, var, v.len())
            })
            .collect()
    }

    pub fn variance_at(&self, k: usize) -> Option<f64> {
        self.variance().into_iter().find(|v| v.0 == k).map(|v| v.1)
    }

    /// Columns `kind, iteration, k, distortion, jump, degenerate`. `path`
    /// rows hold one point of one iteration; the trailing `variance` rows
    /// carry the per-`k` variance in `jump` and leave the other columns
    /// empty.
    pub fn write_csv(&self, path: &Path) -> Result<PathBuf> {
        let mut rows = Vec::new();
        for (i, points) in self.paths.iter().enumerate() {
            for p in points {
                rows.push(vec![
                    "path".into(),
                    i.to_string(),
                    p.k.to_string(),
                    format_number(p.distortion),
                    format_number(p.jump),
                    p.degenerate.to_string(),
                ]);
            }
        }
        for (k, var, _) in self.variance() {
            rows.push(vec![
                "variance".into(),
                String::new(),
                k.to_string(),
                String::new(),
                format_number(var),
                String::new(),
            ]);
        }
        write_csv_file(
            path,
            &["kind", "iteration", "k", "distortion", "jump", "degenerate"],
            rows,
        )
    }
}
