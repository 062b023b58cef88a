use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::output::{format_number, write_csv_file};
use crate::data::DataMatrix;
use crate::error::Result;
use crate::instability::{convergence_trace, joint_instability_paths, ConvergenceTrace, InstabilityConfig, Mode};

/// One `k` of one instability variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRow {
    pub k: usize,
    pub mode: Mode,
    pub raw_mean: f64,
    pub normalized_mean: f64,
    pub raw_sd: f64,
    pub degenerate_count: usize,
}

/// Raw and normalized instability paths of both variants, computed from
/// one set of bootstrap draws. Rows are ordered by `k`, model-based first.
pub fn emit_instability_path(data: &DataMatrix, cfg: &InstabilityConfig) -> Result<Vec<PathRow>> {
    let cfg = InstabilityConfig {
        normalize: true,
        ..cfg.clone()
    };
    let joint = joint_instability_paths(data, &cfg)?;
    let mut rows = Vec::new();
    for (a, b) in joint.model_based.per_k.iter().zip(&joint.model_free.per_k) {
        for (mode, s) in [(Mode::ModelBased, a), (Mode::ModelFree, b)] {
            rows.push(PathRow {
                k: s.k,
                mode,
                raw_mean: s.raw_mean,
                normalized_mean: s.normalized_mean.unwrap_or(f64::NAN),
                raw_sd: s.raw_sd,
                degenerate_count: s.degenerate_pairs,
            });
        }
    }
    Ok(rows)
}

pub fn write_paths_csv(rows: &[PathRow], path: &Path) -> Result<PathBuf> {
    write_csv_file(
        path,
        &[
            "k",
            "method",
            "raw_mean",
            "normalized_mean",
            "raw_sd",
            "degenerate_count",
        ],
        rows.iter().map(|r| {
            vec![
                r.k.to_string(),
                r.mode.name().to_string(),
                format_number(r.raw_mean),
                format_number(r.normalized_mean),
                format_number(r.raw_sd),
                r.degenerate_count.to_string(),
            ]
        }),
    )
}

/// Running mean raw instability of both variants at one `k` for
/// `b = 1..=b_max` bootstrap pairs.
pub fn run_convergence(data: &DataMatrix, k: usize, b_max: usize, cfg: &InstabilityConfig) -> Result<ConvergenceTrace> {
    convergence_trace(data, k, b_max, cfg)
}

/// Columns `b, mode, running_mean, difference`, where `difference` is the
/// model-based minus the model-free running mean at that `b`.
pub fn write_convergence_csv(trace: &ConvergenceTrace, path: &Path) -> Result<PathBuf> {
    let rows = (0..trace.difference.len()).flat_map(|i| {
        [
            (Mode::ModelBased, &trace.model_based),
            (Mode::ModelFree, &trace.model_free),
        ]
        .map(|(mode, v)| {
            vec![
                (i + 1).to_string(),
                mode.name().to_string(),
                format_number(v[i]),
                format_number(trace.difference[i]),
            ]
        })
    });
    write_csv_file(path, &["b", "mode", "running_mean", "difference"], rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::{generate, ScenarioSpec};
    use crate::seed::SeedSpec;

    #[test]
    fn single_k_gives_one_row_per_variant() {
        let data = generate(&ScenarioSpec::circular(3, 0.15), SeedSpec::new(1))
            .unwrap()
            .data;
        let cfg = InstabilityConfig {
            k_min: 2,
            k_max: 2,
            bootstrap_pairs: 4,
            normalize: false,
            ..Default::default()
        };
        let rows = emit_instability_path(&data, &cfg).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!((rows[0].mode, rows[1].mode), (Mode::ModelBased, Mode::ModelFree));
        assert!(rows.iter().all(|r| r.normalized_mean.is_finite()));
    }

    #[test]
    fn convergence_rows_pair_up() {
        let data = generate(&ScenarioSpec::circular(3, 0.5), SeedSpec::new(2))
            .unwrap()
            .data;
        let trace = run_convergence(&data, 3, 6, &InstabilityConfig::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let text = std::fs::read_to_string(write_convergence_csv(&trace, &dir.path().join("c.csv")).unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1 + 12);
        assert!(lines[11].starts_with("6,model-based,"));
        let diff: f64 = lines[12].rsplit(',').next().unwrap().parse().unwrap();
        assert!((diff - trace.difference[5]).abs() < 1e-11);
    }
}
