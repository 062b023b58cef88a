use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Method};
use crate::baselines::{gap_statistic, gmm_bic, jump_statistic, slope_statistic, Diagnostic};
use crate::data::DataMatrix;
use crate::error::Result;
use crate::instability::joint_instability_paths;
use crate::seed::SeedSpec;

// Stream tags below an iteration seed.
pub(crate) const TAG_DATA: u64 = 0;
pub(crate) const TAG_INSTABILITY: u64 = 1;
pub(crate) const TAG_GAP: u64 = 2;
pub(crate) const TAG_JUMP: u64 = 3;
pub(crate) const TAG_SLOPE: u64 = 4;
pub(crate) const TAG_GMM: u64 = 5;

/// One selector's answer on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    pub method: Method,
    pub k_hat: Option<usize>,
    pub error: Option<String>,
    /// Values of `k` the selector had to leave out.
    pub diagnostics: Vec<Diagnostic>,
}

impl MethodOutcome {
    fn from_result(method: Method, r: Result<(usize, Vec<Diagnostic>)>) -> Self {
        match r {
            Ok((k, diagnostics)) => Self {
                method,
                k_hat: Some(k),
                error: None,
                diagnostics,
            },
            Err(e) => Self {
                method,
                k_hat: None,
                error: Some(e.to_string()),
                diagnostics: Vec::new(),
            },
        }
    }
}

/// Runs every configured method on `data`. The instability methods share
/// one set of bootstrap draws and fits; each distance-based method draws
/// from its own stream below `seed`.
pub fn run_methods(data: &DataMatrix, cfg: &ExperimentConfig, seed: SeedSpec) -> Vec<MethodOutcome> {
    let methods = cfg.sorted_methods();
    let (lo, hi) = (cfg.k_min, cfg.k_max);
    let mut out = Vec::with_capacity(methods.len());

    if methods.iter().any(|m| m.instability().is_some()) {
        let joint = joint_instability_paths(data, &cfg.instability(seed.derive(&[TAG_INSTABILITY])));
        for &m in &methods {
            let Some((mode, normalized)) = m.instability() else {
                continue;
            };
            let r = match &joint {
                Ok(j) => j.path(mode).select(normalized).map(|s| {
                    let skipped = j
                        .path(mode)
                        .per_k
                        .iter()
                        .filter(|s| s.degenerate_pairs > 0)
                        .map(|s| Diagnostic {
                            k: s.k,
                            message: format!("{} degenerate bootstrap pairs", s.degenerate_pairs),
                        })
                        .collect();
                    (s.k_hat, skipped)
                }),
                Err(e) => Err(crate::Error::Numerical(e.to_string())),
            };
            out.push(MethodOutcome::from_result(m, r));
        }
    }
    for &m in &methods {
        let r = match m {
            Method::Gap => gap_statistic(data, lo, hi, &cfg.gap, seed.derive(&[TAG_GAP]))
                .map(|r| (r.selection.k_hat, r.diagnostics)),
            Method::Jump => jump_statistic(data, lo, hi, &cfg.jump, seed.derive(&[TAG_JUMP]))
                .map(|r| (r.selection.k_hat, r.diagnostics)),
            Method::Slope => slope_statistic(data, lo, hi, &cfg.slope, seed.derive(&[TAG_SLOPE]))
                .map(|r| (r.selection.k_hat, r.diagnostics)),
            Method::GmmBic => {
                gmm_bic(data, lo, hi, &cfg.gmm, seed.derive(&[TAG_GMM])).map(|r| (r.selection.k_hat, r.diagnostics))
            }
            _ => continue,
        };
        out.push(MethodOutcome::from_result(m, r));
    }
    out.sort_by_key(|o| o.method);
    out
}

/// Columns `method, k_hat, error`.
pub fn write_selection_csv(outcomes: &[MethodOutcome], path: &std::path::Path) -> Result<std::path::PathBuf> {
    super::output::write_csv_file(
        path,
        &["method", "k_hat", "error"],
        outcomes.iter().map(|o| {
            vec![
                o.method.name().to_string(),
                o.k_hat.map_or_else(String::new, |k| k.to_string()),
                o.error.clone().unwrap_or_default(),
            ]
        }),
    )
}
