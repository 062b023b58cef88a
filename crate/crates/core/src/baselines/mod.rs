//! Distance-based selectors for the number of clusters: Gap, Jump,
//! silhouette Slope and Gaussian-mixture BIC.

mod gap;
mod gmm;
mod jump;
mod silhouette;

pub use gap::{gap_statistic, GapConfig, GapPoint, GapResult, GapRule};
pub use gmm::{fit_gmm, gmm_bic, Covariance, GmmConfig, GmmFit, GmmResult};
pub use jump::{jump_statistic, JumpConfig, JumpPoint, JumpResult};
pub use silhouette::{silhouette_width, slope_scores, slope_statistic, SlopeConfig, SlopeForm, SlopeResult};

use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::kmeans::{self, KMeansConfig, KMeansModel};
use crate::par;
use crate::seed::SeedSpec;

/// A `k` left out of a selector's path, and why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub k: usize,
    pub message: String,
}

impl Diagnostic {
    fn new(k: usize, message: impl Into<String>) -> Self {
        Self {
            k,
            message: message.into(),
        }
    }
}

fn check_range(k_min: usize, k_max: usize) -> Result<()> {
    if k_min < 1 || k_min > k_max {
        return Err(Error::Config(format!("invalid k range {k_min}..={k_max}")));
    }
    Ok(())
}

/// k-means fits of `data` for every `k` in `ks`; the fit at `k` is seeded
/// with `seed.derive(&[k])`.
fn fit_range(data: &DataMatrix, ks: &[usize], cfg: &KMeansConfig, seed: SeedSpec) -> Vec<Result<KMeansModel>> {
    par::map_indexed(ks.len(), |i| {
        kmeans::fit(data, ks[i], cfg, seed.derive(&[ks[i] as u64]))
    })
}
