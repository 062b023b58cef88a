//! Selecting the number of clusters by normalized clustering instability.
//!
//! The crate clusters pairs of bootstrap samples with k-means, measures how
//! often the two clusterings disagree on whether object pairs belong
//! together, and divides that instability by its chance level under the
//! observed cluster sizes. The `k` minimizing the normalized path is the
//! estimate. Distance-based selectors (Gap, Jump, Slope, Gaussian-mixture
//! BIC), synthetic benchmark generators and an experiment harness are
//! included for comparison studies.
//!
//! ```no_run
//! use instab::instability::{joint_instability_paths, InstabilityConfig, Mode};
//! use instab::{load_csv, SeedSpec};
//!
//! # fn main() -> instab::Result<()> {
//! let data = load_csv("points.csv", true)?;
//! let cfg = InstabilityConfig { k_max: 15, bootstrap_pairs: 100, seed: SeedSpec::new(7), ..Default::default() };
//! let paths = joint_instability_paths(&data, &cfg)?;
//! let chosen = paths.path(Mode::ModelBased).select(true)?;
//! println!("k = {}", chosen.k_hat);
//! # Ok(())
//! # }
//! ```

// `!(x > 0.0)` and friends reject NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assignment;
pub mod baselines;
pub mod data;
pub mod error;
pub mod harness;
pub mod instability;
pub mod kmeans;
pub mod par;
pub mod scenarios;
pub mod seed;

pub use assignment::{co_membership, pair_distance, ClusterAssignment, ClusterSizes};
pub use data::{load_csv, read_csv, save_csv, write_csv, DataMatrix};
pub use error::{Error, ErrorClass, Result};
pub use instability::{InstabilityConfig, InstabilityPath, Mode, SelectionResult};
pub use kmeans::{KMeansConfig, KMeansModel};
pub use seed::SeedSpec;
