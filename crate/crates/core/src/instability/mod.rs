//! Bootstrap clustering instability, its chance-level normalization, and
//! selection of the number of clusters.

mod bootstrap;
mod normalization;
mod path;
mod select;

pub use bootstrap::{bootstrap_pair, intersection, MAX_REDRAWS};
pub use normalization::{chance_distance, chance_same_cluster, ln_binomial, ln_factorial, normalize_distance};
pub use path::{
    convergence_trace, instability_path, joint_instability_paths, method_name, model_based_instability,
    model_free_instability, pearson, ConvergenceTrace, InstabilityConfig, InstabilityPath, JointPaths, KInstability,
    KSummary, Mode, PairDetail, PairScore,
};
pub use select::{select_k, select_k_max, SelectionResult};
