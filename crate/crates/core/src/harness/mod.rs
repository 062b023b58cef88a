//! Experiment runner: selection tables over repeated scenario draws,
//! instability paths, chance curves, jump paths and convergence traces,
//! written as CSV and JSON.

mod chance;
mod config;
mod jump_paths;
mod methods;
mod output;
mod paths;
mod table;

pub use chance::{chance_curve, ChanceCurve, QUANTILES};
pub use config::{ExperimentConfig, Method, OutputFormat, ScenarioEntry};
pub use jump_paths::{jump_path_experiment, JumpPaths};
pub use methods::{run_methods, write_selection_csv, MethodOutcome};
pub use output::format_number;
pub use paths::{emit_instability_path, run_convergence, write_convergence_csv, write_paths_csv, PathRow};
pub use table::{
    draw_scenario, run_table_experiment, DiagnosticRecord, HistogramRow, IterationRecord, ResultTable, OVERFLOW_K,
};

use std::path::Path;

use crate::data::{read_csv, DataMatrix};
use crate::error::{Error, Result};

/// Version string written into every JSON output.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Loads a CSV dataset, treating the first record as a header when any of
/// its cells is not a number.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<DataMatrix> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    let has_header = first.split(',').any(|c| c.trim().parse::<f64>().is_err());
    read_csv(text.as_bytes(), has_header)
}
