use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Method, OutputFormat};
use super::methods::{run_methods, MethodOutcome, TAG_DATA};
use super::output::{write_csv_file, write_json_file};
use super::{load_dataset, VERSION};
use crate::data::DataMatrix;
use crate::error::Result;
use crate::par;
use crate::scenarios::generate;
use crate::seed::SeedSpec;

/// Estimates at or above this value share one histogram bin.
pub const OVERFLOW_K: usize = 20;

/// One selector's estimate in one iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub scenario: String,
    pub method: Method,
    pub iteration: usize,
    /// Seed of the iteration; reruns of a single iteration start from it.
    pub seed: u64,
    pub k_hat: Option<usize>,
    pub error: Option<String>,
}

/// A `k` a selector skipped in one iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticRecord {
    pub scenario: String,
    pub method: Method,
    pub iteration: usize,
    pub k: usize,
    pub message: String,
}

/// Histogram of estimates for one (scenario, method).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub scenario: String,
    pub method: Method,
    pub iterations: usize,
    pub errors: usize,
    /// Counts aligned with [`ResultTable::bins`].
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub version: String,
    pub config: serde_json::Value,
    /// Bin labels: one per `k` below [`OVERFLOW_K`], then `"20+"`.
    pub bins: Vec<String>,
    pub histograms: Vec<HistogramRow>,
    pub records: Vec<IterationRecord>,
    pub diagnostics: Vec<DiagnosticRecord>,
}

impl ResultTable {
    fn first_bin(&self) -> usize {
        OVERFLOW_K + 1 - self.bins.len()
    }

    /// Histogram row of one (scenario, method).
    pub fn row(&self, scenario: &str, method: Method) -> Option<&HistogramRow> {
        self.histograms
            .iter()
            .find(|r| r.scenario == scenario && r.method == method)
    }

    /// Count of estimates equal to `k`, or in the overflow bin when
    /// `k >= OVERFLOW_K`.
    pub fn count(&self, scenario: &str, method: Method, k: usize) -> usize {
        let Some(row) = self.row(scenario, method) else {
            return 0;
        };
        let first = self.first_bin();
        if k < first {
            0
        } else {
            row.counts[k.min(OVERFLOW_K) - first]
        }
    }

    /// Writes `table.csv` and/or `table.json` into `dir`.
    pub fn write(&self, dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        if format.csv() {
            let mut header = vec!["scenario", "method", "iterations", "errors"];
            header.extend(self.bins.iter().map(String::as_str));
            let rows = self.histograms.iter().map(|r| {
                let mut rec = vec![
                    r.scenario.clone(),
                    r.method.name().to_string(),
                    r.iterations.to_string(),
                    r.errors.to_string(),
                ];
                rec.extend(r.counts.iter().map(usize::to_string));
                rec
            });
            written.push(write_csv_file(&dir.join("table.csv"), &header, rows)?);
        }
        if format.json() {
            written.push(write_json_file(&dir.join("table.json"), self)?);
        }
        Ok(written)
    }
}

/// Seed of one iteration of one scenario.
pub(crate) fn iteration_seed(root: SeedSpec, scenario: &str, iteration: usize) -> SeedSpec {
    root.derive_label(scenario).derive(&[iteration as u64])
}

/// The dataset a table run draws for `scenario` in `iteration`.
pub fn draw_scenario(
    scenario: &str,
    spec: &crate::scenarios::ScenarioSpec,
    root: SeedSpec,
    iteration: usize,
) -> Result<DataMatrix> {
    Ok(generate(spec, iteration_seed(root, scenario, iteration).derive(&[TAG_DATA]))?.data)
}

enum Source {
    Scenarios(Vec<(String, crate::scenarios::ScenarioSpec)>),
    Dataset(String, DataMatrix),
}

/// Runs every method on `iterations` fresh draws of every scenario (or on
/// the configured dataset with fresh seeds) and tallies the estimates.
/// A failing method is recorded and counted, never fatal.
pub fn run_table_experiment(cfg: &ExperimentConfig) -> Result<ResultTable> {
    cfg.validate()?;
    let source = match &cfg.data {
        Some(path) => {
            let name = path
                .file_stem()
                .map_or_else(|| "data".to_string(), |s| s.to_string_lossy().into_owned());
            Source::Dataset(name, load_dataset(path)?)
        }
        None => Source::Scenarios(
            cfg.scenarios
                .iter()
                .map(|s| Ok((s.name().to_string(), s.spec()?)))
                .collect::<Result<_>>()?,
        ),
    };
    let names: Vec<String> = match &source {
        Source::Scenarios(list) => list.iter().map(|(n, _)| n.clone()).collect(),
        Source::Dataset(name, _) => vec![name.clone()],
    };
    let methods = cfg.sorted_methods();
    let root = cfg.seed();

    let outcomes: Vec<Vec<MethodOutcome>> = par::with_workers(cfg.workers, || {
        par::map_indexed(names.len() * cfg.iterations, |job| {
            let (s, i) = (job / cfg.iterations, job % cfg.iterations);
            let seed = iteration_seed(root, &names[s], i);
            let data = match &source {
                Source::Scenarios(list) => draw_scenario(&names[s], &list[s].1, root, i),
                Source::Dataset(_, d) => Ok(d.clone()),
            };
            match data {
                Ok(d) => run_methods(&d, cfg, seed),
                Err(e) => methods
                    .iter()
                    .map(|&method| MethodOutcome {
                        method,
                        k_hat: None,
                        error: Some(format!("data generation: {e}")),
                        diagnostics: Vec::new(),
                    })
                    .collect(),
            }
        })
    });

    let first = cfg.k_min.min(OVERFLOW_K);
    let mut bins: Vec<String> = (first..OVERFLOW_K).map(|k| k.to_string()).collect();
    bins.push(format!("{OVERFLOW_K}+"));

    let mut records = Vec::new();
    let mut diagnostics = Vec::new();
    let mut histograms = Vec::new();
    for (s, name) in names.iter().enumerate() {
        for &method in &methods {
            let mut row = HistogramRow {
                scenario: name.clone(),
                method,
                iterations: cfg.iterations,
                errors: 0,
                counts: vec![0; bins.len()],
            };
            for i in 0..cfg.iterations {
                let o = outcomes[s * cfg.iterations + i]
                    .iter()
                    .find(|o| o.method == method)
                    .expect("every method reports");
                match o.k_hat {
                    Some(k) => row.counts[k.min(OVERFLOW_K) - first] += 1,
                    None => row.errors += 1,
                }
                records.push(IterationRecord {
                    scenario: name.clone(),
                    method,
                    iteration: i,
                    seed: iteration_seed(root, name, i).master,
                    k_hat: o.k_hat,
                    error: o.error.clone(),
                });
                diagnostics.extend(o.diagnostics.iter().map(|d| DiagnosticRecord {
                    scenario: name.clone(),
                    method,
                    iteration: i,
                    k: d.k,
                    message: d.message.clone(),
                }));
            }
            histograms.push(row);
        }
    }
    Ok(ResultTable {
        version: VERSION.to_string(),
        config: cfg.echo()?,
        bins,
        histograms,
        records,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::ScenarioEntry;

    fn small(methods: Vec<Method>, iterations: usize) -> ExperimentConfig {
        ExperimentConfig {
            scenarios: vec![ScenarioEntry::Preset("circular-3".into())],
            iterations,
            k_max: 6,
            bootstraps: 5,
            methods,
            ..Default::default()
        }
    }

    #[test]
    fn single_iteration_single_method() {
        let t = run_table_experiment(&small(vec![Method::Gap], 1)).unwrap();
        assert_eq!(t.histograms.len(), 1);
        assert_eq!(t.histograms[0].counts.iter().sum::<usize>(), 1);
        assert_eq!(t.records.len(), 1);
        assert_eq!(t.bins.first().unwrap(), "2");
        assert_eq!(t.bins.last().unwrap(), "20+");
    }

    #[test]
    fn counts_and_errors_add_up() {
        let t = run_table_experiment(&small(Method::ALL.to_vec(), 3)).unwrap();
        for row in &t.histograms {
            assert_eq!(row.counts.iter().sum::<usize>() + row.errors, 3);
        }
        assert_eq!(t.records.len(), 3 * Method::ALL.len());
        assert_eq!(t.count("circular-3", Method::ModelBasedNormalized, 3), 3);
    }

    #[test]
    fn overflow_bin_collects_large_estimates() {
        let mut cfg = small(vec![Method::Jump], 2);
        cfg.k_min = 21;
        cfg.k_max = 22;
        let t = run_table_experiment(&cfg).unwrap();
        assert_eq!(t.bins, vec!["20+"]);
        assert_eq!(t.count("circular-3", Method::Jump, 25), 2);
    }

    #[test]
    fn csv_and_json_agree() {
        let dir = tempfile::tempdir().unwrap();
        let t = run_table_experiment(&small(vec![Method::Slope, Method::ModelFree], 2)).unwrap();
        t.write(dir.path(), OutputFormat::Both).unwrap();
        let json: ResultTable =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("table.json")).unwrap()).unwrap();
        assert_eq!(json, t);
        let csv = std::fs::read_to_string(dir.path().join("table.csv")).unwrap();
        for (line, row) in csv.lines().skip(1).zip(&t.histograms) {
            let cells: Vec<usize> = line.split(',').skip(4).map(|c| c.parse().unwrap()).collect();
            assert_eq!(cells, row.counts);
        }
    }

    #[test]
    fn dataset_source_uses_file_stem() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pts.csv");
        std::fs::write(&path, "a,b\n0,0\n0,1\n5,5\n5,6\n9,0\n9,1\n").unwrap();
        let mut cfg = small(vec![Method::Jump], 2);
        cfg.data = Some(path);
        cfg.k_max = 3;
        let t = run_table_experiment(&cfg).unwrap();
        assert_eq!(t.histograms[0].scenario, "pts");
        assert_eq!(t.count("pts", Method::Jump, 3), 2);
    }
}
