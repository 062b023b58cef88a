use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use instab::harness::{
    chance_curve, draw_scenario, emit_instability_path, jump_path_experiment, load_dataset, run_convergence,
    run_methods, run_table_experiment, write_convergence_csv, write_paths_csv, write_selection_csv, ExperimentConfig,
    Method, OutputFormat, ScenarioEntry,
};
use instab::instability::joint_instability_paths;
use instab::{DataMatrix, Error, ErrorClass, Result};

#[derive(Parser)]
#[command(
    name = "instab",
    version,
    about = "Choose the number of clusters by normalized clustering instability"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tally the estimates of every method over repeated scenario draws.
    Table(Common),
    /// Raw and normalized instability paths of one dataset.
    Path(Common),
    /// Chance distance for random cluster sizes, per k.
    ChanceCurve(ChanceArgs),
    /// Jump-statistic paths over repeated scenario draws.
    JumpPaths(Common),
    /// Running mean instability at one k as bootstrap pairs accumulate.
    Converge(ConvergeArgs),
    /// Run every method on a CSV dataset.
    Select(Common),
}

#[derive(Args, Clone, Default)]
struct Common {
    /// TOML experiment configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scenario presets, comma-separated (s1..s4, a1, a2 or their long names).
    #[arg(long, value_delimiter = ',')]
    scenario: Vec<String>,
    /// CSV dataset used instead of a scenario.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Smallest number of clusters tried.
    #[arg(long)]
    k_min: Option<usize>,
    /// Largest number of clusters tried.
    #[arg(long)]
    k_max: Option<usize>,
    /// Bootstrap pairs per k.
    #[arg(long)]
    bootstraps: Option<usize>,
    /// Data draws per scenario.
    #[arg(long)]
    iterations: Option<usize>,
    /// Comma-separated method names.
    #[arg(long, value_delimiter = ',')]
    methods: Vec<String>,
    /// Root seed; every random stream is derived from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct ChanceArgs {
    #[arg(long, default_value_t = 100)]
    k_max: usize,
    /// Objects distributed over the clusters.
    #[arg(long, default_value_t = 100)]
    objects: usize,
    /// Size vectors drawn per k.
    #[arg(long, default_value_t = 100)]
    draws: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct ConvergeArgs {
    #[command(flatten)]
    common: Common,
    /// Number of clusters the trace is computed at.
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Bootstrap pairs in the trace.
    #[arg(long, default_value_t = 5000)]
    b_max: usize,
    /// Also report the correlation of the two raw paths over the k range.
    #[arg(long)]
    correlation: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
    Both,
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path).map_err(|e| match e {
                Error::Io { .. } => Error::Config(e.to_string()),
                e => e,
            })?,
            None => ExperimentConfig::default(),
        };
        if !self.scenario.is_empty() {
            cfg.scenarios = self.scenario.iter().cloned().map(ScenarioEntry::Preset).collect();
        }
        if self.data.is_some() {
            cfg.data.clone_from(&self.data);
        }
        if !self.methods.is_empty() {
            cfg.methods = self
                .methods
                .iter()
                .map(|m| Method::parse(m.trim()))
                .collect::<Result<_>>()?;
        }
        set(&mut cfg.k_min, self.k_min);
        set(&mut cfg.k_max, self.k_max);
        set(&mut cfg.bootstraps, self.bootstraps);
        set(&mut cfg.iterations, self.iterations);
        set(&mut cfg.seed, self.seed);
        set(&mut cfg.workers, self.workers);
        if let Some(out) = &self.out {
            cfg.out.clone_from(out);
        }
        if let Some(f) = self.format {
            cfg.format = match f {
                Format::Csv => OutputFormat::Csv,
                Format::Json => OutputFormat::Json,
                Format::Both => OutputFormat::Both,
            };
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

/// The dataset a single-dataset command works on: the `--data` file, or
/// the first iteration's draw of the first scenario.
fn single_dataset(cfg: &ExperimentConfig) -> Result<(String, DataMatrix)> {
    if let Some(path) = &cfg.data {
        return Ok((path.display().to_string(), load_dataset(path)?));
    }
    let entry = &cfg.scenarios[0];
    let data = draw_scenario(entry.name(), &entry.spec()?, cfg.seed(), 0)?;
    Ok((entry.name().to_string(), data))
}

fn report(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Table(args) => {
            let cfg = args.resolve()?;
            let table = run_table_experiment(&cfg)?;
            report(&table.write(&cfg.out, cfg.format)?);
        }
        Command::Path(args) => {
            let cfg = args.resolve()?;
            let (_, data) = single_dataset(&cfg)?;
            let rows = instab::par::with_workers(cfg.workers, || {
                emit_instability_path(&data, &cfg.instability(cfg.seed()))
            })?;
            report(&[write_paths_csv(&rows, &cfg.out.join("paths.csv"))?]);
        }
        Command::ChanceCurve(args) => {
            let curve = instab::par::with_workers(args.workers.unwrap_or(0), || {
                chance_curve(args.k_max, args.objects, args.draws, instab::SeedSpec::new(args.seed))
            })?;
            report(&[curve.write_csv(&args.out.join("chance_curve.csv"))?]);
        }
        Command::JumpPaths(args) => {
            let cfg = args.resolve()?;
            let entry = &cfg.scenarios[0];
            let paths = instab::par::with_workers(cfg.workers, || {
                jump_path_experiment(
                    entry.name(),
                    &entry.spec()?,
                    cfg.iterations,
                    cfg.k_min,
                    cfg.k_max,
                    &cfg.jump,
                    cfg.seed(),
                )
            })?;
            report(&[paths.write_csv(&cfg.out.join("jump_paths.csv"))?]);
        }
        Command::Converge(args) => {
            let cfg = args.common.resolve()?;
            let (_, data) = single_dataset(&cfg)?;
            let inst = cfg.instability(cfg.seed());
            let trace = instab::par::with_workers(cfg.workers, || run_convergence(&data, args.k, args.b_max, &inst))?;
            report(&[write_convergence_csv(&trace, &cfg.out.join("convergence.csv"))?]);
            if let (Some(mb), Some(mf)) = (trace.model_based.last(), trace.model_free.last()) {
                println!("k={} b={}: model-based {mb:.6}, model-free {mf:.6}", args.k, args.b_max);
            }
            if args.correlation {
                let joint = instab::par::with_workers(cfg.workers, || joint_instability_paths(&data, &inst))?;
                println!(
                    "raw path correlation over k={}..={}: {:.6}",
                    cfg.k_min,
                    cfg.k_max,
                    joint.raw_correlation()
                );
            }
        }
        Command::Select(args) => {
            let cfg = args.resolve()?;
            if cfg.data.is_none() {
                return Err(Error::Config("select needs --data".into()));
            }
            let (name, data) = single_dataset(&cfg)?;
            let outcomes = instab::par::with_workers(cfg.workers, || run_methods(&data, &cfg, cfg.seed()));
            println!("{name}: n={} p={}", data.n(), data.p());
            for o in &outcomes {
                match (&o.k_hat, &o.error) {
                    (Some(k), _) => println!("{:<24}{k}", o.method.name()),
                    (None, e) => println!("{:<24}error: {}", o.method.name(), e.as_deref().unwrap_or("")),
                }
            }
            report(&[write_selection_csv(&outcomes, &cfg.out.join("selection.csv"))?]);
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e.class() {
        ErrorClass::Config => 1,
        ErrorClass::Data => 2,
        ErrorClass::Numerical => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
