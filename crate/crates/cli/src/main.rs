use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use flbench_cli::analyze::{analyze, AnalyzeOptions};
use flbench_cli::config::{parse_solver_entry, ExperimentConfig, SolverParams};
use flbench_cli::corpus::{generate, load_instance};
use flbench_cli::error::{CliError, CliResult};
use flbench_cli::runner::solve_runs;
use flbench_cli::sweep::sweep;

/// Frustrated-loop benchmark experiments.
#[derive(Parser)]
#[command(name = "flbench", version)]
struct Cli {
    /// Experiment config file (flat key = value).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Extra config setting, e.g. `--set sizes=4,5`; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    settings: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct SolverFlags {
    /// sas, saa, hfs or brute.
    #[arg(long)]
    solver: Option<String>,
    /// Sweeps per anneal; comma-separated for a grid.
    #[arg(long)]
    sweeps: Option<String>,
    #[arg(long)]
    beta_final: Option<String>,
    #[arg(long)]
    repetitions: Option<String>,
    /// HFS rounds without improvement before stopping, or `auto`.
    #[arg(long)]
    stall_rounds: Option<String>,
    #[arg(long)]
    max_restarts: Option<String>,
}

impl SolverFlags {
    /// The solver grid given on the command line, if any.
    fn grid(&self) -> CliResult<Option<Vec<SolverParams>>> {
        let Some(name) = &self.solver else {
            let stray = [&self.sweeps, &self.beta_final, &self.repetitions, &self.stall_rounds, &self.max_restarts];
            if stray.iter().any(|f| f.is_some()) {
                return Err(CliError::Config("solver parameter flags need --solver".into()));
            }
            return Ok(None);
        };
        let mut entry = name.clone();
        for (key, value) in [
            ("sweeps", &self.sweeps),
            ("beta_final", &self.beta_final),
            ("repetitions", &self.repetitions),
            ("stall_rounds", &self.stall_rounds),
            ("max_restarts", &self.max_restarts),
        ] {
            if let Some(v) = value {
                entry.push_str(&format!(" {key}={v}"));
            }
        }
        parse_solver_entry(&entry).map(Some)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write the instance corpus and its manifest.
    Generate,
    /// Run one solver grid on instance files, printing one JSON record per run.
    Solve {
        /// Instance files; the file stem is used as the instance id.
        #[arg(required = true)]
        instances: Vec<PathBuf>,
        #[command(flatten)]
        solver: SolverFlags,
        /// Runs per instance and parameter set.
        #[arg(long)]
        runs: Option<u64>,
    },
    /// Generate if needed, then run every missing task of the solver grid.
    Sweep {
        #[command(flatten)]
        solver: SolverFlags,
        #[arg(long)]
        runs: Option<u64>,
        /// Stop after this many (instance, solver, parameters) groups.
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Turn the result log into CSV tables.
    Analyze {
        #[arg(long)]
        resamples: Option<usize>,
        #[arg(long)]
        bootstrap_seed: Option<u64>,
    },
}

fn load_config(cli: &Cli) -> CliResult<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    for s in &cli.settings {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--set expects KEY=VALUE, got '{s}'")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    if cli.workers.is_some() {
        cfg.workers = cli.workers;
    }
    Ok(cfg)
}

fn instance_id(path: &Path) -> CliResult<String> {
    path.file_stem()
        .and_then(|s| s.to_str())
        .map(str::to_string)
        .ok_or_else(|| CliError::Config(format!("{}: no usable file name", path.display())))
}

fn run(cli: Cli) -> CliResult<()> {
    let mut cfg = load_config(&cli)?;
    match &cli.command {
        Command::Generate => {
            let (entries, report) = generate(&cfg)?;
            eprintln!(
                "{} instances: {} written, {} unchanged, {} exhausted; manifest in {}",
                entries.len(),
                report.written,
                report.unchanged,
                report.exhausted,
                cfg.out.display()
            );
        }
        Command::Solve { instances, solver, runs } => {
            let grid = solver.grid()?.ok_or_else(|| CliError::Config("solve needs --solver".into()))?;
            let runs: Vec<u64> = (0..runs.unwrap_or(cfg.runs)).collect();
            let stdout = std::io::stdout();
            for path in instances {
                let id = instance_id(path)?;
                let inst = load_instance(path)?;
                for params in &grid {
                    let records = solve_runs(&inst, &id, params, &runs, cfg.master_seed)?;
                    let mut out = stdout.lock();
                    for r in &records {
                        writeln!(out, "{}", serde_json::to_string(r).expect("records serialize"))
                            .map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
                    }
                }
            }
        }
        Command::Sweep { solver, runs, limit } => {
            if let Some(grid) = solver.grid()? {
                cfg.solvers = grid;
            }
            if let Some(r) = runs {
                cfg.runs = *r;
            }
            let report = sweep(&cfg, *limit)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            for f in &report.failures {
                eprintln!("failed: {f}");
            }
            eprintln!(
                "{} instances, {} tasks: {} already done, {} run, {} records written, {} failed groups",
                report.instances,
                report.tasks_total,
                report.tasks_already_done,
                report.tasks_run,
                report.records_written,
                report.failures.len()
            );
        }
        Command::Analyze { resamples, bootstrap_seed } => {
            let opts = AnalyzeOptions {
                bootstrap_seed: bootstrap_seed.unwrap_or(cfg.bootstrap_seed),
                resamples: resamples.unwrap_or(cfg.resamples),
            };
            let report = analyze(&cfg.out, &opts)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            print!("{}", report.summary);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("flbench: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
