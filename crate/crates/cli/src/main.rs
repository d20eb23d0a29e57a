//! Command-line entry point: solve scenarios, run sweeps and check the
//! belief drift against an agent-based simulation.
//!
//! Exit codes: 0 success, 1 usage/configuration/output error, 2 solver
//! failure, 3 statistical mismatch in `validate-belief`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod belief;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};

use immunity_mfg::horizon::HorizonSchedule;
use immunity_mfg::scenarios::{
    builtin, builtin_scenarios, run_scenario, run_scenarios, write_outputs, Builtin, ScenarioConfig, ScenarioError,
    ScenarioResult, SweepConfig,
};

const OUT_ENV: &str = "IMMUNITY_MFG_OUT";

#[derive(Debug, Parser)]
#[command(
    name = "immunity-mfg",
    version,
    about = "Mean-field-game epidemic solver with immunity structure"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one scenario and write its trajectory CSV and metrics record.
    Run(RunArgs),
    /// Solve a family of scenarios concurrently, one output directory each.
    Sweep(SweepArgs),
    /// Compare the belief ODE with a Monte-Carlo cohort of recovered agents.
    ValidateBelief(belief::ValidateArgs),
    /// List the builtin scenarios.
    ListScenarios,
}

#[derive(Debug, Args)]
struct Source {
    /// Builtin scenario name (see list-scenarios).
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    scenario: Option<String>,
    /// Scenario file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OutRoot {
    /// Parent directory for outputs when no explicit directory is given.
    #[arg(long, env = OUT_ENV, default_value = "results")]
    out_root: PathBuf,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    /// Output directory [default: <out-root>/<scenario name>].
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    root: OutRoot,
    /// Override the band count minus one.
    #[arg(long)]
    m: Option<usize>,
    /// Override the horizon, e.g. "150:0.5,300:0.5".
    #[arg(long)]
    horizon: Option<HorizonSchedule>,
    /// Override the fixed-point tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    source: Source,
    /// Output root; each job writes to <out>/<job name> [default: <out-root>].
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    root: OutRoot,
    /// Probabilities of the early horizon, comma separated.
    #[arg(long, value_delimiter = ',')]
    theta: Vec<f64>,
    /// Early horizon time used with --theta [default: the sweep's own].
    #[arg(long)]
    early_time: Option<f64>,
    /// Band counts minus one, comma separated.
    #[arg(long, value_delimiter = ',')]
    m: Vec<usize>,
    /// Override the fixed-point tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Maximum number of concurrent solves.
    #[arg(long, default_value_t = 4)]
    jobs: usize,
}

/// Failure classes mapped to exit codes.
pub(crate) enum Failure {
    Usage(anyhow::Error),
    Solver(anyhow::Error),
    Mismatch(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

fn classify(e: ScenarioError) -> Failure {
    match e {
        ScenarioError::Solve { .. } => Failure::Solver(e.into()),
        _ => Failure::Usage(e.into()),
    }
}

fn load(source: &Source) -> anyhow::Result<Builtin> {
    match (&source.scenario, &source.config) {
        (Some(name), _) => builtin(name).ok_or_else(|| {
            let names: Vec<String> = builtin_scenarios()
                .iter()
                .map(|e| e.builtin.name().to_string())
                .collect();
            anyhow!("unknown scenario `{name}`; available: {}", names.join(", "))
        }),
        (None, Some(path)) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let config = ScenarioConfig::from_toml_str(&text).with_context(|| format!("in {}", path.display()))?;
            Ok(Builtin::Scenario(config))
        }
        (None, None) => bail!("either --scenario or --config is required"),
    }
}

fn report(result: &ScenarioResult, dir: &Path) {
    let m = &result.metrics;
    println!(
        "{}: peak_I={:.4} mean_I={:.4} final_D={:.4} ({}) -> {}",
        result.config.name,
        m.peak_i,
        m.mean_i,
        m.final_d,
        result.report,
        dir.display()
    );
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let mut config = match load(&args.source)? {
        Builtin::Scenario(c) => c,
        Builtin::Sweep(s) => {
            return Err(Failure::Usage(anyhow!(
                "`{}` is a sweep; use the sweep subcommand",
                s.name
            )))
        }
    };
    if let Some(m) = args.m {
        config.m = m;
    }
    if let Some(h) = &args.horizon {
        config.set_schedule(h);
    }
    if let Some(tol) = args.tol {
        config.solver.tol = tol;
    }
    config.validate().map_err(anyhow::Error::from)?;
    let dir = args
        .out
        .or_else(|| config.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| args.root.out_root.join(&config.name));

    let result = run_scenario(&config).map_err(classify)?;
    write_outputs(&result, &dir).map_err(classify)?;
    report(&result, &dir);
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<(), Failure> {
    let mut sweep = match load(&args.source)? {
        Builtin::Sweep(s) => s,
        Builtin::Scenario(c) => SweepConfig {
            name: c.name.clone(),
            base: c,
            thetas: vec![],
            early_time: None,
            ms: vec![],
        },
    };
    if !args.theta.is_empty() {
        sweep.thetas = args.theta;
    }
    if args.early_time.is_some() {
        sweep.early_time = args.early_time;
    }
    if !args.m.is_empty() {
        sweep.ms = args.m;
    }
    if let Some(tol) = args.tol {
        sweep.base.solver.tol = tol;
    }
    if args.jobs == 0 {
        return Err(Failure::Usage(anyhow!("--jobs must be at least 1")));
    }
    let configs = sweep.expand().map_err(anyhow::Error::from)?;
    let root = args.out.unwrap_or(args.root.out_root);

    let mut summary = csv::Writer::from_writer(Vec::new());
    summary
        .write_record([
            "scenario",
            "theta",
            "m",
            "peak_I",
            "mean_I",
            "final_D",
            "converged",
            "iterations",
        ])
        .map_err(anyhow::Error::from)?;
    let mut failures = Vec::new();
    for (config, outcome) in configs.iter().zip(run_scenarios(&configs, args.jobs)) {
        match outcome {
            Ok(result) => {
                let dir = root.join(&config.name);
                write_outputs(&result, &dir).map_err(classify)?;
                report(&result, &dir);
                let theta = if config.horizon.times.len() == 2 {
                    config.horizon.probs[0].to_string()
                } else {
                    String::new()
                };
                let m = &result.metrics;
                summary
                    .write_record([
                        config.name.clone(),
                        theta,
                        if config.model.is_structured() {
                            config.m.to_string()
                        } else {
                            String::new()
                        },
                        format!("{:.9e}", m.peak_i),
                        format!("{:.9e}", m.mean_i),
                        format!("{:.9e}", m.final_d),
                        result.report.converged.to_string(),
                        result.report.iterations.to_string(),
                    ])
                    .map_err(anyhow::Error::from)?;
            }
            Err(e) => {
                eprintln!("error: {e}");
                failures.push(e);
            }
        }
    }
    let bytes = summary.into_inner().map_err(|e| anyhow!("{e}"))?;
    fs::create_dir_all(&root).with_context(|| format!("creating {}", root.display()))?;
    let path = root.join(format!("{}-summary.csv", sweep.name));
    fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;

    match failures.into_iter().next() {
        None => Ok(()),
        Some(e) => Err(classify(e)),
    }
}

fn list_scenarios() {
    for entry in builtin_scenarios() {
        println!("{:<22} {}", entry.builtin.name(), entry.description);
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Run(args) => run(args),
        Command::Sweep(args) => sweep(args),
        Command::ValidateBelief(args) => belief::validate(args),
        Command::ListScenarios => {
            list_scenarios();
            Ok(())
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Solver(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Mismatch(msg)) => {
            eprintln!("mismatch: {msg}");
            ExitCode::from(3)
        }
    }
}
