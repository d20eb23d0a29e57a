use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use super::config::{ConfigError, ModelKind, ScenarioConfig};
use super::metrics::{compute_metrics, Metrics};
use crate::bvp::{
    continuation_in_m, initial_guess, nash_certificate, solve, BvpProblem, Level, Mesh, NashCertificate, SolveError,
    SolveReport, Trajectory,
};
use crate::dynamics::Grid;
use crate::game::{GameModel, SirsdGame, StructuredGame};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("scenario `{name}` failed")]
    Solve {
        name: String,
        #[source]
        source: SolveError,
    },
    #[error("scenario `{name}`: could not write output")]
    Io {
        name: String,
        #[source]
        source: io::Error,
    },
    #[error("unknown scenario `{0}`")]
    Unknown(String),
}

/// The game a scenario was solved with.
#[derive(Debug, Clone)]
pub enum ScenarioGame {
    Sirsd(SirsdGame),
    Structured(StructuredGame),
}

impl ScenarioGame {
    pub fn model(&self) -> &dyn GameModel {
        match self {
            ScenarioGame::Sirsd(g) => g,
            ScenarioGame::Structured(g) => g,
        }
    }

    pub fn structured(&self) -> Option<&StructuredGame> {
        match self {
            ScenarioGame::Structured(g) => Some(g),
            ScenarioGame::Sirsd(_) => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub config: ScenarioConfig,
    pub game: ScenarioGame,
    pub trajectory: Trajectory,
    pub metrics: Metrics,
    pub report: SolveReport,
    /// Fixed-point certificate; absent for myopic scenarios.
    pub certificate: Option<NashCertificate>,
    /// Band counts solved on the way, coarsest first.
    pub ladder: Vec<usize>,
}

fn fixed_policy_report(mesh: &Mesh, omega: f64, start: Instant) -> SolveReport {
    SolveReport {
        converged: true,
        residual_norm: 0.0,
        iterations: 0,
        mesh_size: mesh.len(),
        wall_time: start.elapsed().as_secs_f64(),
        omega,
    }
}

/// Solves (or, for myopic models, simulates) one scenario.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioResult, ScenarioError> {
    let start = Instant::now();
    config.validate()?;
    let name = config.name.clone();
    let failed = |source: SolveError| ScenarioError::Solve {
        name: name.clone(),
        source,
    };
    let params = config.params.model_params();
    let schedule = config.schedule()?;
    let events = schedule.events().map_err(|e| ConfigError::Invalid {
        name: name.clone(),
        reason: e.to_string(),
    })?;
    let mesh = Mesh::uniform(schedule.final_time(), config.solver.intervals, &events).map_err(failed)?;
    let settings = config.solver.settings();
    let init = config.initial;

    let (game, trajectory, report, certificate, ladder) = match config.model.drift() {
        None => {
            let game = SirsdGame::new(params);
            let x0 = vec![init.susceptible, init.infected, init.recovered, init.dead];
            let problem = BvpProblem::new(&game, x0, mesh.clone()).map_err(failed)?;
            let guess = initial_guess(&problem, &game.myopic_policy()).map_err(failed)?;
            let (trajectory, report, certificate) = if config.model.is_myopic() {
                (guess, fixed_policy_report(&mesh, settings.omega, start), None)
            } else {
                let (trajectory, report) = solve(&problem, &guess, &settings).map_err(failed)?;
                let certificate = nash_certificate(&problem, &trajectory).map_err(failed)?;
                (trajectory, report, Some(certificate))
            };
            (ScenarioGame::Sirsd(game), trajectory, report, certificate, vec![])
        }
        Some(kind) => {
            let alpha = config.alpha();
            let build = |m: usize| -> Result<Level, SolveError> {
                let game = StructuredGame::new(params, kind, Grid::new(m, alpha)?);
                let layout = game.layout();
                let mut x0 = vec![0.0; layout.state_dim()];
                x0[0] = init.susceptible;
                x0[m] += init.recovered;
                x0[layout.infected()] = init.infected;
                x0[layout.dead()] = init.dead;
                Ok(Level {
                    game,
                    initial_state: x0,
                    mesh: mesh.clone(),
                })
            };
            if config.model.is_myopic() {
                let level = build(config.m).map_err(failed)?;
                let problem =
                    BvpProblem::new(&level.game, level.initial_state.clone(), level.mesh.clone()).map_err(failed)?;
                let trajectory = initial_guess(&problem, &level.game.myopic_policy()).map_err(failed)?;
                let report = fixed_policy_report(&mesh, settings.omega, start);
                (
                    ScenarioGame::Structured(level.game),
                    trajectory,
                    report,
                    None,
                    vec![config.m],
                )
            } else {
                let (level, outcome) =
                    continuation_in_m(config.m, config.solver.coarse_m, &settings, build).map_err(failed)?;
                let problem =
                    BvpProblem::new(&level.game, level.initial_state.clone(), level.mesh.clone()).map_err(failed)?;
                let certificate = nash_certificate(&problem, &outcome.trajectory).map_err(failed)?;
                let mut report = outcome.report;
                report.iterations = outcome.total_iterations;
                report.wall_time = start.elapsed().as_secs_f64();
                (
                    ScenarioGame::Structured(level.game),
                    outcome.trajectory,
                    report,
                    Some(certificate),
                    outcome.ladder,
                )
            }
        }
    };

    let model = game.model();
    let metrics = compute_metrics(
        &trajectory.times,
        &trajectory.state_series(model.infected_index()),
        &trajectory.state_series(model.dead_index()),
        &schedule,
    );
    Ok(ScenarioResult {
        config: config.clone(),
        game,
        trajectory,
        metrics,
        report,
        certificate,
        ladder,
    })
}

/// Runs independent scenarios on at most `jobs` worker threads, in input order.
pub fn run_scenarios(configs: &[ScenarioConfig], jobs: usize) -> Vec<Result<ScenarioResult, ScenarioError>> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .expect("thread pool");
    pool.install(|| configs.par_iter().map(run_scenario).collect())
}

/// CSV header: time, forward state, values, then contact rates.
pub fn column_names(model: ModelKind, m: usize) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    if model.is_structured() {
        cols.extend((0..=m).map(|j| format!("N_{j}")));
        cols.extend(["I".into(), "D".into()]);
        cols.extend((0..=m).map(|j| format!("V_{j}")));
        cols.push("V_I".into());
        cols.extend((0..=m).map(|j| format!("c_{j}")));
    } else {
        cols.extend(["S", "I", "R", "D", "V_S", "V_I", "V_R", "c_S"].map(String::from));
    }
    cols
}

/// Writes one row per mesh node (event times appear twice, left limit first)
/// with 10 significant digits.
pub fn write_trajectory_csv<W: Write>(result: &ScenarioResult, writer: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(column_names(result.config.model, result.config.m))?;
    let traj = &result.trajectory;
    for k in 0..traj.len() {
        let row = std::iter::once(traj.times[k])
            .chain(traj.states[k].iter().copied())
            .chain(traj.values[k].iter().copied())
            .chain(traj.policy[k].iter().copied())
            .map(|x| format!("{x:.9e}"));
        out.write_record(row)?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricsRecord<'a> {
    pub scenario: &'a str,
    pub model: ModelKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub horizon: String,
    #[serde(flatten)]
    pub metrics: Metrics,
    pub report: &'a SolveReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<NashCertificate>,
    #[serde(skip_serializing_if = "<[usize]>::is_empty")]
    pub ladder: &'a [usize],
}

impl<'a> MetricsRecord<'a> {
    pub fn new(result: &'a ScenarioResult) -> Self {
        let c = &result.config;
        let structured = c.model.is_structured();
        Self {
            scenario: &c.name,
            model: c.model,
            m: structured.then_some(c.m),
            alpha: structured.then(|| c.alpha()),
            horizon: c.schedule().map(|s| s.to_string()).unwrap_or_default(),
            metrics: result.metrics,
            report: &result.report,
            certificate: result.certificate,
            ladder: &result.ladder,
        }
    }
}

/// Writes the trajectory CSV, the metrics record and the resolved scenario
/// file into `dir`. Returns the written paths.
pub fn write_outputs(result: &ScenarioResult, dir: &Path) -> Result<Vec<PathBuf>, ScenarioError> {
    let io_err = |source: io::Error| ScenarioError::Io {
        name: result.config.name.clone(),
        source,
    };
    fs::create_dir_all(dir).map_err(io_err)?;
    let out = &result.config.output;
    let trajectory = dir.join(&out.trajectory);
    let metrics = dir.join(&out.metrics);
    let scenario = dir.join("scenario.toml");

    let file = io::BufWriter::new(fs::File::create(&trajectory).map_err(io_err)?);
    write_trajectory_csv(result, file).map_err(|e| io_err(e.into()))?;
    let mut json = serde_json::to_string_pretty(&MetricsRecord::new(result)).map_err(|e| io_err(e.into()))?;
    json.push('\n');
    fs::write(&metrics, json).map_err(io_err)?;
    fs::write(&scenario, result.config.to_toml_string()?).map_err(io_err)?;
    Ok(vec![trajectory, metrics, scenario])
}
