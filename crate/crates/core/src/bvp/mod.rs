//! Forward-backward boundary value problems for Nash equilibria.
//!
//! Forward variables carry initial conditions, values carry terminal
//! conditions, and each uncertain horizon adds an interior node where the
//! values jump while the forward state stays continuous. Event times appear
//! twice in the mesh: first as the left limit, then as the right limit.

mod continuation;
mod solver;
mod sweep;

pub use continuation::{continuation_in_m, continuation_ladder, interpolate_bands, ContinuationOutcome, Level};
pub use solver::{initial_guess, nash_certificate, solve, NashCertificate};
pub use sweep::{backward_sweep, backward_sweep_with_policy, forward_sweep};

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::dynamics::DynamicsError;
use crate::game::GameModel;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("fixed-point iteration did not converge: {0}")]
    NonConvergence(SolveReport),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("solve failed at m = {m}")]
    AtLevel {
        m: usize,
        #[source]
        source: Box<SolveError>,
    },
}

/// Time nodes, with event times duplicated.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    times: Vec<f64>,
    /// `jumps[i]` holds `θ̃` when node `i` is the right limit at an event.
    jumps: Vec<Option<f64>>,
}

impl Mesh {
    /// `intervals` uniform steps on `[0, t_end]` with the event times
    /// inserted (as nodes, twice). `events` are `(time, θ̃)` pairs.
    pub fn uniform(t_end: f64, intervals: usize, events: &[(f64, f64)]) -> Result<Self, SolveError> {
        if !(t_end > 0.0 && t_end.is_finite()) || intervals == 0 {
            return Err(SolveError::InvalidProblem(format!(
                "mesh needs a positive end time and at least one interval (got {t_end}, {intervals})"
            )));
        }
        let mut base: Vec<f64> = (0..=intervals).map(|k| t_end * k as f64 / intervals as f64).collect();
        let snap = 1e-9 * t_end;
        for &(te, _) in events {
            if !(te > 0.0 && te < t_end) {
                return Err(SolveError::InvalidProblem(format!(
                    "event time {te} outside the open interval (0, {t_end})"
                )));
            }
            match base.iter().position(|&t| (t - te).abs() <= snap) {
                Some(k) => base[k] = te,
                None => {
                    let k = base.partition_point(|&t| t < te);
                    base.insert(k, te);
                }
            }
        }
        let mut times = Vec::with_capacity(base.len() + events.len());
        let mut jumps = Vec::with_capacity(base.len() + events.len());
        for t in base {
            times.push(t);
            jumps.push(None);
            if let Some(&(_, theta)) = events.iter().find(|(te, _)| *te == t) {
                times.push(t);
                jumps.push(Some(theta));
            }
        }
        Ok(Self { times, jumps })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("mesh is nonempty")
    }

    /// `θ̃` if node `i` is the right limit of an event.
    pub fn jump_at(&self, i: usize) -> Option<f64> {
        self.jumps[i]
    }

    /// Event times in increasing order.
    pub fn event_times(&self) -> Vec<f64> {
        (0..self.len())
            .filter(|&i| self.jumps[i].is_some())
            .map(|i| self.times[i])
            .collect()
    }
}

/// Forward states, values and policy at every mesh node.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub values: Vec<Vec<f64>>,
    pub policy: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Time series of one forward component.
    pub fn state_series(&self, index: usize) -> Vec<f64> {
        self.states.iter().map(|x| x[index]).collect()
    }

    pub fn policy_series(&self, index: usize) -> Vec<f64> {
        self.policy.iter().map(|c| c[index]).collect()
    }

    pub fn value_series(&self, index: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[index]).collect()
    }
}

/// A game, its initial forward state and the mesh (which carries the
/// horizon events). Terminal values come from the game.
pub struct BvpProblem<'a> {
    pub model: &'a dyn GameModel,
    pub initial_state: Vec<f64>,
    pub mesh: Mesh,
}

impl<'a> BvpProblem<'a> {
    pub fn new(model: &'a dyn GameModel, initial_state: Vec<f64>, mesh: Mesh) -> Result<Self, SolveError> {
        if initial_state.len() != model.state_dim() {
            return Err(SolveError::InvalidProblem(format!(
                "initial state has {} components, model expects {}",
                initial_state.len(),
                model.state_dim()
            )));
        }
        Ok(Self {
            model,
            initial_state,
            mesh,
        })
    }

    pub fn terminal_values(&self) -> Vec<f64> {
        self.model.terminal_values()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverSettings {
    /// Sup-norm tolerance on the policy fixed-point residual (contacts/day).
    pub tol: f64,
    /// Initial relaxation factor in (0, 1].
    pub omega: f64,
    pub max_iter: usize,
    /// How often `omega` may be halved when the residual stops decreasing.
    pub max_halvings: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            omega: 0.5,
            max_iter: 2000,
            max_halvings: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub converged: bool,
    pub residual_norm: f64,
    pub iterations: usize,
    pub mesh_size: usize,
    /// Not serialized, so that written reports are reproducible.
    #[serde(skip)]
    pub wall_time: f64,
    pub omega: f64,
}

impl fmt::Display for SolveReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "converged={} residual={:.3e} iterations={} mesh={} omega={} time={:.2}s",
            self.converged, self.residual_norm, self.iterations, self.mesh_size, self.omega, self.wall_time
        )
    }
}

pub(crate) fn sup_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max)
}
