//! Damped forward-backward fixed-point iteration.
//!
//! One iteration integrates the population forward under the current
//! policy, integrates the values backward with pointwise best responses
//! against that population, and relaxes the policy toward the best
//! response. A fixed point is a Nash equilibrium of the discretized game.

use std::time::Instant;

use serde::Serialize;

use super::sweep::{backward_sweep, backward_sweep_with_policy, forward_sweep};
use super::{sup_diff, BvpProblem, SolveError, SolveReport, SolverSettings, Trajectory};

/// Trajectory pair generated by everyone following `fixed_policy` at all
/// times: the population forward and the resulting payoffs backward.
pub fn initial_guess(problem: &BvpProblem<'_>, fixed_policy: &[f64]) -> Result<Trajectory, SolveError> {
    let model = problem.model;
    if fixed_policy.len() != model.policy_dim() {
        return Err(SolveError::InvalidProblem(format!(
            "policy has {} components, model expects {}",
            fixed_policy.len(),
            model.policy_dim()
        )));
    }
    let mesh = &problem.mesh;
    let policy = vec![fixed_policy.to_vec(); mesh.len()];
    let states = forward_sweep(model, mesh, &problem.initial_state, &policy);
    let values = backward_sweep_with_policy(model, mesh, &states, &policy)?;
    Ok(Trajectory {
        times: mesh.times().to_vec(),
        states,
        values,
        policy,
    })
}

/// Solves for the Nash equilibrium starting from `guess.policy`.
pub fn solve(
    problem: &BvpProblem<'_>,
    guess: &Trajectory,
    settings: &SolverSettings,
) -> Result<(Trajectory, SolveReport), SolveError> {
    let start = Instant::now();
    let model = problem.model;
    let mesh = &problem.mesh;
    if guess.policy.len() != mesh.len() || guess.policy.iter().any(|c| c.len() != model.policy_dim()) {
        return Err(SolveError::InvalidProblem(
            "guess policy does not match the mesh and model dimensions".into(),
        ));
    }
    if !(settings.omega > 0.0 && settings.omega <= 1.0) || !(settings.tol > 0.0) {
        return Err(SolveError::InvalidProblem(format!(
            "need 0 < omega <= 1 and tol > 0 (got {}, {})",
            settings.omega, settings.tol
        )));
    }

    let mut policy = guess.policy.clone();
    let mut omega = settings.omega;
    let mut halvings = 0;
    let mut best = f64::INFINITY;
    let mut since_best = 0;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;

    for iteration in 1..=settings.max_iter {
        iterations = iteration;
        let states = forward_sweep(model, mesh, &problem.initial_state, &policy);
        let (values, response) = backward_sweep(model, mesh, &states, &policy)?;
        residual = sup_diff(&response, &policy);

        if residual <= settings.tol {
            let trajectory = Trajectory {
                times: mesh.times().to_vec(),
                states,
                values,
                policy: response,
            };
            let report = SolveReport {
                converged: true,
                residual_norm: residual,
                iterations: iteration,
                mesh_size: mesh.len(),
                wall_time: start.elapsed().as_secs_f64(),
                omega,
            };
            return Ok((trajectory, report));
        }

        // A contraction shrinks the residual geometrically; stalling or
        // growth means the relaxation is too aggressive.
        if residual < best * 0.999 {
            best = residual;
            since_best = 0;
        } else {
            since_best += 1;
        }
        if since_best >= 8 {
            if halvings >= settings.max_halvings {
                break;
            }
            omega *= 0.5;
            halvings += 1;
            since_best = 0;
            best = residual;
        }

        for (c, r) in policy.iter_mut().zip(&response) {
            for (ci, ri) in c.iter_mut().zip(r) {
                *ci += omega * (ri - *ci);
            }
        }
    }

    Err(SolveError::NonConvergence(SolveReport {
        converged: false,
        residual_norm: residual,
        iterations,
        mesh_size: mesh.len(),
        wall_time: start.elapsed().as_secs_f64(),
        omega,
    }))
}

/// How far a trajectory is from being a Nash fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NashCertificate {
    /// Re-integrated forward states vs returned states.
    pub forward: f64,
    /// Re-integrated values vs returned values.
    pub values: f64,
    /// Pointwise best response vs returned policy.
    pub policy: f64,
}

impl NashCertificate {
    pub fn max(&self) -> f64 {
        self.forward.max(self.values).max(self.policy)
    }
}

pub fn nash_certificate(problem: &BvpProblem<'_>, trajectory: &Trajectory) -> Result<NashCertificate, SolveError> {
    let model = problem.model;
    let mesh = &problem.mesh;
    let states = forward_sweep(model, mesh, &problem.initial_state, &trajectory.policy);
    let (values, response) = backward_sweep(model, mesh, &trajectory.states, &trajectory.policy)?;
    Ok(NashCertificate {
        forward: sup_diff(&states, &trajectory.states),
        values: sup_diff(&values, &trajectory.values),
        policy: sup_diff(&response, &trajectory.policy),
    })
}
