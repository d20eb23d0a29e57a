//! Agent-based check of the belief drift.
//!
//! Every agent recovers at `t_R` fully immune, loses immunity after an
//! exponential time with rate `γ` (unobserved), and from then on is
//! re-infected with hazard `β c̄_I c(t) I(t)`. Among agents not yet
//! re-infected at `t`, the fraction still immune estimates the belief `p(t)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::Serialize;

use super::{OracleError, Profile};
use crate::dynamics::belief_drift;
use crate::model::EpiParams;

/// Contact policy and infection curve seen by a cohort recovering at `t_recovery`.
#[derive(Debug, Clone)]
pub struct CohortSpec {
    pub contact: Profile,
    pub infected: Profile,
    pub t_recovery: f64,
    pub t_end: f64,
    pub epi: EpiParams,
    pub c_bar_i: f64,
    /// Upper bound on contacts, `b_N`; enters the thinning majorant.
    pub contact_cap: f64,
}

impl CohortSpec {
    fn validate(&self) -> Result<(), OracleError> {
        let bad = |msg: String| Err(OracleError::InvalidCohort(msg));
        if !(self.t_end > self.t_recovery) {
            return bad(format!("window [{}, {}] is empty", self.t_recovery, self.t_end));
        }
        if self.contact.min() < 0.0 || self.contact.max() > self.contact_cap {
            return bad(format!("contacts must lie in [0, {}]", self.contact_cap));
        }
        if self.infected.min() < 0.0 || self.infected.max() > 1.0 {
            return bad("infected fraction must lie in [0, 1]".into());
        }
        self.epi
            .validate()
            .map_err(|e| OracleError::InvalidCohort(e.to_string()))
    }

    fn hazard(&self, t: f64) -> f64 {
        self.epi.beta * self.c_bar_i * self.contact.eval(t) * self.infected.eval(t)
    }

    fn majorant(&self) -> f64 {
        self.epi.beta * self.c_bar_i * self.contact_cap * self.infected.max()
    }
}

/// One simulated agent after recovery.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentPath {
    pub t_recovery: f64,
    /// Hidden time at which immunity is lost; infinite if never.
    pub immunity_loss: f64,
    /// Re-infection time within the window, if any.
    pub infection: Option<f64>,
}

impl AgentPath {
    pub fn infected_by(&self, t: f64) -> bool {
        self.infection.is_some_and(|s| s <= t)
    }

    pub fn immune_at(&self, t: f64) -> bool {
        self.immunity_loss > t
    }
}

/// Simulates agent `index` on its own counter-based stream of `seed`.
pub fn simulate_agent(spec: &CohortSpec, index: u64, seed: u64) -> AgentPath {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let immunity_loss = if spec.epi.gamma > 0.0 {
        spec.t_recovery + Exp::new(spec.epi.gamma).expect("positive rate").sample(&mut rng)
    } else {
        f64::INFINITY
    };
    let majorant = spec.majorant();
    let mut infection = None;
    if immunity_loss < spec.t_end && majorant > 0.0 {
        let clock = Exp::new(majorant).expect("positive rate");
        let mut t = immunity_loss;
        loop {
            t += clock.sample(&mut rng);
            if t > spec.t_end {
                break;
            }
            if rng.random::<f64>() * majorant < spec.hazard(t) {
                infection = Some(t);
                break;
            }
        }
    }
    AgentPath {
        t_recovery: spec.t_recovery,
        immunity_loss,
        infection,
    }
}

/// Empirical belief at one sample time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CohortSample {
    pub t: f64,
    /// Agents not re-infected by `t`.
    pub at_risk: usize,
    /// Agents still immune at `t`.
    pub immune: usize,
    /// `None` when every agent has been re-infected.
    pub p_hat: Option<f64>,
    pub std_err: Option<f64>,
}

/// Simulates `n_agents` agents and estimates `p̂(t)` at each sample time.
pub fn simulate_belief_cohort(
    spec: &CohortSpec,
    n_agents: usize,
    sample_times: &[f64],
    seed: u64,
) -> Result<Vec<CohortSample>, OracleError> {
    spec.validate()?;
    if n_agents < 10_000 {
        return Err(OracleError::InvalidCohort(format!(
            "need at least 10000 agents, got {n_agents}"
        )));
    }
    if sample_times.iter().any(|&t| t < spec.t_recovery || t > spec.t_end) {
        return Err(OracleError::InvalidCohort("sample times must lie in the window".into()));
    }
    let agents: Vec<AgentPath> = (0..n_agents as u64)
        .into_par_iter()
        .map(|k| simulate_agent(spec, k, seed))
        .collect();

    let mut losses: Vec<f64> = agents.iter().map(|a| a.immunity_loss).collect();
    let mut infections: Vec<f64> = agents.iter().map(|a| a.infection.unwrap_or(f64::INFINITY)).collect();
    losses.sort_by(f64::total_cmp);
    infections.sort_by(f64::total_cmp);

    Ok(sample_times
        .iter()
        .map(|&t| {
            let immune = n_agents - losses.partition_point(|&s| s <= t);
            let at_risk = n_agents - infections.partition_point(|&s| s <= t);
            let p_hat = (at_risk > 0).then(|| immune as f64 / at_risk as f64);
            let std_err = p_hat.map(|p| (p * (1.0 - p) / at_risk as f64).sqrt());
            CohortSample {
                t,
                at_risk,
                immune,
                p_hat,
                std_err,
            }
        })
        .collect())
}

/// Integrates the belief drift from `p(t_R) = 1` with RK4 and returns the
/// belief at each (nondecreasing) sample time.
pub fn belief_path(spec: &CohortSpec, sample_times: &[f64], steps_per_day: usize) -> Vec<f64> {
    let rhs = |t: f64, p: f64| belief_drift(p, spec.contact.eval(t), spec.infected.eval(t), &spec.epi, spec.c_bar_i);
    let max_dt = 1.0 / steps_per_day.max(1) as f64;
    let (mut t, mut p) = (spec.t_recovery, 1.0);
    let mut out = Vec::with_capacity(sample_times.len());
    for &target in sample_times {
        while t < target {
            let dt = max_dt.min(target - t);
            let k1 = rhs(t, p);
            let k2 = rhs(t + 0.5 * dt, p + 0.5 * dt * k1);
            let k3 = rhs(t + 0.5 * dt, p + 0.5 * dt * k2);
            let k4 = rhs(t + dt, p + dt * k3);
            p += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t = if target - (t + dt) < 1e-12 { target } else { t + dt };
        }
        out.push(p);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub t: f64,
    pub ode: f64,
    pub p_hat: Option<f64>,
    pub std_err: Option<f64>,
    pub at_risk: usize,
    /// `|ode − p̂| / SE`; zero when both agree exactly.
    pub z: Option<f64>,
    pub within: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeliefComparison {
    pub rows: Vec<ComparisonRow>,
    /// Sample times at which no agent was left at risk.
    pub degenerate: usize,
    pub max_z: f64,
    pub passed: bool,
}

/// Checks the ODE belief against the cohort within `z_max` standard errors.
///
/// The standard error is the larger of the plug-in binomial error of `p̂`
/// and the binomial error implied by the ODE value, so a cohort with no
/// spread (`p̂ ∈ {0, 1}`) is still compared at a meaningful resolution.
/// Degenerate samples are reported and skipped.
pub fn compare_belief(ode: &[f64], samples: &[CohortSample], z_max: f64) -> BeliefComparison {
    let mut degenerate = 0;
    let mut max_z: f64 = 0.0;
    let rows: Vec<ComparisonRow> = ode
        .iter()
        .zip(samples)
        .map(|(&p, s)| {
            let Some(p_hat) = s.p_hat else {
                degenerate += 1;
                return ComparisonRow {
                    t: s.t,
                    ode: p,
                    p_hat: None,
                    std_err: None,
                    at_risk: 0,
                    z: None,
                    within: true,
                };
            };
            let null_se = (p.clamp(0.0, 1.0) * (1.0 - p.clamp(0.0, 1.0)) / s.at_risk as f64).sqrt();
            let se = s.std_err.unwrap_or(0.0).max(null_se);
            let gap = (p - p_hat).abs();
            let z = if gap == 0.0 { 0.0 } else { gap / se };
            max_z = max_z.max(z);
            ComparisonRow {
                t: s.t,
                ode: p,
                p_hat: Some(p_hat),
                std_err: Some(se),
                at_risk: s.at_risk,
                z: Some(z),
                within: z <= z_max,
            }
        })
        .collect();
    let passed = rows.iter().all(|r| r.within);
    BeliefComparison {
        rows,
        degenerate,
        max_z,
        passed,
    }
}

/// `n` equally spaced times in `(t_start, t_end]`.
pub fn uniform_sample_times(t_start: f64, t_end: f64, n: usize) -> Vec<f64> {
    (1..=n)
        .map(|k| t_start + (t_end - t_start) * k as f64 / n as f64)
        .collect()
}

/// Simulates the cohort and compares it with the ODE belief integrated
/// using `ode_gamma` in place of the cohort's `γ` (pass the true value for
/// a genuine check, a perturbed one for a negative control).
pub fn validate_belief(
    spec: &CohortSpec,
    ode_gamma: f64,
    n_agents: usize,
    n_samples: usize,
    seed: u64,
) -> Result<BeliefComparison, OracleError> {
    let times = uniform_sample_times(spec.t_recovery, spec.t_end, n_samples);
    let samples = simulate_belief_cohort(spec, n_agents, &times, seed)?;
    let mut ode_spec = spec.clone();
    ode_spec.epi.gamma = ode_gamma;
    let ode = belief_path(&ode_spec, &times, 100);
    Ok(compare_belief(&ode, &samples, 3.0))
}
