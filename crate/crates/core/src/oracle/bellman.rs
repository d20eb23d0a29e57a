//! Discrete Bellman backups for MFG-SIRSD and a simulated infected
//! terminal penalty.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;

use crate::dynamics::SirsdValues;
use crate::model::{EpiParams, HealthStatus, ModelParams, UtilityParams};

const SCAN_POINTS: usize = 200_000;

/// Values at `t` from values at `t + τ` by one explicit Bellman step over a
/// short interval `τ`, with the susceptible contact chosen by a dense scan
/// over `[0, b_N]`.
pub fn bellman_reference(tau: f64, next: &SirsdValues, infected: f64, params: &ModelParams) -> SirsdValues {
    let epi = &params.epi;
    let u = &params.utility;
    let infect_rate = epi.beta * params.c_bar_i() * infected;
    let upper = u.upper(HealthStatus::Noninfected);

    let mut best = f64::NEG_INFINITY;
    for k in 0..=SCAN_POINTS {
        let c = upper * k as f64 / SCAN_POINTS as f64;
        let q = infect_rate * c * tau;
        let candidate = tau * u.utility_unchecked(HealthStatus::Noninfected, c) + q * next.i + (1.0 - q) * next.s;
        best = best.max(candidate);
    }
    let (mu_tau, delta_tau, gamma_tau) = (epi.mu * tau, epi.delta * tau, epi.gamma * tau);
    SirsdValues {
        s: best,
        i: tau * params.u_bar_i() + mu_tau * next.r + delta_tau * params.psi_d + (1.0 - mu_tau - delta_tau) * next.i,
        r: tau * params.u_bar_n() + gamma_tau * next.s + (1.0 - gamma_tau) * next.r,
    }
}

/// Mean and standard error of the post-horizon payoff of an infected
/// individual, relative to staying noninfected: the utility gap accrues
/// until recovery or death, and death adds `psi_d`.
pub fn terminal_penalty_monte_carlo(
    epi: &EpiParams,
    utility: &UtilityParams,
    psi_d: f64,
    samples: usize,
    seed: u64,
) -> (f64, f64) {
    let gap = utility.myopic_utility(HealthStatus::Infected) - utility.myopic_utility(HealthStatus::Noninfected);
    let exit = Exp::new(epi.mu + epi.delta).expect("mu + delta > 0");
    let die = epi.delta / (epi.mu + epi.delta);
    let payoffs: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k);
            let duration = exit.sample(&mut rng);
            gap * duration + if rng.random::<f64>() < die { psi_d } else { 0.0 }
        })
        .collect();
    let n = payoffs.len() as f64;
    let mean = payoffs.iter().sum::<f64>() / n;
    let var = payoffs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
