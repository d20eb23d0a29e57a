//! Immunity-structured model on a band grid.
//!
//! Forward state layout: `[N_0, .., N_m, I, D]` where `N_j` is the mass
//! (population fraction) of noninfected individuals in band `j`. Value
//! layout: `[V_0, .., V_m, V_I]`.
//!
//! The transport term uses the interface flux `f_j⁺ N_j + f_{j+1}⁻ N_{j+1}`
//! with zero ghost masses; the Hamilton-Jacobi equation uses central
//! differences plus a Lax-Friedrichs term with linearly extrapolated ghost
//! values. Both divide by the uniform spacing `h`, edge bands included.

use super::{DriftSpec, DynamicsError, Grid};
use crate::model::{HealthStatus, ModelParams, Penalties};
use crate::optimize::best_response;

/// Index bookkeeping for the flat band vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BandLayout {
    pub bands: usize,
}

impl BandLayout {
    pub fn new(grid: &Grid) -> Self {
        Self { bands: grid.bands() }
    }

    pub fn infected(&self) -> usize {
        self.bands
    }

    pub fn dead(&self) -> usize {
        self.bands + 1
    }

    pub fn state_dim(&self) -> usize {
        self.bands + 2
    }

    pub fn value_infected(&self) -> usize {
        self.bands
    }

    pub fn value_dim(&self) -> usize {
        self.bands + 1
    }
}

/// Upwind interface flux from flux-vector splitting.
pub fn interface_flux(f_left: f64, f_right: f64, n_left: f64, n_right: f64) -> f64 {
    f_left.max(0.0) * n_left + f_right.min(0.0) * n_right
}

/// Forward derivatives of `[N_0, .., N_m, I, D]` under per-band contact rates.
pub fn structured_forward_rhs(
    state: &[f64],
    policy: &[f64],
    drift: &DriftSpec,
    grid: &Grid,
    params: &ModelParams,
    out: &mut [f64],
) {
    let layout = BandLayout::new(grid);
    let n = layout.bands;
    let infected = state[layout.infected()];
    let p = grid.centers();
    let h = grid.h();
    let epi = &params.epi;
    let force = epi.beta * params.c_bar_i() * infected;

    let speed = |j: usize| drift.value(p[j], policy[j], infected);
    // flux through the lower interface of band j, starting with the ghost side
    let mut lower = speed(0).min(0.0) * state[0];
    let mut new_infections = 0.0;
    let mut f_here = speed(0);
    for j in 0..n {
        let upper = if j + 1 < n {
            let f_next = speed(j + 1);
            let flux = interface_flux(f_here, f_next, state[j], state[j + 1]);
            f_here = f_next;
            flux
        } else {
            f_here.max(0.0) * state[j]
        };
        let infections = force * policy[j] * (1.0 - p[j]) * state[j];
        new_infections += infections;
        out[j] = -(upper - lower) / h - infections;
        lower = upper;
    }
    let recoveries = epi.mu * infected;
    let deaths = epi.delta * infected;
    out[n - 1] += recoveries;
    out[layout.infected()] = new_infections - recoveries - deaths;
    out[layout.dead()] = deaths;
}

enum Policy<'a> {
    Optimal,
    Fixed(&'a [f64]),
}

#[allow(clippy::too_many_arguments)]
fn value_rhs(
    values: &[f64],
    state: &[f64],
    drift: &DriftSpec,
    grid: &Grid,
    params: &ModelParams,
    penalties: &Penalties,
    policy: Policy<'_>,
    out: &mut [f64],
    policy_out: &mut [f64],
) -> Result<(), DynamicsError> {
    let layout = BandLayout::new(grid);
    let n = layout.bands;
    let m = n - 1;
    let infected = state[layout.infected()];
    let v_i = values[layout.value_infected()];
    let p = grid.centers();
    let h = grid.h();
    let alpha = grid.alpha();
    let epi = &params.epi;
    let force = epi.beta * params.c_bar_i() * infected;

    let v = |j: isize| -> f64 {
        if j < 0 {
            2.0 * values[0] - values[1]
        } else if j as usize > m {
            2.0 * values[m] - values[m - 1]
        } else {
            values[j as usize]
        }
    };

    let mut max_drift: f64 = 0.0;
    for j in 0..n {
        let jj = j as isize;
        let (left, here, right) = (v(jj - 1), values[j], v(jj + 1));
        let slope = (right - left) / (2.0 * h);
        let curvature = (right - 2.0 * here + left) / (2.0 * h);
        let c = match policy {
            Policy::Optimal => {
                let kappa = force * (1.0 - p[j]) * (v_i - here);
                let lambda = drift.d_contact(p[j], infected) * slope;
                best_response(kappa, lambda, &params.utility).value()
            }
            Policy::Fixed(fixed) => fixed[j],
        };
        let f = drift.value(p[j], c, infected);
        max_drift = max_drift.max(f.abs());
        let u = params.utility.utility_unchecked(HealthStatus::Noninfected, c);
        out[j] = -u + force * c * (1.0 - p[j]) * (here - v_i) - f * slope - alpha * curvature;
        policy_out[j] = c;
    }
    if matches!(policy, Policy::Optimal) && alpha < max_drift * (1.0 - 1e-12) {
        return Err(DynamicsError::AlphaTooSmall { alpha, max_drift });
    }
    out[layout.value_infected()] = -params.u_bar_i() + epi.mu * (v_i - values[m]) + epi.delta * (v_i - penalties.psi_d);
    Ok(())
}

/// Value derivatives with per-band Nash contact rates, written to `policy_out`.
///
/// Fails if the Lax-Friedrichs coefficient is smaller than the largest drift
/// magnitude the assembled scheme uses.
#[allow(clippy::too_many_arguments)]
pub fn structured_value_rhs(
    values: &[f64],
    state: &[f64],
    drift: &DriftSpec,
    grid: &Grid,
    params: &ModelParams,
    penalties: &Penalties,
    out: &mut [f64],
    policy_out: &mut [f64],
) -> Result<(), DynamicsError> {
    value_rhs(
        values,
        state,
        drift,
        grid,
        params,
        penalties,
        Policy::Optimal,
        out,
        policy_out,
    )
}

/// Value derivatives of following the given per-band contact rates.
///
/// Used for myopic baselines and starting guesses; the drift bound on the
/// Lax-Friedrichs coefficient is only enforced on the Nash path.
#[allow(clippy::too_many_arguments)]
pub fn structured_value_rhs_with_policy(
    values: &[f64],
    state: &[f64],
    policy: &[f64],
    drift: &DriftSpec,
    grid: &Grid,
    params: &ModelParams,
    penalties: &Penalties,
    out: &mut [f64],
) -> Result<(), DynamicsError> {
    let mut scratch = vec![0.0; grid.bands()];
    value_rhs(
        values,
        state,
        drift,
        grid,
        params,
        penalties,
        Policy::Fixed(policy),
        out,
        &mut scratch,
    )
}

/// Band masses converted to densities on `[0, 1]`.
pub fn band_densities(state: &[f64], grid: &Grid) -> Vec<f64> {
    state
        .iter()
        .zip(grid.widths())
        .map(|(mass, width)| mass / width)
        .collect()
}
