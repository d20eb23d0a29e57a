use crate::model::{EpiParams, ModelParams, Penalties};
use crate::optimize::best_response;

/// Population fractions of the scalar model.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SirsdState {
    pub s: f64,
    pub i: f64,
    pub r: f64,
    pub d: f64,
}

impl SirsdState {
    pub fn from_slice(x: &[f64]) -> Self {
        Self {
            s: x[0],
            i: x[1],
            r: x[2],
            d: x[3],
        }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.s, self.i, self.r, self.d]
    }

    pub fn total(&self) -> f64 {
        self.s + self.i + self.r + self.d
    }
}

/// Values of being susceptible, infected and recovered.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SirsdValues {
    pub s: f64,
    pub i: f64,
    pub r: f64,
}

impl SirsdValues {
    pub fn from_slice(v: &[f64]) -> Self {
        Self {
            s: v[0],
            i: v[1],
            r: v[2],
        }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.s, self.i, self.r]
    }
}

/// SIRSD derivatives for contact rates `(c_S, c_I)`.
pub fn sirsd_rhs(state: &SirsdState, contacts: (f64, f64), epi: &EpiParams) -> SirsdState {
    let (c_s, c_i) = contacts;
    let infections = epi.beta * c_i * c_s * state.i * state.s;
    let losses = epi.gamma * state.r;
    let recoveries = epi.mu * state.i;
    let deaths = epi.delta * state.i;
    SirsdState {
        s: -infections + losses,
        i: infections - recoveries - deaths,
        r: recoveries - losses,
        d: deaths,
    }
}

/// Hamilton-Jacobi derivatives with the susceptible contact rate fixed.
pub fn sirsd_value_rhs_with_policy(
    vals: &SirsdValues,
    infected: f64,
    c_s: f64,
    c_i: f64,
    params: &ModelParams,
    penalties: &Penalties,
) -> SirsdValues {
    let epi = &params.epi;
    let u_s = params
        .utility
        .utility_unchecked(crate::model::HealthStatus::Noninfected, c_s);
    SirsdValues {
        s: -u_s + epi.beta * c_i * c_s * infected * (vals.s - vals.i),
        i: -params.u_bar_i() + epi.mu * (vals.i - vals.r) + epi.delta * (vals.i - penalties.psi_d),
        r: -params.u_bar_n() + epi.gamma * (vals.r - vals.s),
    }
}

/// Hamilton-Jacobi derivatives with the Nash contact rate of susceptibles
/// substituted. Returns the derivatives and that contact rate.
pub fn mfg_sirsd_value_rhs(
    vals: &SirsdValues,
    infected: f64,
    c_i: f64,
    params: &ModelParams,
    penalties: &Penalties,
) -> (SirsdValues, f64) {
    let kappa = params.epi.beta * c_i * infected * (vals.i - vals.s);
    let c_s = best_response(kappa, 0.0, &params.utility).value();
    (
        sirsd_value_rhs_with_policy(vals, infected, c_s, c_i, params, penalties),
        c_s,
    )
}
