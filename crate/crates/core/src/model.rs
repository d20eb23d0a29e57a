//! Model constants, the contact utility and the terminal penalties.
//!
//! Every model variant shares the same utility `u_z(c) = (b_z c - c^2)^g - a_z`
//! for the two observable health statuses (noninfected / infected) and the
//! same terminal payoffs at the planning horizon.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("contact rate {c} outside the feasible interval [0, {upper}] for status {status:?}")]
    ContactOutOfRange { status: HealthStatus, c: f64, upper: f64 },
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
}

/// Observable health status relevant to utility.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HealthStatus {
    Noninfected,
    Infected,
}

/// Daily contact rate chosen by an individual.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct ContactRate(pub f64);

impl ContactRate {
    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UtilityParams {
    pub g: f64,
    pub b_n: f64,
    pub b_i: f64,
    pub a_n: f64,
    pub a_i: f64,
}

impl Default for UtilityParams {
    fn default() -> Self {
        Self {
            g: 0.25,
            b_n: 10.0,
            b_i: 6.0,
            a_n: 0.0,
            a_i: 4.0,
        }
    }
}

impl UtilityParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.g > 0.0 && self.g <= 1.0) {
            return Err(ModelError::InvalidParameter {
                name: "g",
                value: self.g,
                reason: "must lie in (0, 1]",
            });
        }
        for (name, value) in [("b_n", self.b_n), ("b_i", self.b_i)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ModelError::InvalidParameter {
                    name,
                    value,
                    reason: "must be positive",
                });
            }
        }
        for (name, value) in [("a_n", self.a_n), ("a_i", self.a_i)] {
            if !value.is_finite() {
                return Err(ModelError::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite",
                });
            }
        }
        Ok(())
    }

    /// Upper end of the feasible contact interval for `status`.
    pub fn upper(&self, status: HealthStatus) -> f64 {
        match status {
            HealthStatus::Noninfected => self.b_n,
            HealthStatus::Infected => self.b_i,
        }
    }

    fn offset(&self, status: HealthStatus) -> f64 {
        match status {
            HealthStatus::Noninfected => self.a_n,
            HealthStatus::Infected => self.a_i,
        }
    }

    /// Utility without the domain check; `c` is clamped onto `[0, b_z]`.
    pub(crate) fn utility_unchecked(&self, status: HealthStatus, c: f64) -> f64 {
        let b = self.upper(status);
        let base = (b * c - c * c).max(0.0);
        base.powf(self.g) - self.offset(status)
    }

    /// Maximal instantaneous utility `u_z(b_z / 2)`.
    pub fn myopic_utility(&self, status: HealthStatus) -> f64 {
        let c = myopic_contact(status, self).value();
        self.utility_unchecked(status, c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpiParams {
    pub beta: f64,
    pub mu: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl Default for EpiParams {
    fn default() -> Self {
        Self {
            beta: 0.05,
            mu: 0.1,
            gamma: 1.0 / 90.0,
            delta: 1e-3,
        }
    }
}

impl EpiParams {
    /// Rates must be nonnegative; `mu + delta` must be positive so that the
    /// infected terminal penalty is defined. `gamma = 0` and `delta = 0` are
    /// allowed as limiting cases.
    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, value) in [
            ("beta", self.beta),
            ("mu", self.mu),
            ("gamma", self.gamma),
            ("delta", self.delta),
        ] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(ModelError::InvalidParameter {
                    name,
                    value,
                    reason: "must be a nonnegative rate",
                });
            }
        }
        if self.mu + self.delta <= 0.0 {
            return Err(ModelError::InvalidParameter {
                name: "mu",
                value: self.mu,
                reason: "mu + delta must be positive",
            });
        }
        Ok(())
    }
}

/// Terminal payoffs. The infected penalty is always derived, never stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Penalties {
    pub psi_d: f64,
    pub psi_n: f64,
    pub psi_i: f64,
}

impl Penalties {
    pub fn new(epi: &EpiParams, utility: &UtilityParams, psi_d: f64, psi_n: f64) -> Self {
        Self {
            psi_d,
            psi_n,
            psi_i: terminal_penalty_infected(epi, utility, psi_d),
        }
    }
}

/// Everything a model variant needs: epidemiology, utilities and terminal payoffs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub epi: EpiParams,
    pub utility: UtilityParams,
    pub psi_d: f64,
    pub psi_n: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            epi: EpiParams::default(),
            utility: UtilityParams::default(),
            psi_d: -1000.0,
            psi_n: 0.0,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        self.epi.validate()?;
        self.utility.validate()?;
        for (name, value) in [("psi_d", self.psi_d), ("psi_n", self.psi_n)] {
            if !value.is_finite() {
                return Err(ModelError::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite",
                });
            }
        }
        Ok(())
    }

    pub fn penalties(&self) -> Penalties {
        Penalties::new(&self.epi, &self.utility, self.psi_d, self.psi_n)
    }

    /// Myopic contact rate of the infected, `c̄_I`.
    pub fn c_bar_i(&self) -> f64 {
        myopic_contact(HealthStatus::Infected, &self.utility).value()
    }

    /// Myopic contact rate of the noninfected, `c̄_N`.
    pub fn c_bar_n(&self) -> f64 {
        myopic_contact(HealthStatus::Noninfected, &self.utility).value()
    }

    pub fn u_bar_n(&self) -> f64 {
        self.utility.myopic_utility(HealthStatus::Noninfected)
    }

    pub fn u_bar_i(&self) -> f64 {
        self.utility.myopic_utility(HealthStatus::Infected)
    }
}

/// `u_z(c) = (b_z c - c^2)^g - a_z` on the feasible interval `[0, b_z]`.
pub fn utility(status: HealthStatus, c: ContactRate, params: &UtilityParams) -> Result<f64, ModelError> {
    let upper = params.upper(status);
    if !(c.0 >= 0.0 && c.0 <= upper) {
        return Err(ModelError::ContactOutOfRange { status, c: c.0, upper });
    }
    Ok(params.utility_unchecked(status, c.0))
}

/// Unconstrained maximizer of the utility, `b_z / 2`.
pub fn myopic_contact(status: HealthStatus, params: &UtilityParams) -> ContactRate {
    ContactRate(params.upper(status) / 2.0)
}

/// Expected post-horizon payoff of someone still infected at the horizon:
/// the utility gap accrued until recovery or death plus the expected death
/// penalty.
pub fn terminal_penalty_infected(epi: &EpiParams, utility: &UtilityParams, psi_d: f64) -> f64 {
    let exit_rate = epi.mu + epi.delta;
    let u_gap = utility.myopic_utility(HealthStatus::Infected) - utility.myopic_utility(HealthStatus::Noninfected);
    u_gap / exit_rate + psi_d * epi.delta / exit_rate
}
