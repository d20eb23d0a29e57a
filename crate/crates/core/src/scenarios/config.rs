//! Scenario configuration files.
//!
//! A scenario is a TOML document. Every section is optional and defaults to
//! the standard parameter set; unknown keys are rejected.
//!
//! ```toml
//! name = "my-run"
//! model = "belief"        # sirsd-myopic | mfg-sirsd | waning | belief | waning-myopic
//! m = 8                   # band count minus one; ignored by scalar models
//! alpha = 0.1             # Lax-Friedrichs coefficient; defaults by model
//!
//! [params]
//! beta = 0.05
//! gamma = 0.011111111111111112
//!
//! [horizon]
//! times = [150.0, 300.0]
//! probs = [0.5, 0.5]
//!
//! [initial]
//! susceptible = 0.995
//! infected = 0.005
//!
//! [solver]
//! tol = 1e-6
//! intervals = 600
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bvp::SolverSettings;
use crate::dynamics::DriftKind;
use crate::horizon::HorizonSchedule;
use crate::model::{EpiParams, ModelParams, UtilityParams};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error(transparent)]
    Parse(#[from] toml::de::Error),
    #[error("could not serialize scenario")]
    Serialize(#[from] toml::ser::Error),
    #[error("scenario `{name}`: {reason}")]
    Invalid { name: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    SirsdMyopic,
    MfgSirsd,
    Waning,
    Belief,
    WaningMyopic,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::SirsdMyopic,
        ModelKind::MfgSirsd,
        ModelKind::Waning,
        ModelKind::Belief,
        ModelKind::WaningMyopic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::SirsdMyopic => "sirsd-myopic",
            ModelKind::MfgSirsd => "mfg-sirsd",
            ModelKind::Waning => "waning",
            ModelKind::Belief => "belief",
            ModelKind::WaningMyopic => "waning-myopic",
        }
    }

    /// Band-grid models carry `m` and a drift.
    pub fn is_structured(self) -> bool {
        self.drift().is_some()
    }

    /// Myopic variants are simulated under the fixed myopic policy, no game.
    pub fn is_myopic(self) -> bool {
        matches!(self, ModelKind::SirsdMyopic | ModelKind::WaningMyopic)
    }

    pub fn drift(self) -> Option<DriftKind> {
        match self {
            ModelKind::Waning | ModelKind::WaningMyopic => Some(DriftKind::Waning),
            ModelKind::Belief => Some(DriftKind::Belief),
            ModelKind::SirsdMyopic | ModelKind::MfgSirsd => None,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown model `{s}`"))
    }
}

/// Flat view of [`ModelParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsConfig {
    pub beta: f64,
    pub mu: f64,
    pub gamma: f64,
    pub delta: f64,
    pub g: f64,
    pub b_n: f64,
    pub b_i: f64,
    pub a_n: f64,
    pub a_i: f64,
    pub psi_d: f64,
    pub psi_n: f64,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        Self::from(&ModelParams::default())
    }
}

impl From<&ModelParams> for ParamsConfig {
    fn from(p: &ModelParams) -> Self {
        Self {
            beta: p.epi.beta,
            mu: p.epi.mu,
            gamma: p.epi.gamma,
            delta: p.epi.delta,
            g: p.utility.g,
            b_n: p.utility.b_n,
            b_i: p.utility.b_i,
            a_n: p.utility.a_n,
            a_i: p.utility.a_i,
            psi_d: p.psi_d,
            psi_n: p.psi_n,
        }
    }
}

impl ParamsConfig {
    pub fn model_params(&self) -> ModelParams {
        ModelParams {
            epi: EpiParams {
                beta: self.beta,
                mu: self.mu,
                gamma: self.gamma,
                delta: self.delta,
            },
            utility: UtilityParams {
                g: self.g,
                b_n: self.b_n,
                b_i: self.b_i,
                a_n: self.a_n,
                a_i: self.a_i,
            },
            psi_d: self.psi_d,
            psi_n: self.psi_n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HorizonConfig {
    pub times: Vec<f64>,
    pub probs: Vec<f64>,
}

impl Default for HorizonConfig {
    fn default() -> Self {
        Self {
            times: vec![300.0],
            probs: vec![1.0],
        }
    }
}

impl From<&HorizonSchedule> for HorizonConfig {
    fn from(s: &HorizonSchedule) -> Self {
        Self {
            times: s.times().to_vec(),
            probs: s.probs().to_vec(),
        }
    }
}

/// Initial population fractions. For band models the susceptible mass
/// starts in the `p = 0` band and the recovered mass in the `p = 1` band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialConfig {
    pub susceptible: f64,
    pub infected: f64,
    pub recovered: f64,
    pub dead: f64,
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self {
            susceptible: 0.995,
            infected: 5e-3,
            recovered: 0.0,
            dead: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub tol: f64,
    pub omega: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
    /// Uniform time steps on `[0, T_n]` before event nodes are added.
    pub intervals: usize,
    /// Band count above which continuation in `m` is used.
    pub coarse_m: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let s = SolverSettings::default();
        Self {
            tol: s.tol,
            omega: s.omega,
            max_iter: s.max_iter,
            max_halvings: s.max_halvings,
            intervals: 600,
            coarse_m: 10,
        }
    }
}

impl SolverConfig {
    pub fn settings(&self) -> SolverSettings {
        SolverSettings {
            tol: self.tol,
            omega: self.omega,
            max_iter: self.max_iter,
            max_halvings: self.max_halvings,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Output directory; the command line may override it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    pub trajectory: String,
    pub metrics: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: None,
            trajectory: "trajectory.csv".into(),
            metrics: "metrics.json".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub model: ModelKind,
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub params: ParamsConfig,
    #[serde(default)]
    pub horizon: HorizonConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_m() -> usize {
    8
}

impl ScenarioConfig {
    pub fn new(name: impl Into<String>, model: ModelKind) -> Self {
        Self {
            name: name.into(),
            model,
            m: default_m(),
            alpha: None,
            params: ParamsConfig::default(),
            horizon: HorizonConfig::default(),
            initial: InitialConfig::default(),
            solver: SolverConfig::default(),
            output: OutputConfig::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> Result<String, ConfigError> {
        Ok(toml::to_string(self)?)
    }

    pub fn schedule(&self) -> Result<HorizonSchedule, ConfigError> {
        HorizonSchedule::new(self.horizon.times.clone(), self.horizon.probs.clone()).map_err(|e| self.invalid(e))
    }

    pub fn set_schedule(&mut self, schedule: &HorizonSchedule) {
        self.horizon = HorizonConfig::from(schedule);
    }

    /// Lax-Friedrichs coefficient: `γ` for waning immunity, `0.1` for beliefs.
    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(match self.model.drift() {
            Some(DriftKind::Belief) => 0.1,
            _ => self.params.gamma,
        })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.name.trim().is_empty() {
            return Err(self.invalid("name must not be empty"));
        }
        self.params.model_params().validate().map_err(|e| self.invalid(e))?;
        self.schedule()?;
        let init = &self.initial;
        let fractions = [init.susceptible, init.infected, init.recovered, init.dead];
        if fractions.iter().any(|x| !(*x >= 0.0 && *x <= 1.0)) {
            return Err(self.invalid("initial fractions must lie in [0, 1]"));
        }
        let total: f64 = fractions.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(self.invalid(format!("initial fractions sum to {total}, expected 1")));
        }
        if self.model.is_structured() {
            if self.m < 1 {
                return Err(self.invalid("m must be at least 1"));
            }
            let alpha = self.alpha();
            if !(alpha > 0.0 && alpha.is_finite()) {
                return Err(self.invalid(format!("alpha must be positive, got {alpha}")));
            }
        }
        let s = &self.solver;
        if !(s.tol > 0.0) || !(s.omega > 0.0 && s.omega <= 1.0) || s.intervals == 0 || s.max_iter == 0 {
            return Err(self.invalid("solver needs tol > 0, 0 < omega <= 1, intervals > 0, max_iter > 0"));
        }
        if s.coarse_m == 0 {
            return Err(self.invalid("coarse_m must be at least 1"));
        }
        Ok(())
    }

    fn invalid(&self, reason: impl ToString) -> ConfigError {
        ConfigError::Invalid {
            name: self.name.clone(),
            reason: reason.to_string(),
        }
    }
}

/// A family of scenarios generated from one base configuration.
///
/// Each `θ` in `thetas` replaces the horizon by the two-point schedule
/// `(early_time, θ), (T, 1 − θ)` with `T` the base horizon's final time;
/// each entry of `ms` replaces the band count. Empty lists leave the base
/// value alone.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub name: String,
    pub base: ScenarioConfig,
    pub thetas: Vec<f64>,
    pub early_time: Option<f64>,
    pub ms: Vec<usize>,
}

impl SweepConfig {
    pub fn expand(&self) -> Result<Vec<ScenarioConfig>, ConfigError> {
        let invalid = |reason: String| ConfigError::Invalid {
            name: self.name.clone(),
            reason,
        };
        let final_time = self.base.schedule()?.final_time();
        let horizons: Vec<(String, Option<HorizonSchedule>)> = if self.thetas.is_empty() {
            vec![(String::new(), None)]
        } else {
            let early = self
                .early_time
                .ok_or_else(|| invalid("a theta sweep needs an early horizon time".into()))?;
            self.thetas
                .iter()
                .map(|&theta| {
                    HorizonSchedule::new(vec![early, final_time], vec![theta, 1.0 - theta])
                        .map(|s| (format!("-theta-{theta}"), Some(s)))
                        .map_err(|e| invalid(format!("theta = {theta}: {e}")))
                })
                .collect::<Result<_, _>>()?
        };
        let ms: Vec<Option<usize>> = if self.ms.is_empty() {
            vec![None]
        } else {
            self.ms.iter().copied().map(Some).collect()
        };

        let mut out = Vec::new();
        for (suffix, schedule) in &horizons {
            for m in &ms {
                let mut config = self.base.clone();
                config.name = self.name.clone() + suffix;
                if let Some(s) = schedule {
                    config.set_schedule(s);
                }
                if let Some(m) = m {
                    config.m = *m;
                    config.name += &format!("-m-{m}");
                }
                config.validate()?;
                out.push(config);
            }
        }
        Ok(out)
    }
}
