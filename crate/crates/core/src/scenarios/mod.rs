//! Scenario definitions, metrics and result files.

mod analysis;
mod config;
mod metrics;
mod run;

pub use analysis::{min_post_recovery_belief, post_recovery_characteristic};
pub use config::{
    ConfigError, HorizonConfig, InitialConfig, ModelKind, OutputConfig, ParamsConfig, ScenarioConfig, SolverConfig,
    SweepConfig,
};
pub use metrics::{compute_metrics, HorizonMetrics, Metrics};
pub use run::{
    column_names, run_scenario, run_scenarios, write_outputs, write_trajectory_csv, MetricsRecord, ScenarioError,
    ScenarioGame, ScenarioResult,
};

use crate::horizon::HorizonSchedule;

/// A named builtin: either one scenario or a family of them.
#[derive(Debug, Clone, PartialEq)]
pub enum Builtin {
    Scenario(ScenarioConfig),
    Sweep(SweepConfig),
}

impl Builtin {
    pub fn name(&self) -> &str {
        match self {
            Builtin::Scenario(c) => &c.name,
            Builtin::Sweep(s) => &s.name,
        }
    }

    /// Every scenario this builtin stands for.
    pub fn expand(&self) -> Result<Vec<ScenarioConfig>, ConfigError> {
        match self {
            Builtin::Scenario(c) => Ok(vec![c.clone()]),
            Builtin::Sweep(s) => s.expand(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuiltinEntry {
    pub description: &'static str,
    pub builtin: Builtin,
}

fn scenario(name: &str, model: ModelKind, m: usize) -> ScenarioConfig {
    let mut c = ScenarioConfig::new(name, model);
    c.m = m;
    c
}

/// The standard experiments. All share the default parameters with
/// `I(0) = 5e-3`, `D(0) = 0` and the horizon `T = 300` unless noted.
pub fn builtin_scenarios() -> Vec<BuiltinEntry> {
    let mut fig4 = scenario("fig4-belief-horizon", ModelKind::Belief, 4);
    fig4.set_schedule(
        &HorizonSchedule::new(vec![50.0, 100.0, 200.0, 285.0, 300.0], vec![0.2, 0.1, 0.05, 0.5, 0.15])
            .expect("valid schedule"),
    );
    let mut waning = scenario("fig2a-waning", ModelKind::Waning, 8);
    waning.alpha = Some(waning.params.gamma);
    let mut belief = scenario("fig2b-belief", ModelKind::Belief, 8);
    belief.alpha = Some(0.1);

    vec![
        BuiltinEntry {
            description: "MFG-SIRSD Nash equilibrium",
            builtin: Builtin::Scenario(scenario("fig1-mfg", ModelKind::MfgSirsd, 8)),
        },
        BuiltinEntry {
            description: "SIRSD with myopic contact rates",
            builtin: Builtin::Scenario(scenario("fig1-myopic", ModelKind::SirsdMyopic, 8)),
        },
        BuiltinEntry {
            description: "observable waning immunity, nine bands",
            builtin: Builtin::Scenario(waning),
        },
        BuiltinEntry {
            description: "waning immunity with myopic contact rates, nine bands",
            builtin: Builtin::Scenario(scenario("fig2a-waning-myopic", ModelKind::WaningMyopic, 8)),
        },
        BuiltinEntry {
            description: "unobserved disappearing immunity, nine belief bands",
            builtin: Builtin::Scenario(belief),
        },
        BuiltinEntry {
            description: "MFG-SIRSD with T in {150, 300}, P(T = 150) in {0.1, 0.5, 0.9}",
            builtin: Builtin::Sweep(SweepConfig {
                name: "fig3-sweep".into(),
                base: scenario("fig3-sweep", ModelKind::MfgSirsd, 8),
                thetas: vec![0.1, 0.5, 0.9],
                early_time: Some(150.0),
                ms: vec![],
            }),
        },
        BuiltinEntry {
            description: "belief model, five bands, five candidate horizons",
            builtin: Builtin::Scenario(fig4),
        },
    ]
}

pub fn builtin(name: &str) -> Option<Builtin> {
    builtin_scenarios()
        .into_iter()
        .map(|e| e.builtin)
        .find(|b| b.name() == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_are_valid_and_share_initial_conditions() {
        for entry in builtin_scenarios() {
            for config in entry.builtin.expand().unwrap() {
                config.validate().unwrap();
                assert_eq!(config.initial.infected, 5e-3);
                assert_eq!(config.initial.dead, 0.0);
            }
        }
        assert!(builtin("nope").is_none());
    }

    #[test]
    fn fig4_horizon() {
        let Some(Builtin::Scenario(c)) = builtin("fig4-belief-horizon") else {
            panic!("missing fig4")
        };
        assert_eq!(c.horizon.times, vec![50.0, 100.0, 200.0, 285.0, 300.0]);
        assert_eq!(c.horizon.probs, vec![0.2, 0.1, 0.05, 0.5, 0.15]);
        assert_eq!(c.m, 4);
    }

    #[test]
    fn fig2_alphas() {
        let Some(Builtin::Scenario(w)) = builtin("fig2a-waning") else {
            panic!()
        };
        let Some(Builtin::Scenario(b)) = builtin("fig2b-belief") else {
            panic!()
        };
        assert_eq!(w.alpha(), 1.0 / 90.0);
        assert_eq!(b.alpha(), 0.1);
    }

    #[test]
    fn fig3_sweep_expands_three_thetas() {
        let Some(b @ Builtin::Sweep(_)) = builtin("fig3-sweep") else {
            panic!()
        };
        let jobs = b.expand().unwrap();
        assert_eq!(jobs.len(), 3);
        assert_eq!(jobs[1].horizon.times, vec![150.0, 300.0]);
        assert_eq!(jobs[1].horizon.probs, vec![0.5, 0.5]);
    }
}
