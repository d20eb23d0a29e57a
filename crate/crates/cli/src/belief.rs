use std::fs;
use std::path::PathBuf;

use anyhow::{anyhow, Context};
use clap::Args;

use immunity_mfg::dynamics::DriftKind;
use immunity_mfg::oracle::{random_profile_pairs, validate_belief, BeliefComparison, CohortSpec, Profile};
use immunity_mfg::scenarios::{builtin, post_recovery_characteristic, run_scenario, Builtin};
use immunity_mfg::ModelParams;

use crate::Failure;

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Number of simulated agents per cohort.
    #[arg(long, default_value_t = 100_000)]
    agents: usize,
    /// Seed for the agent streams and random profiles.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Take I(t) and the contact rate along the post-recovery characteristic
    /// from a solved belief-model scenario.
    #[arg(long, conflicts_with = "profiles")]
    scenario: Option<String>,
    /// Validate this many random smooth (c, I) profiles instead of a constant one.
    #[arg(long)]
    profiles: Option<usize>,
    /// Constant contact rate.
    #[arg(long, default_value_t = 5.0)]
    contact: f64,
    /// Constant infected fraction.
    #[arg(long, default_value_t = 0.1)]
    infected: f64,
    /// Recovery time t_R of the cohort.
    #[arg(long, default_value_t = 75.0)]
    recovery_time: f64,
    /// Length of the comparison window after t_R (days).
    #[arg(long, default_value_t = 100.0)]
    window: f64,
    /// Number of comparison times in the window.
    #[arg(long, default_value_t = 50)]
    samples: usize,
    /// Override the immunity-loss rate for both the cohort and the ODE.
    #[arg(long)]
    gamma: Option<f64>,
    /// Relative error injected into the ODE's immunity-loss rate (negative control).
    #[arg(long, default_value_t = 0.0)]
    perturb_gamma: f64,
    /// Directory for the comparison table.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cohorts(args: &ValidateArgs, params: &ModelParams) -> anyhow::Result<Vec<CohortSpec>> {
    let t_r = args.recovery_time;
    let base = |contact: Profile, infected: Profile, t_end: f64| CohortSpec {
        contact,
        infected,
        t_recovery: t_r,
        t_end,
        epi: params.epi,
        c_bar_i: params.c_bar_i(),
        contact_cap: params.utility.b_n,
    };
    if let Some(name) = &args.scenario {
        let config = match builtin(name) {
            Some(Builtin::Scenario(c)) => c,
            Some(Builtin::Sweep(_)) => anyhow::bail!("`{name}` is a sweep"),
            None => anyhow::bail!("unknown scenario `{name}`"),
        };
        if config.model.drift() != Some(DriftKind::Belief) {
            anyhow::bail!("`{name}` is not a belief-model scenario");
        }
        let result = run_scenario(&config)?;
        let game = result.game.structured().expect("belief scenarios are structured");
        let times = &result.trajectory.times;
        let t_end = (t_r + args.window).min(*times.last().expect("nonempty mesh"));
        let start = times.partition_point(|&t| t < t_r);
        let end = times.partition_point(|&t| t <= t_end) - 1;
        if start >= end {
            anyhow::bail!("recovery time {t_r} leaves no window in the scenario horizon");
        }
        let path = post_recovery_characteristic(&result.trajectory, game, start, end);
        let mut knots: Vec<(f64, f64, f64)> = Vec::with_capacity(path.len());
        for &(t, _, c, i) in &path {
            match knots.last_mut() {
                Some(last) if last.0 == t => *last = (t, c, i),
                _ => knots.push((t, c, i)),
            }
        }
        let times: Vec<f64> = knots.iter().map(|k| k.0).collect();
        let contact = Profile::new(times.clone(), knots.iter().map(|k| k.1).collect())?;
        let infected = Profile::new(times.clone(), knots.iter().map(|k| k.2).collect())?;
        return Ok(vec![base(contact, infected, times[times.len() - 1])]);
    }
    let t_end = t_r + args.window;
    if let Some(count) = args.profiles {
        return Ok(random_profile_pairs(count, args.seed, t_r, t_end)
            .into_iter()
            .map(|(c, i)| base(c, i, t_end))
            .collect());
    }
    Ok(vec![base(
        Profile::constant(args.contact),
        Profile::constant(args.infected),
        t_end,
    )])
}

fn write_table(dir: &PathBuf, results: &[BeliefComparison]) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join("belief_validation.csv");
    let mut out = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
    out.write_record(["profile", "t", "ode", "p_hat", "std_err", "at_risk", "z", "within"])?;
    let opt = |x: Option<f64>| x.map(|v| format!("{v:.9e}")).unwrap_or_default();
    for (k, cmp) in results.iter().enumerate() {
        for r in &cmp.rows {
            out.write_record([
                k.to_string(),
                format!("{:.9e}", r.t),
                format!("{:.9e}", r.ode),
                opt(r.p_hat),
                opt(r.std_err),
                r.at_risk.to_string(),
                opt(r.z),
                r.within.to_string(),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn validate(args: ValidateArgs) -> Result<(), Failure> {
    if args.samples == 0 || !(args.window > 0.0) {
        return Err(Failure::Usage(anyhow!("--samples and --window must be positive")));
    }
    let mut params = ModelParams::default();
    if let Some(gamma) = args.gamma {
        params.epi.gamma = gamma;
    }
    params.validate().map_err(anyhow::Error::from)?;
    let specs = cohorts(&args, &params).map_err(|e| match e.downcast::<immunity_mfg::scenarios::ScenarioError>() {
        Ok(solve) => Failure::Solver(solve.into()),
        Err(other) => Failure::Usage(other),
    })?;

    let ode_gamma = params.epi.gamma * (1.0 + args.perturb_gamma);
    let mut results = Vec::with_capacity(specs.len());
    for (k, spec) in specs.iter().enumerate() {
        let cmp = validate_belief(
            spec,
            ode_gamma,
            args.agents,
            args.samples,
            args.seed.wrapping_add(k as u64),
        )
        .map_err(anyhow::Error::from)?;
        println!(
            "profile {k}: max |z| = {:.2} over {} times ({} degenerate) -> {}",
            cmp.max_z,
            cmp.rows.len(),
            cmp.degenerate,
            if cmp.passed { "pass" } else { "FAIL" }
        );
        results.push(cmp);
    }
    if let Some(dir) = &args.out {
        write_table(dir, &results)?;
    }
    let failed = results.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(Failure::Mismatch(format!(
            "{failed} of {} profiles outside 3 standard errors",
            results.len()
        )));
    }
    Ok(())
}
