//! Continuation in the number of immunity bands.
//!
//! Fine band grids make the coupled system stiff and slow to converge from a
//! myopic start. Solving on a coarse grid and interpolating the solution in
//! `p` gives a much better starting point for the next finer grid.

use super::solver::{initial_guess, solve};
use super::{BvpProblem, Mesh, SolveError, SolveReport, SolverSettings, Trajectory};
use crate::dynamics::Grid;
use crate::game::{GameModel, StructuredGame};

/// Everything needed to pose the problem at one band count.
pub struct Level {
    pub game: StructuredGame,
    pub initial_state: Vec<f64>,
    pub mesh: Mesh,
}

#[derive(Debug)]
pub struct ContinuationOutcome {
    pub trajectory: Trajectory,
    pub report: SolveReport,
    /// Band counts solved, coarsest first.
    pub ladder: Vec<usize>,
    /// Total fixed-point iterations over all levels.
    pub total_iterations: usize,
}

/// Band counts visited on the way to `target_m`, growing by about 40% per step.
pub fn continuation_ladder(target_m: usize, coarse_m: usize) -> Vec<usize> {
    if target_m <= coarse_m {
        return vec![target_m];
    }
    let mut ladder = vec![coarse_m];
    let mut m = coarse_m;
    while m < target_m {
        m = ((m as f64 * 1.4).ceil() as usize).max(m + 1).min(target_m);
        ladder.push(m);
    }
    ladder
}

fn interp(centers: &[f64], data: &[f64], p: f64) -> f64 {
    let k = centers.partition_point(|&c| c <= p).clamp(1, centers.len() - 1);
    let (p0, p1) = (centers[k - 1], centers[k]);
    let w = (p - p0) / (p1 - p0);
    (1.0 - w) * data[k - 1] + w * data[k]
}

/// Re-expresses a band-grid trajectory on another grid, linearly in `p`.
///
/// Values and contact rates are interpolated directly. Masses are converted
/// to densities, interpolated, converted back and rescaled so that the
/// noninfected mass at each node is unchanged.
pub fn interpolate_bands(trajectory: &Trajectory, from: &Grid, to: &Grid) -> Trajectory {
    let (nf, nt) = (from.bands(), to.bands());
    let fc = from.centers();
    let remap = |data: &[f64]| -> Vec<f64> { to.centers().iter().map(|&p| interp(fc, data, p)).collect() };

    let states = trajectory
        .states
        .iter()
        .map(|x| {
            let dens: Vec<f64> = x[..nf].iter().zip(from.widths()).map(|(n, w)| n / w).collect();
            let mut masses: Vec<f64> = remap(&dens).iter().zip(to.widths()).map(|(d, w)| d * w).collect();
            let old: f64 = x[..nf].iter().sum();
            let new: f64 = masses.iter().sum();
            if new > 0.0 {
                masses.iter_mut().for_each(|n| *n *= old / new);
            }
            masses.extend_from_slice(&x[nf..]);
            masses
        })
        .collect();
    let values = trajectory
        .values
        .iter()
        .map(|v| {
            let mut out = remap(&v[..nf]);
            out.push(v[nf]);
            out
        })
        .collect();
    let policy = trajectory.policy.iter().map(|c| remap(c)).collect();
    debug_assert_eq!(nt, to.bands());
    Trajectory {
        times: trajectory.times.clone(),
        states,
        values,
        policy,
    }
}

/// Solves at `target_m`, going through coarser grids when `target_m`
/// exceeds `coarse_m`. The first level starts from the myopic guess.
pub fn continuation_in_m<F>(
    target_m: usize,
    coarse_m: usize,
    settings: &SolverSettings,
    mut build: F,
) -> Result<(Level, ContinuationOutcome), SolveError>
where
    F: FnMut(usize) -> Result<Level, SolveError>,
{
    if target_m < 1 {
        return Err(SolveError::InvalidProblem(
            "target band count must be at least 1".into(),
        ));
    }
    let ladder = continuation_ladder(target_m, coarse_m.max(1));
    let mut previous: Option<(Level, Trajectory)> = None;
    let mut total_iterations = 0;
    let mut last_report = None;
    let at_level = |m: usize| move |e: SolveError| SolveError::AtLevel { m, source: Box::new(e) };

    for &m in &ladder {
        let level = build(m).map_err(at_level(m))?;
        let problem =
            BvpProblem::new(&level.game, level.initial_state.clone(), level.mesh.clone()).map_err(at_level(m))?;
        let guess = match &previous {
            Some((prev, trajectory)) if prev.mesh == level.mesh => {
                interpolate_bands(trajectory, prev.game.grid(), level.game.grid())
            }
            _ => initial_guess(&problem, &level.game.myopic_policy()).map_err(at_level(m))?,
        };
        let (trajectory, report) = solve(&problem, &guess, settings).map_err(at_level(m))?;
        total_iterations += report.iterations;
        last_report = Some(report);
        previous = Some((level, trajectory));
    }

    let (level, trajectory) = previous.expect("ladder is nonempty");
    Ok((
        level,
        ContinuationOutcome {
            trajectory,
            report: last_report.expect("ladder is nonempty"),
            ladder,
            total_iterations,
        },
    ))
}
