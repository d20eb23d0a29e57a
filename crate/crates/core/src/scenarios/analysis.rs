//! Post-processing of band-model solutions along belief characteristics.

use crate::bvp::Trajectory;
use crate::game::{GameModel, StructuredGame};

/// Contact rate at immunity level `p` from per-band rates, linear in `p`.
fn contact_at(centers: &[f64], rates: &[f64], p: f64) -> f64 {
    let k = centers.partition_point(|&c| c <= p).clamp(1, centers.len() - 1);
    let (p0, p1) = (centers[k - 1], centers[k]);
    let w = ((p - p0) / (p1 - p0)).clamp(0.0, 1.0);
    (1.0 - w) * rates[k - 1] + w * rates[k]
}

/// Path of an individual who recovers at mesh node `start` and is not
/// re-infected, following the equilibrium policy: `p(t_R) = 1` and
/// `p' = f(p, c*(p, t), I(t))`, with `c*` interpolated linearly in `p`
/// between bands and linearly in time between nodes.
///
/// Returns `(t, p, c, I)` at every node from `start` to `end` inclusive.
pub fn post_recovery_characteristic(
    trajectory: &Trajectory,
    game: &StructuredGame,
    start: usize,
    end: usize,
) -> Vec<(f64, f64, f64, f64)> {
    const SUBSTEPS: usize = 8;
    let centers = game.grid().centers();
    let drift = game.drift();
    let ii = game.infected_index();
    let t = &trajectory.times;

    let blend = |k: usize, w: f64, p: f64| -> (f64, f64) {
        let c0 = contact_at(centers, &trajectory.policy[k], p);
        let c1 = contact_at(centers, &trajectory.policy[k + 1], p);
        let i = (1.0 - w) * trajectory.states[k][ii] + w * trajectory.states[k + 1][ii];
        ((1.0 - w) * c0 + w * c1, i)
    };
    let rhs = |k: usize, w: f64, p: f64| {
        let (c, i) = blend(k, w, p);
        drift.value(p, c, i)
    };

    let mut p = 1.0;
    let node = |k: usize, p: f64| {
        (
            t[k],
            p,
            contact_at(centers, &trajectory.policy[k], p),
            trajectory.states[k][ii],
        )
    };
    let mut out = vec![node(start, p)];
    for k in start..end {
        let dt = t[k + 1] - t[k];
        if dt > 0.0 {
            let h = 1.0 / SUBSTEPS as f64;
            for s in 0..SUBSTEPS {
                let w = s as f64 * h;
                let k1 = rhs(k, w, p);
                let k2 = rhs(k, w + 0.5 * h, p + 0.5 * h * dt * k1);
                let k3 = rhs(k, w + 0.5 * h, p + 0.5 * h * dt * k2);
                let k4 = rhs(k, w + h, p + h * dt * k3);
                p += h * dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            }
        }
        out.push(node(k + 1, p));
    }
    out
}

/// Smallest belief reached on `[t_R, t_end]` by individuals recovering at
/// any node `t_R ∈ [t_start, t_end]`.
pub fn min_post_recovery_belief(trajectory: &Trajectory, game: &StructuredGame, t_start: f64, t_end: f64) -> f64 {
    let t = &trajectory.times;
    let end = t.partition_point(|&s| s <= t_end).saturating_sub(1);
    let first = t.partition_point(|&s| s < t_start);
    (first..=end)
        .map(|start| {
            post_recovery_characteristic(trajectory, game, start, end)
                .iter()
                .map(|&(_, p, _, _)| p)
                .fold(f64::INFINITY, f64::min)
        })
        .fold(f64::INFINITY, f64::min)
}
