use serde::{Deserialize, Serialize};

use crate::horizon::HorizonSchedule;

/// Summary statistics of one trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Largest infected fraction on `[0, T_n]`.
    pub peak_i: f64,
    /// Time average of the infected fraction over `[0, T_n]`.
    pub mean_i: f64,
    /// Dead fraction at `T_n`.
    pub final_d: f64,
    /// First time at which `peak_i` is attained.
    pub argmax_t: f64,
    /// The same statistics averaged over the horizon distribution, each
    /// evaluated on `[0, T_k]`. Equal to the fields above for a
    /// deterministic horizon.
    pub horizon_expected: HorizonMetrics,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HorizonMetrics {
    pub peak_i: f64,
    pub mean_i: f64,
    pub final_d: f64,
}

/// Trapezoid time average, running maximum and final value up to `end`.
fn window(times: &[f64], infected: &[f64], dead: &[f64], end: usize) -> (f64, f64, f64, f64) {
    let mut area = 0.0;
    let (mut peak, mut argmax) = (infected[0], times[0]);
    for k in 1..=end {
        area += 0.5 * (infected[k] + infected[k - 1]) * (times[k] - times[k - 1]);
        if infected[k] > peak {
            peak = infected[k];
            argmax = times[k];
        }
    }
    let span = times[end] - times[0];
    let mean = if span > 0.0 { area / span } else { infected[0] };
    (peak, mean, dead[end], argmax)
}

/// Metrics from nodal series. `times` may contain duplicated event nodes.
pub fn compute_metrics(times: &[f64], infected: &[f64], dead: &[f64], schedule: &HorizonSchedule) -> Metrics {
    assert!(!times.is_empty() && times.len() == infected.len() && times.len() == dead.len());
    let last = times.len() - 1;
    let (peak_i, mean_i, final_d, argmax_t) = window(times, infected, dead, last);

    let mut expected = HorizonMetrics {
        peak_i: 0.0,
        mean_i: 0.0,
        final_d: 0.0,
    };
    for (&t_k, &theta) in schedule.times().iter().zip(schedule.probs()) {
        let end = times.partition_point(|&t| t <= t_k + 1e-9 * t_k).max(1) - 1;
        let (peak, mean, dead_k, _) = window(times, infected, dead, end);
        expected.peak_i += theta * peak;
        expected.mean_i += theta * mean;
        expected.final_d += theta * dead_k;
    }
    Metrics {
        peak_i,
        mean_i,
        final_d,
        argmax_t,
        horizon_expected: expected,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_pulse() {
        let times = [0.0, 1.0, 2.0, 3.0, 4.0];
        let infected = [0.0, 0.5, 1.0, 0.5, 0.0];
        let dead = [0.0, 0.1, 0.2, 0.3, 0.4];
        let m = compute_metrics(&times, &infected, &dead, &HorizonSchedule::fixed(4.0).unwrap());
        assert_eq!(m.peak_i, 1.0);
        assert_eq!(m.mean_i, 0.5);
        assert_eq!(m.final_d, 0.4);
        assert_eq!(m.argmax_t, 2.0);
        assert_eq!(m.horizon_expected.mean_i, 0.5);
        assert_eq!(m.horizon_expected.final_d, 0.4);
    }

    #[test]
    fn horizon_expectation_weights_truncated_windows() {
        let times = [0.0, 1.0, 2.0, 2.0, 3.0, 4.0];
        let infected = [0.0, 0.5, 1.0, 1.0, 0.5, 0.0];
        let dead = [0.0, 0.1, 0.2, 0.2, 0.3, 0.4];
        let schedule = HorizonSchedule::new(vec![2.0, 4.0], vec![0.25, 0.75]).unwrap();
        let m = compute_metrics(&times, &infected, &dead, &schedule);
        assert!((m.horizon_expected.final_d - (0.25 * 0.2 + 0.75 * 0.4)).abs() < 1e-15);
        assert!((m.horizon_expected.mean_i - (0.25 * 0.5 + 0.75 * 0.5)).abs() < 1e-15);
        assert_eq!(m.horizon_expected.peak_i, 1.0);
        assert_eq!(m.mean_i, 0.5);
    }

    #[test]
    fn no_epidemic_gives_zeros() {
        let times = [0.0, 150.0, 300.0];
        let zeros = [0.0; 3];
        let m = compute_metrics(&times, &zeros, &zeros, &HorizonSchedule::fixed(300.0).unwrap());
        assert_eq!((m.peak_i, m.mean_i, m.final_d), (0.0, 0.0, 0.0));
    }
}
