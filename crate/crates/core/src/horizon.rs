//! Uncertain planning horizons with finitely many candidate end times.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HorizonError {
    #[error("horizon schedule is empty")]
    Empty,
    #[error("horizon times must be positive and strictly increasing")]
    UnorderedTimes,
    #[error("horizon probability {0} is negative or not finite")]
    BadProbability(f64),
    #[error("horizon probabilities sum to {0}, expected 1")]
    NotNormalized(f64),
    #[error("zero tail probability after horizon {0} while a later horizon has positive probability")]
    ZeroTail(usize),
    #[error("malformed horizon entry `{0}`, expected `time:probability`")]
    Malformed(String),
}

/// Candidate terminal times `T_1 < .. < T_n` with probabilities `θ_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct HorizonSchedule {
    times: Vec<f64>,
    probs: Vec<f64>,
}

impl HorizonSchedule {
    pub fn new(times: Vec<f64>, probs: Vec<f64>) -> Result<Self, HorizonError> {
        if times.is_empty() || times.len() != probs.len() {
            return Err(HorizonError::Empty);
        }
        if !(times[0] > 0.0) || times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(HorizonError::UnorderedTimes);
        }
        if let Some(&bad) = probs.iter().find(|p| !(**p >= 0.0 && p.is_finite())) {
            return Err(HorizonError::BadProbability(bad));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(HorizonError::NotNormalized(total));
        }
        Ok(Self { times, probs })
    }

    /// Deterministic horizon.
    pub fn fixed(t: f64) -> Result<Self, HorizonError> {
        Self::new(vec![t], vec![1.0])
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// The last candidate time; the problem is posed on `[0, T_n]`.
    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("schedule is nonempty")
    }

    /// Interior event times `T_1 .. T_{n-1}` paired with `θ̃_k`.
    pub fn events(&self) -> Result<Vec<(f64, f64)>, HorizonError> {
        let cond = conditional_probs(self)?;
        Ok(self.times.iter().copied().zip(cond).collect())
    }
}

impl FromStr for HorizonSchedule {
    type Err = HorizonError;

    /// Parses `"150:0.5,300:0.5"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut times = Vec::new();
        let mut probs = Vec::new();
        for entry in s.split(',').map(str::trim).filter(|e| !e.is_empty()) {
            let (t, p) = entry
                .split_once(':')
                .ok_or_else(|| HorizonError::Malformed(entry.to_string()))?;
            let t: f64 = t
                .trim()
                .parse()
                .map_err(|_| HorizonError::Malformed(entry.to_string()))?;
            let p: f64 = p
                .trim()
                .parse()
                .map_err(|_| HorizonError::Malformed(entry.to_string()))?;
            times.push(t);
            probs.push(p);
        }
        Self::new(times, probs)
    }
}

impl fmt::Display for HorizonSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (t, p)) in self.times.iter().zip(&self.probs).enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{t}:{p}")?;
        }
        Ok(())
    }
}

/// Conditional termination probabilities `θ̃_k = θ_k / Σ_{l≥k} θ_l`, `k < n`.
pub fn conditional_probs(schedule: &HorizonSchedule) -> Result<Vec<f64>, HorizonError> {
    let n = schedule.len();
    let mut tail: f64 = schedule.probs.iter().sum();
    let mut out = Vec::with_capacity(n.saturating_sub(1));
    for k in 0..n - 1 {
        let theta = schedule.probs[k];
        if tail <= 0.0 {
            if schedule.probs[k..].iter().any(|&p| p > 0.0) {
                return Err(HorizonError::ZeroTail(k));
            }
            out.push(0.0);
        } else {
            out.push((theta / tail).clamp(0.0, 1.0));
        }
        tail -= theta;
    }
    Ok(out)
}

/// Value just before a candidate end time: with probability `θ̃_k` the game
/// ends and the terminal payoff applies, otherwise play continues.
pub fn apply_value_jump(v_after: &[f64], theta_tilde: f64, terminal: &[f64]) -> Vec<f64> {
    v_after
        .iter()
        .zip(terminal)
        .map(|(after, psi)| theta_tilde * psi + (1.0 - theta_tilde) * after)
        .collect()
}

/// Population fractions carry over unchanged when a candidate end passes.
pub fn state_continuity(state_before: &[f64]) -> Vec<f64> {
    state_before.to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn five_point_conditionals() {
        let s: HorizonSchedule = "50:0.2,100:0.1,200:0.05,285:0.5,300:0.15".parse().unwrap();
        let c = conditional_probs(&s).unwrap();
        let expected = [0.2, 0.125, 0.05 / 0.7, 0.5 / 0.65];
        assert_eq!(c.len(), 4);
        for (a, b) in c.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((c[2] - 0.0714286).abs() < 1e-7);
        assert!((c[3] - 0.769231).abs() < 1e-6);
    }

    #[test]
    fn two_point_and_single() {
        let s = HorizonSchedule::new(vec![150.0, 300.0], vec![0.3, 0.7]).unwrap();
        assert!((conditional_probs(&s).unwrap()[0] - 0.3).abs() < 1e-15);
        let d = HorizonSchedule::fixed(300.0).unwrap();
        assert!(conditional_probs(&d).unwrap().is_empty());
        assert!(d.events().unwrap().is_empty());
    }

    #[test]
    fn zero_probability_entries_allowed() {
        let s = HorizonSchedule::new(vec![100.0, 200.0, 300.0], vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(conditional_probs(&s).unwrap(), vec![0.0, 1.0]);
    }

    #[test]
    fn validation() {
        assert!("300:0.5".parse::<HorizonSchedule>().is_err());
        assert!("300:0.5,150:0.5".parse::<HorizonSchedule>().is_err());
        assert!("abc".parse::<HorizonSchedule>().is_err());
        assert!("150:-0.5,300:1.5".parse::<HorizonSchedule>().is_err());
        let s: HorizonSchedule = "150:0.5, 300:0.5".parse().unwrap();
        assert_eq!(s.to_string().parse::<HorizonSchedule>().unwrap(), s);
    }

    #[test]
    fn jumps() {
        assert_eq!(apply_value_jump(&[3.0, -7.0], 0.0, &[0.0, -50.0]), vec![3.0, -7.0]);
        assert_eq!(apply_value_jump(&[3.0, -7.0], 1.0, &[0.0, -50.0]), vec![0.0, -50.0]);
        assert_eq!(apply_value_jump(&[-10.0], 0.5, &[0.0]), vec![-5.0]);
        let x = vec![0.3, 0.2, 0.5];
        assert_eq!(state_continuity(&x), x);
    }

    proptest! {
        #[test]
        fn conditionals_reconstruct(raw in prop::collection::vec(0.0f64..1.0, 1..8)) {
            let total: f64 = raw.iter().sum();
            prop_assume!(total > 1e-6);
            let probs: Vec<f64> = raw.iter().map(|p| p / total).collect();
            let fix: f64 = probs.iter().sum();
            let mut probs = probs;
            *probs.last_mut().unwrap() += 1.0 - fix;
            prop_assume!(*probs.last().unwrap() >= 0.0);
            let times = (1..=probs.len()).map(|k| 10.0 * k as f64).collect();
            let s = HorizonSchedule::new(times, probs.clone()).unwrap();
            let c = conditional_probs(&s).unwrap();
            let mut survive = 1.0;
            for k in 0..c.len() {
                prop_assert!((0.0..=1.0).contains(&c[k]));
                prop_assert!((c[k] * survive - probs[k]).abs() < 1e-9);
                survive *= 1.0 - c[k];
            }
        }

        #[test]
        fn jumps_are_monotone(psi in -100.0f64..0.0, gap in 0.0f64..100.0, theta in 0.0f64..1.0) {
            let after = psi + gap;
            let before = apply_value_jump(&[after], theta, &[psi])[0];
            prop_assert!(before >= psi - 1e-12 && before <= after + 1e-12);
        }
    }
}
