use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::OracleError;

/// Continuous piecewise-linear function of time, held constant outside its knots.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl Profile {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self, OracleError> {
        if times.is_empty() || times.len() != values.len() {
            return Err(OracleError::InvalidProfile(format!(
                "need matching nonempty knots, got {} times and {} values",
                times.len(),
                values.len()
            )));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(OracleError::InvalidProfile("knot times must increase strictly".into()));
        }
        if times.iter().chain(&values).any(|x| !x.is_finite()) {
            return Err(OracleError::InvalidProfile("knots must be finite".into()));
        }
        Ok(Self { times, values })
    }

    pub fn constant(value: f64) -> Self {
        Self {
            times: vec![0.0],
            values: vec![value],
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, t: f64) -> f64 {
        let k = self.times.partition_point(|&s| s <= t);
        if k == 0 {
            return self.values[0];
        }
        if k == self.times.len() {
            return self.values[k - 1];
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let w = (t - t0) / (t1 - t0);
        (1.0 - w) * self.values[k - 1] + w * self.values[k]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// A random smooth contact profile in `[1, 9]` and infection curve in
/// `[0.01, 0.4]` on `[t_start, t_end]`, sampled every half day.
pub fn random_profile_pair<R: Rng>(rng: &mut R, t_start: f64, t_end: f64) -> (Profile, Profile) {
    let c0 = rng.random_range(3.0..7.0);
    let c_amp = rng.random_range(0.0..2.0);
    let c_period = rng.random_range(20.0..120.0);
    let c_phase = rng.random_range(0.0..std::f64::consts::TAU);
    let i0 = rng.random_range(0.03..0.25);
    let i_amp = rng.random_range(0.0..0.6);
    let i_period = rng.random_range(30.0..200.0);
    let i_phase = rng.random_range(0.0..std::f64::consts::TAU);

    let knots = ((t_end - t_start) * 2.0).ceil() as usize;
    let times: Vec<f64> = (0..=knots)
        .map(|k| t_start + (t_end - t_start) * k as f64 / knots as f64)
        .collect();
    let wave = |t: f64, period: f64, phase: f64| (std::f64::consts::TAU * t / period + phase).sin();
    let contact = times
        .iter()
        .map(|&t| (c0 + c_amp * wave(t, c_period, c_phase)).clamp(1.0, 9.0))
        .collect();
    let infected = times
        .iter()
        .map(|&t| (i0 * (1.0 + i_amp * wave(t, i_period, i_phase))).clamp(0.01, 0.4))
        .collect();
    (
        Profile::new(times.clone(), contact).expect("knots are valid"),
        Profile::new(times, infected).expect("knots are valid"),
    )
}

/// `count` independent random pairs drawn from a generator seeded with `seed`.
pub fn random_profile_pairs(count: usize, seed: u64, t_start: f64, t_end: f64) -> Vec<(Profile, Profile)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| random_profile_pair(&mut rng, t_start, t_end))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_and_clamps() {
        let p = Profile::new(vec![0.0, 10.0], vec![1.0, 3.0]).unwrap();
        assert_eq!(p.eval(-1.0), 1.0);
        assert_eq!(p.eval(5.0), 2.0);
        assert_eq!(p.eval(20.0), 3.0);
        assert_eq!(Profile::constant(0.2).eval(123.0), 0.2);
        assert!(Profile::new(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn random_pairs_stay_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let (c, i) = random_profile_pair(&mut rng, 10.0, 110.0);
            assert!(c.min() >= 1.0 && c.max() <= 9.0);
            assert!(i.min() >= 0.01 && i.max() <= 0.4);
            assert_eq!(c.times()[0], 10.0);
        }
    }
}
