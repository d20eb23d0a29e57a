use crate::model::EpiParams;

/// How the immunity coordinate `p` evolves for noninfected individuals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriftKind {
    /// Observable immunity decaying as `p' = -γ p`.
    Waning,
    /// Posterior probability of still being immune given no re-infection.
    Belief,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftSpec {
    pub kind: DriftKind,
    pub gamma: f64,
    pub beta: f64,
    pub c_bar_i: f64,
}

impl DriftSpec {
    pub fn new(kind: DriftKind, epi: &EpiParams, c_bar_i: f64) -> Self {
        Self {
            kind,
            gamma: epi.gamma,
            beta: epi.beta,
            c_bar_i,
        }
    }

    /// `f(p, c, t)` given the infected fraction at `t`.
    pub fn value(&self, p: f64, c: f64, infected: f64) -> f64 {
        match self.kind {
            DriftKind::Waning => -self.gamma * p,
            DriftKind::Belief => -self.gamma * p + self.beta * self.c_bar_i * infected * c * p * (1.0 - p),
        }
    }

    /// `∂f/∂c`; zero for waning immunity.
    pub fn d_contact(&self, p: f64, infected: f64) -> f64 {
        match self.kind {
            DriftKind::Waning => 0.0,
            DriftKind::Belief => self.beta * self.c_bar_i * infected * p * (1.0 - p),
        }
    }
}

/// Belief drift `-γ p + β c̄_I I c p (1 - p)`.
pub fn belief_drift(p: f64, c: f64, infected: f64, epi: &EpiParams, c_bar_i: f64) -> f64 {
    DriftSpec::new(DriftKind::Belief, epi, c_bar_i).value(p, c, infected)
}
