//! Forward-backward games the boundary value solver can handle.

use crate::dynamics::{
    mfg_sirsd_value_rhs, sirsd_rhs, sirsd_value_rhs_with_policy, structured_forward_rhs, structured_value_rhs,
    structured_value_rhs_with_policy, BandLayout, DriftKind, DriftSpec, DynamicsError, Grid, SirsdState, SirsdValues,
};
use crate::model::{ModelParams, Penalties};
use crate::optimize::response_objective;

/// A mean-field game in forward-backward form.
///
/// The forward state evolves under a policy; the values evolve backward in
/// time given the forward state, with each noninfected group choosing its
/// best response pointwise. Right-hand sides are autonomous: time enters
/// only through the forward state.
pub trait GameModel: Send + Sync {
    fn state_dim(&self) -> usize;
    fn value_dim(&self) -> usize;
    fn policy_dim(&self) -> usize;

    /// Index of the infected fraction in the forward state.
    fn infected_index(&self) -> usize;
    /// Index of the dead fraction in the forward state.
    fn dead_index(&self) -> usize;
    /// Index of the infected value in the value vector.
    fn infected_value_index(&self) -> usize;

    /// Terminal payoffs, also the target of horizon jumps.
    fn terminal_values(&self) -> Vec<f64>;
    fn myopic_policy(&self) -> Vec<f64>;
    /// Per-component upper bounds of the feasible contact rates.
    fn policy_upper(&self) -> Vec<f64>;

    fn forward_rhs(&self, state: &[f64], policy: &[f64], out: &mut [f64]);

    /// Value derivatives under the pointwise Nash policy, which is written
    /// to `policy_out`.
    fn value_rhs(
        &self,
        state: &[f64],
        values: &[f64],
        out: &mut [f64],
        policy_out: &mut [f64],
    ) -> Result<(), DynamicsError>;

    /// Value derivatives when following a fixed policy.
    fn value_rhs_with_policy(
        &self,
        state: &[f64],
        values: &[f64],
        policy: &[f64],
        out: &mut [f64],
    ) -> Result<(), DynamicsError>;

    /// Pointwise best response given state and values.
    fn best_policy(&self, state: &[f64], values: &[f64], out: &mut [f64]) -> Result<(), DynamicsError> {
        let mut scratch = vec![0.0; self.value_dim()];
        self.value_rhs(state, values, &mut scratch, out)
    }

    /// The objective the `index`-th policy component maximizes.
    fn policy_objective(&self, state: &[f64], values: &[f64], index: usize, c: f64) -> f64;

    /// Indices of value components belonging to noninfected groups.
    fn noninfected_value_indices(&self) -> Vec<usize>;
}

/// MFG-SIRSD: forward `[S, I, R, D]`, values `[V_S, V_I, V_R]`, policy `[c_S]`.
#[derive(Debug, Clone)]
pub struct SirsdGame {
    params: ModelParams,
    penalties: Penalties,
}

impl SirsdGame {
    pub fn new(params: ModelParams) -> Self {
        Self {
            penalties: params.penalties(),
            params,
        }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }
}

impl GameModel for SirsdGame {
    fn state_dim(&self) -> usize {
        4
    }

    fn value_dim(&self) -> usize {
        3
    }

    fn policy_dim(&self) -> usize {
        1
    }

    fn infected_index(&self) -> usize {
        1
    }

    fn dead_index(&self) -> usize {
        3
    }

    fn infected_value_index(&self) -> usize {
        1
    }

    fn terminal_values(&self) -> Vec<f64> {
        vec![self.penalties.psi_n, self.penalties.psi_i, self.penalties.psi_n]
    }

    fn myopic_policy(&self) -> Vec<f64> {
        vec![self.params.c_bar_n()]
    }

    fn policy_upper(&self) -> Vec<f64> {
        vec![self.params.utility.b_n]
    }

    fn forward_rhs(&self, state: &[f64], policy: &[f64], out: &mut [f64]) {
        let d = sirsd_rhs(
            &SirsdState::from_slice(state),
            (policy[0], self.params.c_bar_i()),
            &self.params.epi,
        );
        out.copy_from_slice(&d.to_array());
    }

    fn value_rhs(
        &self,
        state: &[f64],
        values: &[f64],
        out: &mut [f64],
        policy_out: &mut [f64],
    ) -> Result<(), DynamicsError> {
        let (d, c) = mfg_sirsd_value_rhs(
            &SirsdValues::from_slice(values),
            state[1],
            self.params.c_bar_i(),
            &self.params,
            &self.penalties,
        );
        out.copy_from_slice(&d.to_array());
        policy_out[0] = c;
        Ok(())
    }

    fn value_rhs_with_policy(
        &self,
        state: &[f64],
        values: &[f64],
        policy: &[f64],
        out: &mut [f64],
    ) -> Result<(), DynamicsError> {
        let d = sirsd_value_rhs_with_policy(
            &SirsdValues::from_slice(values),
            state[1],
            policy[0],
            self.params.c_bar_i(),
            &self.params,
            &self.penalties,
        );
        out.copy_from_slice(&d.to_array());
        Ok(())
    }

    fn policy_objective(&self, state: &[f64], values: &[f64], _index: usize, c: f64) -> f64 {
        let kappa = self.params.epi.beta * self.params.c_bar_i() * state[1] * (values[1] - values[0]);
        response_objective(c, kappa, 0.0, &self.params.utility)
    }

    fn noninfected_value_indices(&self) -> Vec<usize> {
        vec![0, 2]
    }
}

/// Immunity-structured game on a band grid (waning or belief drift).
#[derive(Debug, Clone)]
pub struct StructuredGame {
    params: ModelParams,
    penalties: Penalties,
    grid: Grid,
    drift: DriftSpec,
    layout: BandLayout,
}

impl StructuredGame {
    pub fn new(params: ModelParams, kind: DriftKind, grid: Grid) -> Self {
        let drift = DriftSpec::new(kind, &params.epi, params.c_bar_i());
        Self {
            penalties: params.penalties(),
            layout: BandLayout::new(&grid),
            params,
            grid,
            drift,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn drift(&self) -> &DriftSpec {
        &self.drift
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn layout(&self) -> BandLayout {
        self.layout
    }
}

impl GameModel for StructuredGame {
    fn state_dim(&self) -> usize {
        self.layout.state_dim()
    }

    fn value_dim(&self) -> usize {
        self.layout.value_dim()
    }

    fn policy_dim(&self) -> usize {
        self.layout.bands
    }

    fn infected_index(&self) -> usize {
        self.layout.infected()
    }

    fn dead_index(&self) -> usize {
        self.layout.dead()
    }

    fn infected_value_index(&self) -> usize {
        self.layout.value_infected()
    }

    fn terminal_values(&self) -> Vec<f64> {
        let mut v = vec![self.penalties.psi_n; self.layout.bands];
        v.push(self.penalties.psi_i);
        v
    }

    fn myopic_policy(&self) -> Vec<f64> {
        vec![self.params.c_bar_n(); self.layout.bands]
    }

    fn policy_upper(&self) -> Vec<f64> {
        vec![self.params.utility.b_n; self.layout.bands]
    }

    fn forward_rhs(&self, state: &[f64], policy: &[f64], out: &mut [f64]) {
        structured_forward_rhs(state, policy, &self.drift, &self.grid, &self.params, out);
    }

    fn value_rhs(
        &self,
        state: &[f64],
        values: &[f64],
        out: &mut [f64],
        policy_out: &mut [f64],
    ) -> Result<(), DynamicsError> {
        structured_value_rhs(
            values,
            state,
            &self.drift,
            &self.grid,
            &self.params,
            &self.penalties,
            out,
            policy_out,
        )
    }

    fn value_rhs_with_policy(
        &self,
        state: &[f64],
        values: &[f64],
        policy: &[f64],
        out: &mut [f64],
    ) -> Result<(), DynamicsError> {
        structured_value_rhs_with_policy(
            values,
            state,
            policy,
            &self.drift,
            &self.grid,
            &self.params,
            &self.penalties,
            out,
        )
    }

    fn policy_objective(&self, state: &[f64], values: &[f64], index: usize, c: f64) -> f64 {
        let m = self.grid.m();
        let h = self.grid.h();
        let p = self.grid.centers()[index];
        let infected = state[self.layout.infected()];
        let v_i = values[self.layout.value_infected()];
        let (left, right) = match index {
            0 => (2.0 * values[0] - values[1], values[1]),
            j if j == m => (values[m - 1], 2.0 * values[m] - values[m - 1]),
            j => (values[j - 1], values[j + 1]),
        };
        let slope = (right - left) / (2.0 * h);
        let kappa = self.params.epi.beta * self.params.c_bar_i() * infected * (1.0 - p) * (v_i - values[index]);
        let utility = response_objective(c, kappa, 0.0, &self.params.utility);
        utility + self.drift.value(p, c, infected) * slope
    }

    fn noninfected_value_indices(&self) -> Vec<usize> {
        (0..self.layout.bands).collect()
    }
}
