//! Classical fourth-order Runge-Kutta sweeps over a mesh.
//!
//! The forward sweep interpolates the nodal policy linearly inside a step.
//! The backward sweep evaluates the forward state at step midpoints by cubic
//! Hermite interpolation from the nodal states and derivatives.

use super::{Mesh, SolveError};
use crate::game::GameModel;
use crate::horizon::apply_value_jump;

fn axpy(out: &mut [f64], x: &[f64], a: f64, y: &[f64]) {
    for ((o, xi), yi) in out.iter_mut().zip(x).zip(y) {
        *o = xi + a * yi;
    }
}

/// Integrates the forward state from `x0` under the nodal `policy`.
pub fn forward_sweep(model: &dyn GameModel, mesh: &Mesh, x0: &[f64], policy: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let t = mesh.times();
    let dim = model.state_dim();
    let mut states = Vec::with_capacity(t.len());
    states.push(x0.to_vec());
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
    let mut tmp = vec![0.0; dim];
    let mut mid = vec![0.0; policy[0].len()];
    for i in 0..t.len() - 1 {
        let x = &states[i];
        let dt = t[i + 1] - t[i];
        if dt == 0.0 {
            states.push(crate::horizon::state_continuity(x));
            continue;
        }
        for (m, (a, b)) in mid.iter_mut().zip(policy[i].iter().zip(&policy[i + 1])) {
            *m = 0.5 * (a + b);
        }
        model.forward_rhs(x, &policy[i], &mut k1);
        axpy(&mut tmp, x, 0.5 * dt, &k1);
        model.forward_rhs(&tmp, &mid, &mut k2);
        axpy(&mut tmp, x, 0.5 * dt, &k2);
        model.forward_rhs(&tmp, &mid, &mut k3);
        axpy(&mut tmp, x, dt, &k3);
        model.forward_rhs(&tmp, &policy[i + 1], &mut k4);
        let next: Vec<f64> = (0..dim)
            .map(|j| x[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]))
            .collect();
        states.push(next);
    }
    states
}

enum ValuePolicy<'a> {
    Optimal,
    Fixed(&'a [Vec<f64>]),
}

/// Values and best-response policy, one row per mesh node.
type Series = (Vec<Vec<f64>>, Vec<Vec<f64>>);

fn backward(
    model: &dyn GameModel,
    mesh: &Mesh,
    states: &[Vec<f64>],
    state_policy: &[Vec<f64>],
    mode: ValuePolicy<'_>,
) -> Result<Series, SolveError> {
    let t = mesh.times();
    let n = t.len();
    let dim = model.value_dim();
    let sdim = model.state_dim();
    let pdim = model.policy_dim();
    let terminal = model.terminal_values();

    // nodal forward derivatives for the Hermite midpoints
    let slopes: Vec<Vec<f64>> = states
        .iter()
        .zip(state_policy)
        .map(|(x, c)| {
            let mut d = vec![0.0; sdim];
            model.forward_rhs(x, c, &mut d);
            d
        })
        .collect();

    let mut values = vec![Vec::new(); n];
    values[n - 1] = terminal.clone();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
    let mut tmp = vec![0.0; dim];
    let mut x_mid = vec![0.0; sdim];
    let mut scratch = vec![0.0; pdim];
    let mut p_mid = vec![0.0; pdim];

    let rhs = |x: &[f64], v: &[f64], node_policy: Option<&[f64]>, out: &mut [f64], scratch: &mut [f64]| match (
        &mode,
        node_policy,
    ) {
        (ValuePolicy::Optimal, _) => model.value_rhs(x, v, out, scratch),
        (ValuePolicy::Fixed(_), Some(c)) => model.value_rhs_with_policy(x, v, c, out),
        (ValuePolicy::Fixed(_), None) => unreachable!(),
    };

    for i in (1..n).rev() {
        let dt = t[i] - t[i - 1];
        if dt == 0.0 {
            let theta = mesh.jump_at(i).expect("zero-length step only at events");
            values[i - 1] = apply_value_jump(&values[i], theta, &terminal);
            continue;
        }
        let (x0, x1) = (&states[i - 1], &states[i]);
        for j in 0..sdim {
            x_mid[j] = 0.5 * (x0[j] + x1[j]) + dt / 8.0 * (slopes[i - 1][j] - slopes[i][j]);
        }
        let (c_hi, c_lo) = match &mode {
            ValuePolicy::Fixed(p) => {
                for (m, (a, b)) in p_mid.iter_mut().zip(p[i - 1].iter().zip(&p[i])) {
                    *m = 0.5 * (a + b);
                }
                (Some(p[i].as_slice()), Some(p[i - 1].as_slice()))
            }
            ValuePolicy::Optimal => (None, None),
        };
        let c_mid = c_hi.map(|_| p_mid.clone());
        let v = values[i].clone();
        rhs(x1, &v, c_hi, &mut k1, &mut scratch)?;
        axpy(&mut tmp, &v, -0.5 * dt, &k1);
        rhs(&x_mid, &tmp, c_mid.as_deref(), &mut k2, &mut scratch)?;
        axpy(&mut tmp, &v, -0.5 * dt, &k2);
        rhs(&x_mid, &tmp, c_mid.as_deref(), &mut k3, &mut scratch)?;
        axpy(&mut tmp, &v, -dt, &k3);
        rhs(x0, &tmp, c_lo, &mut k4, &mut scratch)?;
        values[i - 1] = (0..dim)
            .map(|j| v[j] - dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]))
            .collect();
    }

    let policy = match mode {
        ValuePolicy::Fixed(p) => p.to_vec(),
        ValuePolicy::Optimal => states
            .iter()
            .zip(&values)
            .map(|(x, v)| {
                let mut c = vec![0.0; pdim];
                model.best_policy(x, v, &mut c).map(|_| c)
            })
            .collect::<Result<_, _>>()?,
    };
    Ok((values, policy))
}

/// Integrates the values backward from the terminal payoffs with pointwise
/// best responses. `state_policy` is the policy that generated `states`.
/// Returns the values and the nodal best-response policy.
pub fn backward_sweep(
    model: &dyn GameModel,
    mesh: &Mesh,
    states: &[Vec<f64>],
    state_policy: &[Vec<f64>],
) -> Result<Series, SolveError> {
    backward(model, mesh, states, state_policy, ValuePolicy::Optimal)
}

/// Values of following `policy` given the forward states it generated.
pub fn backward_sweep_with_policy(
    model: &dyn GameModel,
    mesh: &Mesh,
    states: &[Vec<f64>],
    policy: &[Vec<f64>],
) -> Result<Vec<Vec<f64>>, SolveError> {
    backward(model, mesh, states, policy, ValuePolicy::Fixed(policy)).map(|(v, _)| v)
}
