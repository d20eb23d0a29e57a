//! Scalar Nash best response of a noninfected individual.
//!
//! The objective is `u_N(c) + k c` on `[0, b_N]` where `k` collects every
//! term linear in the contact rate (infection risk and, for the belief model,
//! the drift reward). The derivative of `(b c - c^2)^g` is singular at both
//! ends for `g < 1`, so a golden-section pass narrows the bracket before a
//! Newton iteration that falls back to bisection whenever a step leaves it.

use crate::model::{ContactRate, UtilityParams};

const INV_PHI: f64 = 0.618_033_988_749_894_9;
const GOLDEN_WIDTH: f64 = 1e-3;
const X_TOL: f64 = 1e-12;
const MAX_NEWTON: usize = 100;

/// Objective maximized by [`best_response`].
pub fn response_objective(c: f64, kappa: f64, lambda_drift: f64, params: &UtilityParams) -> f64 {
    let base = (params.b_n * c - c * c).max(0.0);
    base.powf(params.g) - params.a_n + (kappa + lambda_drift) * c
}

fn objective_slope(c: f64, slope: f64, params: &UtilityParams) -> f64 {
    let b = params.b_n;
    let base = b * c - c * c;
    if base <= 0.0 {
        // g < 1: infinite marginal utility at the lower end, -infinite at the upper end
        return if params.g < 1.0 {
            if c <= b / 2.0 {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            }
        } else {
            b - 2.0 * c + slope
        };
    }
    params.g * (b - 2.0 * c) * base.powf(params.g - 1.0) + slope
}

fn objective_curvature(c: f64, params: &UtilityParams) -> f64 {
    let b = params.b_n;
    let g = params.g;
    let base = b * c - c * c;
    let lin = b - 2.0 * c;
    -2.0 * g * base.powf(g - 1.0) + g * (g - 1.0) * lin * lin * base.powf(g - 2.0)
}

/// Maximizer of `u_N(c) + (kappa + lambda_drift) c` over `[0, b_N]`.
///
/// `kappa` is the marginal infection cost per contact and `lambda_drift` the
/// contact-linear part of the belief drift reward.
pub fn best_response(kappa: f64, lambda_drift: f64, params: &UtilityParams) -> ContactRate {
    let slope = kappa + lambda_drift;
    let b = params.b_n;
    if slope == f64::NEG_INFINITY {
        return ContactRate(0.0);
    }
    if slope == f64::INFINITY {
        return ContactRate(b);
    }
    if params.g >= 1.0 {
        // quadratic objective
        return ContactRate(((b + slope) / 2.0).clamp(0.0, b));
    }

    let f = |c: f64| response_objective(c, kappa, lambda_drift, params);
    let (mut lo, mut hi) = (0.0, b);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > GOLDEN_WIDTH {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }

    // The slope is strictly decreasing; keep a sign-change bracket.
    if objective_slope(lo, slope, params) <= 0.0 {
        lo = 0.0;
    }
    if objective_slope(hi, slope, params) >= 0.0 {
        hi = b;
    }
    let mut c = 0.5 * (lo + hi);
    for _ in 0..MAX_NEWTON {
        let d = objective_slope(c, slope, params);
        if d == 0.0 {
            break;
        }
        if d > 0.0 {
            lo = c;
        } else {
            hi = c;
        }
        let curv = objective_curvature(c, params);
        let mut next = c - d / curv;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        let step = (next - c).abs();
        c = next;
        if step < X_TOL || hi - lo < X_TOL {
            break;
        }
    }
    debug_assert!(c == 0.0 || c == b || objective_curvature(c, params) < 0.0);
    ContactRate(c)
}
