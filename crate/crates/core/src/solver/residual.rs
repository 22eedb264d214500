use serde::Serialize;

use crate::model::{GameMode, ModelParams, Role};
use crate::num::Scalar;
use crate::profit::payoff_rates;
use crate::solution::GameSolution;

/// `rho V(H) - max RHS(H)` for one role.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoleResidual<T> {
    pub role: Role,
    pub residual: T,
    /// `rho V(H)`, for normalisation.
    pub scale: T,
}

/// HJB residual of every role at `h`. Controls are re-derived from the value
/// derivatives through the model's own first-order conditions (with the
/// `(1 - x_f)` cost share for the Stackelberg follower), so a solution built
/// under another convention shows up here as a nonzero residual.
pub fn hjb_residual<T: Scalar>(sol: &GameSolution<T>, params: &ModelParams<T>, h: T) -> Vec<RoleResidual<T>> {
    let p = params;
    let eta = p.derived().eta;
    let check = |role: Role, v: T, slope: T, rate: T, drift: T| RoleResidual {
        role,
        residual: p.rho * v - (rate + slope * drift),
        scale: p.rho * v,
    };
    match sol.mode {
        GameMode::Centralized => {
            let Some(j) = sol.joint else { return Vec::new() };
            let dv = j.slope(h);
            let ef = (eta * h + p.mu_f * dv) / p.lambda_f;
            let er = p.mu_r * dv / p.lambda_r;
            let rates = payoff_rates(sol.mode, h, ef, er, None, p);
            vec![check(Role::Joint, j.eval(h), dv, rates.joint(), p.reduction_drift(h, ef, er))]
        }
        GameMode::Decentralized | GameMode::Stackelberg => {
            let (Some(f), Some(r)) = (sol.farmer, sol.retailer) else { return Vec::new() };
            let (df, dr) = (f.slope(h), r.slope(h));
            let g = eta * h + p.mu_f * df;
            let (ef, x) = if sol.mode == GameMode::Decentralized {
                (g / p.lambda_f, None)
            } else {
                let s = g + T::two() * p.mu_f * dr;
                let x = if s == T::zero() { None } else { Some((s - T::two() * g) / s) };
                (s / (T::two() * p.lambda_f), x)
            };
            let er = p.mu_r * dr / p.lambda_r;
            let rates = payoff_rates(sol.mode, h, ef, er, x, p);
            let drift = p.reduction_drift(h, ef, er);
            vec![
                check(Role::Farmer, f.eval(h), df, rates.farmer.net, drift),
                check(Role::Retailer, r.eval(h), dr, rates.retailer.net, drift),
            ]
        }
    }
}

/// Largest normalised residual `|res| / (1 + |rho V|)` over `samples + 1`
/// points of `[0, 2 H_d]` (or `[0, 1]` when the steady state is not positive).
pub fn max_hjb_residual<T: Scalar>(sol: &GameSolution<T>, params: &ModelParams<T>, samples: usize) -> T {
    let top = if sol.steady_state > T::zero() { T::two() * sol.steady_state } else { T::one() };
    let n = samples.max(1);
    (0..=n)
        .flat_map(|i| hjb_residual(sol, params, top * T::lit(i as f64 / n as f64)))
        .map(|r| r.residual.abs() / (T::one() + r.scale.abs()))
        .fold(T::zero(), |acc, v| if v.is_nan() || acc.is_nan() || v > acc { v } else { acc })
}
