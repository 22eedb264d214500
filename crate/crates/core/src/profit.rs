//! Instantaneous payoffs, discounted profits along trajectories, and value
//! function lookups.

use serde::Serialize;

use crate::error::{GameError, Result};
use crate::model::{GameMode, ModelParams, Role};
use crate::num::Scalar;
use crate::sim::Trajectory;
use crate::solution::GameSolution;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FarmerPayoff<T> {
    pub margin_revenue: T,
    pub sink_revenue: T,
    pub effort_cost: T,
    /// Share of the effort cost reimbursed by the retailer.
    pub subsidy_received: T,
    pub net: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RetailerPayoff<T> {
    pub margin_revenue: T,
    pub effort_cost: T,
    pub subsidy_paid: T,
    pub net: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PayoffBreakdown<T> {
    pub farmer: FarmerPayoff<T>,
    pub retailer: RetailerPayoff<T>,
    /// Set when the subsidy ratio lies outside `[0, 1]`.
    pub subsidy_out_of_range: bool,
}

impl<T: Scalar> PayoffBreakdown<T> {
    /// Supply-chain rate; the subsidy transfer cancels.
    pub fn joint(&self) -> T {
        self.farmer.net + self.retailer.net
    }

    pub fn rate(&self, role: Role) -> T {
        match role {
            Role::Farmer => self.farmer.net,
            Role::Retailer => self.retailer.net,
            Role::Joint => self.joint(),
        }
    }
}

/// Payoff rates of both roles at a state. The subsidy only applies in
/// Stackelberg play; an undefined ratio counts as no transfer.
pub fn payoff_rates<T: Scalar>(
    mode: GameMode,
    h: T,
    effort_f: T,
    effort_r: T,
    subsidy: Option<T>,
    params: &ModelParams<T>,
) -> PayoffBreakdown<T> {
    let k = params.derived();
    let x = match mode {
        GameMode::Stackelberg => subsidy.unwrap_or(T::zero()),
        _ => T::zero(),
    };
    let q = k.supply(h);
    let (cost_f, cost_r) = params.effort_costs(effort_f, effort_r);
    let transfer = x * cost_f;
    let farmer = FarmerPayoff {
        margin_revenue: params.p_f * q,
        sink_revenue: params.p_c * k.carbon_sink(h, effort_f, params.omega),
        effort_cost: cost_f,
        subsidy_received: transfer,
        net: T::zero(),
    };
    let farmer = FarmerPayoff { net: farmer.margin_revenue + farmer.sink_revenue - cost_f + transfer, ..farmer };
    let margin_r = params.p_r * k.demand(h);
    let retailer = RetailerPayoff {
        margin_revenue: margin_r,
        effort_cost: cost_r,
        subsidy_paid: transfer,
        net: margin_r - cost_r - transfer,
    };
    PayoffBreakdown { farmer, retailer, subsidy_out_of_range: x < T::zero() || x > T::one() }
}

/// Weights `(w_left, w_right)` such that the exact integral over one step of
/// `exp(-rho s)` times the linear interpolant of the rate is
/// `w_left r_i + w_right r_{i+1}` (relative to the left endpoint).
pub(crate) fn step_weights<T: Scalar>(rho: T, h: T) -> (T, T) {
    let x = rho * h;
    let e = (-x).exp();
    let w0 = -(-x).exp_m1() / rho;
    let w1 = (-(-x).exp_m1() - x * e) / (rho * rho * h);
    (w0 - w1, w1)
}

/// Discounted profit of `role` along a trajectory: exponentially weighted
/// trapezoidal quadrature on the stored grid plus the tail beyond the horizon
/// with the state frozen at its final value.
pub fn discounted_profit<T: Scalar>(traj: &Trajectory<T>, role: Role, params: &ModelParams<T>) -> Result<T> {
    let horizon = *traj.t.last().unwrap_or(&T::zero());
    let rho_t = params.rho * horizon;
    if rho_t < T::lit(20.0) {
        return Err(GameError::HorizonTooShort(rho_t.as_f64()));
    }
    let rates = traj.rates(role);
    let n = rates.len() - 1;
    Ok(traj.discounted_through(role, n) + (-rho_t).exp() * rates[n] / params.rho)
}

/// Value of `role` at `h` from the solved value function.
pub fn value_at<T: Scalar>(solution: &GameSolution<T>, role: Role, h: T) -> Result<T> {
    solution.value_at(role, h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_zero_state() {
        let p = ModelParams::<f64>::baseline();
        let b = payoff_rates(GameMode::Decentralized, 0.0, 0.0, 0.0, None, &p);
        assert_eq!(b.farmer.net, 0.0);
        assert_eq!(b.retailer.net, 0.0);
    }

    #[test]
    fn decentralized_rates_at_unit_state() {
        let p = ModelParams::<f64>::baseline();
        let b = payoff_rates(GameMode::Decentralized, 1.0, 1.0, 1.0, None, &p);
        assert!((b.farmer.net - 1460.0).abs() < 1e-9);
        assert!((b.retailer.net - 1500.0).abs() < 1e-9);
    }

    #[test]
    fn half_subsidy_moves_cost_between_roles() {
        let p = ModelParams::<f64>::baseline();
        let d = payoff_rates(GameMode::Decentralized, 1.0, 1.0, 1.0, None, &p);
        let s = payoff_rates(GameMode::Stackelberg, 1.0, 1.0, 1.0, Some(0.5), &p);
        assert_eq!(s.farmer.effort_cost - s.farmer.subsidy_received, 125.0);
        assert_eq!(s.retailer.subsidy_paid, 125.0);
        assert!((s.joint() - d.joint()).abs() < 1e-9);
        assert!(!s.subsidy_out_of_range);
        let bad = payoff_rates(GameMode::Stackelberg, 1.0, 1.0, 1.0, Some(1.5), &p);
        assert!(bad.subsidy_out_of_range);
        assert!((bad.joint() - d.joint()).abs() < 1e-9);
    }

    #[test]
    fn step_weights_integrate_constant_exactly() {
        let (l, r) = step_weights(0.7f64, 0.01);
        let exact = (1.0 - (-0.007f64).exp()) / 0.7;
        assert!(((l + r) - exact).abs() < 1e-17);
        // linear rate r(s) = s / h on [0, h]
        let h = 0.5f64;
        let (_, r) = step_weights(0.7, h);
        let exact = (1.0 - (-0.35f64).exp() * 1.35) / (0.49 * h);
        assert!((r - exact).abs() < 1e-15);
    }
}
