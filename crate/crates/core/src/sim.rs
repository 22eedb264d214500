//! Equilibrium trajectories: closed-form solution of the linear closed loop
//! and a classical fourth-order integrator used as a cross-check.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{GameError, Result};
use crate::model::{GameMode, ModelParams, Role};
use crate::num::Scalar;
use crate::profit::{payoff_rates, step_weights};
use crate::solution::{ClosedLoop, GameSolution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    #[default]
    Exact,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig<T> {
    pub horizon: T,
    pub step: T,
    pub integrator: Integrator,
    /// Overrides the parameter set's `h0`.
    pub h0: Option<T>,
}

impl<T: Scalar> Default for SimConfig<T> {
    fn default() -> Self {
        Self { horizon: T::lit(40.0), step: T::lit(0.01), integrator: Integrator::Exact, h0: None }
    }
}

impl<T: Scalar> SimConfig<T> {
    /// Number of steps; fails unless `horizon / step` is a positive integer.
    pub fn steps(&self) -> Result<usize> {
        if !(self.horizon > T::zero()) {
            return Err(GameError::InvalidSim(format!("horizon must be positive, got {}", self.horizon)));
        }
        if !(self.step > T::zero()) || self.step > self.horizon {
            return Err(GameError::InvalidSim(format!("step must lie in (0, horizon], got {}", self.step)));
        }
        let ratio = self.horizon / self.step;
        let n = ratio.round();
        if (ratio - n).abs() > T::lit(1e-6) * n.max(T::one()) {
            return Err(GameError::InvalidSim(format!("horizon/step = {ratio} is not an integer")));
        }
        n.to_usize().ok_or_else(|| GameError::InvalidSim("too many steps".into()))
    }

    pub fn initial(&self, params: &ModelParams<T>) -> T {
        self.h0.unwrap_or(params.h0)
    }
}

/// Sampled equilibrium path and every derived series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory<T> {
    pub mode: GameMode,
    pub t: Vec<T>,
    pub h: Vec<T>,
    pub effort_f: Vec<T>,
    pub effort_r: Vec<T>,
    pub subsidy: Vec<Option<T>>,
    pub supply: Vec<T>,
    pub demand: Vec<T>,
    pub sink: Vec<T>,
    pub payoff_f: Vec<T>,
    pub payoff_r: Vec<T>,
    pub disc_cum_f: Vec<T>,
    pub disc_cum_r: Vec<T>,
    /// Samples where an effort is negative or the subsidy leaves `[0, 1)`.
    pub flagged: Vec<bool>,
}

pub const TABLE_HEADER: [&str; 12] =
    ["t", "H", "E_f", "E_r", "x_f", "Q", "D", "F", "payoff_f", "payoff_r", "disc_cum_f", "disc_cum_r"];

impl<T: Scalar> Trajectory<T> {
    /// Fills every derived column from sampled states.
    pub fn from_states<L: ClosedLoop<T> + ?Sized>(lp: &L, params: &ModelParams<T>, step: T, states: Vec<T>) -> Self {
        let k = params.derived();
        let n = states.len();
        let mode = lp.mode();
        let mut tr = Trajectory {
            mode,
            t: (0..n).map(|i| T::lit(i as f64) * step).collect(),
            h: states,
            effort_f: Vec::with_capacity(n),
            effort_r: Vec::with_capacity(n),
            subsidy: Vec::with_capacity(n),
            supply: Vec::with_capacity(n),
            demand: Vec::with_capacity(n),
            sink: Vec::with_capacity(n),
            payoff_f: Vec::with_capacity(n),
            payoff_r: Vec::with_capacity(n),
            disc_cum_f: Vec::with_capacity(n),
            disc_cum_r: Vec::with_capacity(n),
            flagged: Vec::with_capacity(n),
        };
        for &h in &tr.h {
            let c = lp.controls(h);
            let x = if mode == GameMode::Stackelberg { c.subsidy } else { None };
            let pay = payoff_rates(mode, h, c.effort_f, c.effort_r, x, params);
            tr.effort_f.push(c.effort_f);
            tr.effort_r.push(c.effort_r);
            tr.subsidy.push(x);
            tr.supply.push(k.supply(h));
            tr.demand.push(k.demand(h));
            tr.sink.push(k.carbon_sink(h, c.effort_f, params.omega));
            tr.payoff_f.push(pay.farmer.net);
            tr.payoff_r.push(pay.retailer.net);
            let bad_x = x.is_some_and(|x| x < T::zero() || x >= T::one());
            tr.flagged.push(c.effort_f < T::zero() || c.effort_r < T::zero() || bad_x);
        }
        let (wl, wr) = step_weights(params.rho, step);
        let decay = (-params.rho * step).exp();
        for (rates, out) in [(&tr.payoff_f, &mut tr.disc_cum_f), (&tr.payoff_r, &mut tr.disc_cum_r)] {
            let mut acc = T::zero();
            let mut disc = T::one();
            out.push(acc);
            for i in 1..n {
                acc = acc + disc * (wl * rates[i - 1] + wr * rates[i]);
                disc = disc * decay;
                out.push(acc);
            }
        }
        tr
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Net payoff rates of `role`; `Joint` sums both roles.
    pub fn rates(&self, role: Role) -> Vec<T> {
        match role {
            Role::Farmer => self.payoff_f.clone(),
            Role::Retailer => self.payoff_r.clone(),
            Role::Joint => self.payoff_f.iter().zip(&self.payoff_r).map(|(a, b)| *a + *b).collect(),
        }
    }

    /// Discounted cumulative profit of `role` up to sample `i`.
    pub fn discounted_through(&self, role: Role, i: usize) -> T {
        match role {
            Role::Farmer => self.disc_cum_f[i],
            Role::Retailer => self.disc_cum_r[i],
            Role::Joint => self.disc_cum_f[i] + self.disc_cum_r[i],
        }
    }

    /// Writes the delimited table with the fixed column order.
    pub fn write_table<W: Write>(&self, out: W) -> Result<()> {
        let io = |e: csv::Error| GameError::Io(e.to_string());
        let mut w = csv::Writer::from_writer(out);
        w.write_record(TABLE_HEADER).map_err(io)?;
        for i in 0..self.len() {
            let x = self.subsidy[i].map(|v| v.to_string()).unwrap_or_default();
            let row = [
                self.t[i].to_string(),
                self.h[i].to_string(),
                self.effort_f[i].to_string(),
                self.effort_r[i].to_string(),
                x,
                self.supply[i].to_string(),
                self.demand[i].to_string(),
                self.sink[i].to_string(),
                self.payoff_f[i].to_string(),
                self.payoff_r[i].to_string(),
                self.disc_cum_f[i].to_string(),
                self.disc_cum_r[i].to_string(),
            ];
            w.write_record(&row).map_err(io)?;
        }
        w.flush().map_err(|e| GameError::Io(e.to_string()))
    }
}

/// Fixed point `-beta / alpha` of the closed-loop drift.
pub fn steady_state<T: Scalar>(solution: &GameSolution<T>) -> Result<T> {
    if !(solution.alpha < T::zero()) {
        return Err(GameError::NoSteadyState(solution.alpha.as_f64()));
    }
    if solution.beta == T::zero() {
        return Ok(T::zero());
    }
    Ok(-solution.beta / solution.alpha)
}

/// `H(t) = H_d + (H0 - H_d) exp(alpha t)` on the configured grid.
pub fn exact_trajectory<T: Scalar>(
    solution: &GameSolution<T>,
    cfg: &SimConfig<T>,
    params: &ModelParams<T>,
) -> Result<Trajectory<T>> {
    let hd = steady_state(solution)?;
    let n = cfg.steps()?;
    let h0 = cfg.initial(params);
    let states = (0..=n)
        .map(|i| {
            let t = T::lit(i as f64) * cfg.step;
            hd + (h0 - hd) * (solution.alpha * t).exp()
        })
        .collect();
    Ok(Trajectory::from_states(solution, params, cfg.step, states))
}

/// Classical fixed-step RK4 integration of the closed-loop drift.
pub fn integrate_trajectory<T: Scalar, L: ClosedLoop<T> + ?Sized>(
    lp: &L,
    cfg: &SimConfig<T>,
    params: &ModelParams<T>,
) -> Result<Trajectory<T>> {
    let n = cfg.steps()?;
    let h = cfg.step;
    let f = |x: T| lp.drift(params, x);
    let six = T::lit(6.0);
    let mut states = Vec::with_capacity(n + 1);
    let mut x = cfg.initial(params);
    states.push(x);
    for _ in 0..n {
        let k1 = f(x);
        let k2 = f(x + T::half() * h * k1);
        let k3 = f(x + T::half() * h * k2);
        let k4 = f(x + h * k3);
        x = x + h / six * (k1 + T::two() * (k2 + k3) + k4);
        states.push(x);
    }
    Ok(Trajectory::from_states(lp, params, h, states))
}

/// Simulates with the integrator named in the config.
pub fn simulate<T: Scalar>(
    solution: &GameSolution<T>,
    cfg: &SimConfig<T>,
    params: &ModelParams<T>,
) -> Result<Trajectory<T>> {
    match cfg.integrator {
        Integrator::Exact => exact_trajectory(solution, cfg, params),
        Integrator::Rk4 => integrate_trajectory(solution, cfg, params),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_count_validation() {
        let ok = SimConfig { horizon: 40.0, step: 0.01, integrator: Integrator::Exact, h0: None };
        assert_eq!(ok.steps().unwrap(), 4000);
        let bad = SimConfig { step: 0.3, ..ok };
        assert!(bad.steps().is_err());
        let neg = SimConfig { horizon: -1.0, ..ok };
        assert!(neg.steps().is_err());
        let big = SimConfig { step: 41.0, ..ok };
        assert!(big.steps().is_err());
    }
}
