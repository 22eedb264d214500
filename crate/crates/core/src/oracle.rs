//! Solver-independent certification: value iteration on a discretised
//! single-agent (or joint) control problem, plus a sampled check of the
//! Stackelberg leader's rules.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{GameError, Result};
use crate::model::{GameMode, ModelParams, Role};
use crate::num::Scalar;
use crate::profit::{discounted_profit, payoff_rates};
use crate::sim::{integrate_trajectory, Integrator, SimConfig};
use crate::solution::{AffineRule, ClosedLoop, Controls, FeedbackPolicy, GameSolution, QuadraticValue, SubsidyRule};

/// Policy deviation bound (sup-norm, relative to the analytic policy).
pub const POLICY_TOLERANCE: f64 = 0.02;
/// Value deviation bound (relative).
pub const VALUE_TOLERANCE: f64 = 0.005;
/// Largest tolerated leader improvement from a perturbed rule.
pub const LEADER_TOLERANCE: f64 = 0.005;

/// Discretisation of the state and action spaces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec<T> {
    pub h_lo: T,
    pub h_hi: T,
    pub states: usize,
    /// Farmer effort range.
    pub effort_f: (T, T),
    /// Retailer effort range.
    pub effort_r: (T, T),
    pub actions: usize,
    pub dt: T,
    /// Stop once the sup-norm value change is below `tolerance * (1 + max |V|)`.
    pub tolerance: T,
    pub max_sweeps: usize,
}

impl<T: Scalar> GridSpec<T> {
    /// States on `[0, 2.5 H_d]`, actions on `[0, 3 x analytic maximum]`.
    pub fn for_solution(sol: &GameSolution<T>, _params: &ModelParams<T>) -> Self {
        let h_hi = (T::lit(2.5) * sol.steady_state).max(T::one());
        let top = |rule: AffineRule<T>| {
            let m = rule.eval(T::zero()).max(rule.eval(h_hi));
            if m > T::zero() {
                T::lit(3.0) * m
            } else {
                T::one()
            }
        };
        Self {
            h_lo: T::zero(),
            h_hi,
            states: 512,
            effort_f: (T::zero(), top(sol.policy.farmer)),
            effort_r: (T::zero(), top(sol.policy.retailer)),
            actions: 257,
            dt: T::lit(0.02),
            tolerance: T::lit(1e-7),
            max_sweeps: 20_000,
        }
    }

    /// Twice the state and action resolution, half the time step.
    pub fn refined(&self) -> Self {
        Self {
            states: 2 * self.states,
            actions: 2 * self.actions - 1,
            dt: self.dt * T::half(),
            max_sweeps: 2 * self.max_sweeps,
            ..*self
        }
    }

    pub fn validate(&self, params: &ModelParams<T>) -> Result<()> {
        let bad = |msg: String| Err(GameError::InvalidGrid(msg));
        if !(self.h_lo >= T::zero()) || !(self.h_hi > self.h_lo) {
            return bad(format!("state range [{}, {}] must satisfy 0 <= lo < hi", self.h_lo, self.h_hi));
        }
        if self.states < 64 || self.actions < 64 {
            return bad(format!("point counts must be >= 64 (states {}, actions {})", self.states, self.actions));
        }
        for (name, (lo, hi)) in [("farmer", self.effort_f), ("retailer", self.effort_r)] {
            if !(hi > lo) {
                return bad(format!("{name} action range [{lo}, {hi}] is empty"));
            }
        }
        if !(self.dt > T::zero()) || !(T::one() - params.delta * self.dt > T::zero()) {
            return bad(format!("time step {} must be positive with 1 - delta dt > 0", self.dt));
        }
        if !(self.tolerance > T::zero()) || self.max_sweeps == 0 {
            return bad("tolerance and max sweeps must be positive".into());
        }
        Ok(())
    }

    fn state(&self, i: usize) -> T {
        self.h_lo + (self.h_hi - self.h_lo) * T::lit(i as f64 / (self.states - 1) as f64)
    }

    fn action(&self, range: (T, T), j: usize) -> T {
        range.0 + (range.1 - range.0) * T::lit(j as f64 / (self.actions - 1) as f64)
    }
}

/// Tabulated greedy policy and value of a grid solve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BestResponse<T> {
    pub role: Role,
    pub states: Vec<T>,
    pub value: Vec<T>,
    /// Farmer effort applied at each state (chosen or the opponent's rule).
    pub effort_f: Vec<T>,
    /// Retailer effort applied at each state (chosen or the opponent's rule).
    pub effort_r: Vec<T>,
    pub sweeps: usize,
    /// Last sup-norm value change.
    pub residual: T,
}

impl<T: Scalar> BestResponse<T> {
    /// Linear interpolation of the tabulated value.
    pub fn value_at(&self, h: T) -> T {
        interp(&self.states, &self.value, h)
    }
}

fn interp<T: Scalar>(xs: &[T], ys: &[T], x: T) -> T {
    let n = xs.len();
    let lo = xs[0];
    let step = (xs[n - 1] - lo) / T::lit((n - 1) as f64);
    let u = ((x - lo) / step).max(T::zero());
    let i = u.floor().to_usize().unwrap_or(0).min(n - 2);
    let w = u - T::lit(i as f64);
    ys[i] + (ys[i + 1] - ys[i]) * w
}

struct Greedy<T> {
    value: T,
    idx: (usize, usize),
    /// Refined (off-grid) actions.
    action: (T, T),
}

/// Which efforts the responding side controls.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Choice {
    Farmer,
    Retailer,
    Both,
}

struct Problem<'a, T> {
    params: &'a ModelParams<T>,
    mode: GameMode,
    role: Role,
    choice: Choice,
    opponent: &'a FeedbackPolicy<T>,
    spec: &'a GridSpec<T>,
    states: Vec<T>,
    gamma: T,
    /// `(1 - gamma) / rho`: the exact discounted weight of a rate held for `dt`.
    weight: T,
    slack: T,
}

impl<T: Scalar> Problem<'_, T> {
    fn efforts(&self, h: T, af: T, ar: T) -> (T, T) {
        match self.choice {
            Choice::Farmer => (af, self.opponent.retailer.eval(h)),
            Choice::Retailer => (self.opponent.farmer.eval(h), ar),
            Choice::Both => (af, ar),
        }
    }

    /// One-step lookahead value, or `None` when the next state leaves the grid.
    fn q(&self, v: &[T], h: T, af: T, ar: T) -> Option<T> {
        let (ef, er) = self.efforts(h, af, ar);
        let next = h + self.spec.dt * self.params.reduction_drift(h, ef, er);
        if next < self.spec.h_lo - self.slack || next > self.spec.h_hi + self.slack {
            return None;
        }
        let x = self.opponent.subsidy.and_then(|s| s.eval(h));
        let rate = payoff_rates(self.mode, h, ef, er, x, self.params).rate(self.role);
        Some(self.weight * rate + self.gamma * interp(&self.states, v, next))
    }

    fn af(&self, j: usize) -> T {
        self.spec.action(self.spec.effort_f, j)
    }

    fn ar(&self, j: usize) -> T {
        self.spec.action(self.spec.effort_r, j)
    }

    /// Best index along one action axis with the other held fixed.
    fn line_search(&self, v: &[T], h: T, axis_f: bool, other: T) -> Option<(T, usize)> {
        let mut best: Option<(T, usize)> = None;
        for j in 0..self.spec.actions {
            let q = if axis_f { self.q(v, h, self.af(j), other) } else { self.q(v, h, other, self.ar(j)) };
            if let Some(q) = q {
                if best.is_none_or(|(b, _)| q > b) {
                    best = Some((q, j));
                }
            }
        }
        best
    }

    /// Greedy value, action indices and refined actions at state `i`, with
    /// coordinate ascent starting from `start` under joint control.
    fn greedy(&self, v: &[T], i: usize, start: (usize, usize)) -> Result<Greedy<T>> {
        let h = self.states[i];
        let left = || GameError::LeftGrid { state: h.as_f64() };
        let (q, idx) = match self.choice {
            Choice::Farmer => {
                let (q, j) = self.line_search(v, h, true, T::zero()).ok_or_else(left)?;
                (q, (j, 0))
            }
            Choice::Retailer => {
                let (q, j) = self.line_search(v, h, false, T::zero()).ok_or_else(left)?;
                (q, (0, j))
            }
            Choice::Both => {
                let (mut jf, mut jr) = start;
                let mut best = None;
                for _ in 0..16 {
                    let (_, nf) = self.line_search(v, h, true, self.ar(jr)).ok_or_else(left)?;
                    let (q, nr) = self.line_search(v, h, false, self.af(nf)).ok_or_else(left)?;
                    let done = nf == jf && nr == jr;
                    jf = nf;
                    jr = nr;
                    best = Some(q);
                    if done {
                        break;
                    }
                }
                (best.ok_or_else(left)?, (jf, jr))
            }
        };
        let (jf, jr) = idx;
        let refined = match self.choice {
            Choice::Farmer => (self.refine_axis(v, h, jf, true, T::zero()), T::zero()),
            Choice::Retailer => (T::zero(), self.refine_axis(v, h, jr, false, T::zero())),
            Choice::Both => {
                let af = self.refine_axis(v, h, jf, true, self.ar(jr));
                (af, self.refine_axis(v, h, jr, false, af))
            }
        };
        let discrete = (self.af(jf), self.ar(jr));
        Ok(match self.q(v, h, refined.0, refined.1) {
            Some(qr) if qr >= q => Greedy { value: qr, idx, action: refined },
            _ => Greedy { value: q, idx, action: discrete },
        })
    }

    fn eval_fixed(&self, v: &[T], i: usize, (af, ar): (T, T)) -> T {
        self.q(v, self.states[i], af, ar).unwrap_or(v[i])
    }

    /// Parabolic refinement of a discrete maximiser along one axis.
    fn refine_axis(&self, v: &[T], h: T, j: usize, axis_f: bool, other: T) -> T {
        let at = |j: usize| if axis_f { self.af(j) } else { self.ar(j) };
        let q = |a: T| if axis_f { self.q(v, h, a, other) } else { self.q(v, h, other, a) };
        if j == 0 || j + 1 >= self.spec.actions {
            return at(j);
        }
        let (Some(qm), Some(q0), Some(qp)) = (q(at(j - 1)), q(at(j)), q(at(j + 1))) else {
            return at(j);
        };
        let curv = qm - T::two() * q0 + qp;
        if !(curv < T::zero()) {
            return at(j);
        }
        let shift = (T::half() * (qm - qp) / curv).max(-T::one()).min(T::one());
        let step = at(1) - at(0);
        at(j) + shift * step
    }
}

/// Value iteration for `role` against the remaining rules of `opponent`.
///
/// A farmer or retailer chooses only its own effort; `Role::Joint` chooses
/// both efforts. Each greedy sweep is followed by a batch of policy
/// evaluation sweeps (modified policy iteration); convergence is judged on
/// the greedy sweeps only.
pub fn grid_best_response<T: Scalar>(
    params: &ModelParams<T>,
    mode: GameMode,
    role: Role,
    opponent: &FeedbackPolicy<T>,
    grid: &GridSpec<T>,
) -> Result<BestResponse<T>> {
    grid.validate(params)?;
    let choice = match role {
        Role::Farmer => Choice::Farmer,
        Role::Retailer => Choice::Retailer,
        Role::Joint => Choice::Both,
    };
    let gamma = (-params.rho * grid.dt).exp();
    let prob = Problem {
        params,
        mode,
        role,
        choice,
        opponent,
        spec: grid,
        states: (0..grid.states).map(|i| grid.state(i)).collect(),
        gamma,
        weight: -(-params.rho * grid.dt).exp_m1() / params.rho,
        slack: T::lit(1e-12) * (T::one() + grid.h_hi),
    };
    let n = grid.states;
    let mut v = vec![T::zero(); n];
    let mut idx = vec![(0usize, 0usize); n];
    let mut actions = vec![(T::zero(), T::zero()); n];
    let mut residual = T::infinity();
    let evaluations = 25;
    for sweep in 1..=grid.max_sweeps {
        let next: Vec<Greedy<T>> = (0..n).into_par_iter().map(|i| prob.greedy(&v, i, idx[i])).collect::<Result<_>>()?;
        residual = next.iter().zip(&v).map(|(g, b)| (g.value - *b).abs()).fold(T::zero(), T::max);
        for (i, g) in next.into_iter().enumerate() {
            v[i] = g.value;
            idx[i] = g.idx;
            actions[i] = g.action;
        }
        let scale = v.iter().fold(T::zero(), |m, x| m.max(x.abs()));
        if residual <= grid.tolerance * (T::one() + scale) {
            return Ok(tabulate(&prob, v, &actions, sweep, residual));
        }
        for _ in 0..evaluations {
            v = (0..n).into_par_iter().map(|i| prob.eval_fixed(&v, i, actions[i])).collect();
        }
    }
    Err(GameError::GridNoConvergence { sweeps: grid.max_sweeps, residual: residual.as_f64() })
}

fn tabulate<T: Scalar>(
    prob: &Problem<'_, T>,
    value: Vec<T>,
    actions: &[(T, T)],
    sweeps: usize,
    residual: T,
) -> BestResponse<T> {
    let (effort_f, effort_r) = prob.states.iter().zip(actions).map(|(&h, &(af, ar))| prob.efforts(h, af, ar)).unzip();
    BestResponse { role: prob.role, states: prob.states.clone(), value, effort_f, effort_r, sweeps, residual }
}

/// Grid check of one role.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoleCertificate<T> {
    pub role: Role,
    /// `sup |E_grid - E| / sup |E|` over the policy window, across the
    /// efforts this role controls.
    pub policy_deviation: T,
    /// `sup |V_grid - V| / sup |V|` over the value window.
    pub value_deviation: T,
    /// `|V_grid(H_d) - rate(H_d) / rho| / |rate(H_d) / rho|`.
    pub steady_value_gap: T,
    /// Residual sup-norm of a least-squares affine fit to the grid policy,
    /// relative to the policy range (joint control only).
    pub affine_fit_residual: Option<T>,
    pub sweeps: usize,
}

/// Sampled check that no perturbed leader rule pays off.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeaderCertificate<T> {
    pub samples: usize,
    /// Multiplicative perturbation half-width.
    pub spread: T,
    pub seed: u64,
    /// Samples whose follower response stayed finite along the path.
    pub feasible: usize,
    pub baseline_profit: T,
    /// Largest relative improvement over the baseline profit (may be negative).
    pub best_improvement: T,
    /// Samples improving by more than the tolerance.
    pub improving: usize,
    /// Always false: the rule space is sampled, not searched.
    pub exhaustive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificationReport<T> {
    pub mode: GameMode,
    pub grid: GridSpec<T>,
    /// Interval on which policies are compared.
    pub policy_window: (T, T),
    /// Interval on which values are compared.
    pub value_window: (T, T),
    pub roles: Vec<RoleCertificate<T>>,
    pub leader: Option<LeaderCertificate<T>>,
}

impl<T: Scalar> CertificationReport<T> {
    pub fn passed(&self) -> bool {
        let roles_ok = self.roles.iter().all(|r| {
            let value_ok = self.mode != GameMode::Centralized || r.value_deviation <= T::lit(VALUE_TOLERANCE);
            r.policy_deviation < T::lit(POLICY_TOLERANCE) && value_ok
        });
        let leader_ok = self.leader.as_ref().is_none_or(|l| l.improving == 0);
        roles_ok && leader_ok
    }
}

/// Perturbation sampling settings for the leader check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeaderSampling<T> {
    pub samples: usize,
    pub spread: T,
    pub seed: u64,
    pub horizon: T,
    pub step: T,
}

impl<T: Scalar> Default for LeaderSampling<T> {
    fn default() -> Self {
        Self { samples: 200, spread: T::lit(0.1), seed: 0x5eed_cafe, horizon: T::lit(40.0), step: T::lit(0.01) }
    }
}

/// Grid comparison of every role of `sol` and, in Stackelberg play, the
/// sampled leader check.
pub fn equilibrium_check<T: Scalar>(
    sol: &GameSolution<T>,
    params: &ModelParams<T>,
    grid: &GridSpec<T>,
) -> Result<CertificationReport<T>> {
    let hd = sol.steady_state;
    let policy_window = (T::half() * hd, T::lit(1.5) * hd);
    let value_window = match sol.mode {
        GameMode::Centralized => (T::lit(0.1) * grid.h_hi, T::lit(0.9) * grid.h_hi),
        _ => policy_window,
    };
    let responders: &[Role] = match sol.mode {
        GameMode::Decentralized => &[Role::Farmer, Role::Retailer],
        GameMode::Stackelberg => &[Role::Farmer],
        GameMode::Centralized => &[Role::Joint],
    };
    let mut roles = Vec::new();
    for &role in responders {
        let br = grid_best_response(params, sol.mode, role, &sol.policy, grid)?;
        roles.push(certify_role(sol, params, &br, policy_window, value_window)?);
    }
    let leader = match sol.mode {
        GameMode::Stackelberg => Some(leader_perturbation_check(sol, params, &LeaderSampling::default())?),
        _ => None,
    };
    Ok(CertificationReport { mode: sol.mode, grid: *grid, policy_window, value_window, roles, leader })
}

fn window_points<T: Scalar>(states: &[T], (lo, hi): (T, T)) -> Vec<usize> {
    let pts: Vec<usize> = (0..states.len()).filter(|&i| states[i] >= lo && states[i] <= hi).collect();
    if pts.is_empty() {
        (0..states.len()).collect()
    } else {
        pts
    }
}

/// `sup |a - b| / sup |b|`, or `sup |a|` when `b` vanishes.
fn relative_sup<T: Scalar>(pairs: impl Iterator<Item = (T, T)>) -> T {
    let (diff, scale) = pairs.fold((T::zero(), T::zero()), |(d, s), (a, b)| (d.max((a - b).abs()), s.max(b.abs())));
    if scale > T::zero() {
        diff / scale
    } else {
        diff
    }
}

fn certify_role<T: Scalar>(
    sol: &GameSolution<T>,
    params: &ModelParams<T>,
    br: &BestResponse<T>,
    policy_window: (T, T),
    value_window: (T, T),
) -> Result<RoleCertificate<T>> {
    let value = sol.value(br.role)?;
    let rules: Vec<(&[T], AffineRule<T>)> = match br.role {
        Role::Farmer => vec![(&br.effort_f, sol.policy.farmer)],
        Role::Retailer => vec![(&br.effort_r, sol.policy.retailer)],
        Role::Joint => vec![(&br.effort_f, sol.policy.farmer), (&br.effort_r, sol.policy.retailer)],
    };
    let pw = window_points(&br.states, policy_window);
    let policy_deviation = rules
        .iter()
        .map(|(grid, rule)| relative_sup(pw.iter().map(|&i| (grid[i], rule.eval(br.states[i])))))
        .fold(T::zero(), T::max);
    let vw = window_points(&br.states, value_window);
    let value_deviation = relative_sup(vw.iter().map(|&i| (br.value[i], value.eval(br.states[i]))));

    let hd = sol.steady_state;
    let c = sol.controls(hd);
    let steady = payoff_rates(sol.mode, hd, c.effort_f, c.effort_r, c.subsidy, params).rate(br.role) / params.rho;
    let steady_value_gap = relative_sup(std::iter::once((br.value_at(hd), steady)));

    let affine_fit_residual = (br.role == Role::Joint).then(|| {
        rules
            .iter()
            .map(|(grid, _)| affine_fit_residual(&pw.iter().map(|&i| (br.states[i], grid[i])).collect::<Vec<_>>()))
            .fold(T::zero(), T::max)
    });
    Ok(RoleCertificate {
        role: br.role,
        policy_deviation,
        value_deviation,
        steady_value_gap,
        affine_fit_residual,
        sweeps: br.sweeps,
    })
}

/// Sup-norm residual of the least-squares line through `pts`, relative to
/// the range of the ordinates.
fn affine_fit_residual<T: Scalar>(pts: &[(T, T)]) -> T {
    let n = T::lit(pts.len() as f64);
    let mx = pts.iter().map(|p| p.0).sum::<T>() / n;
    let my = pts.iter().map(|p| p.1).sum::<T>() / n;
    let sxx: T = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: T = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > T::zero() { sxy / sxx } else { T::zero() };
    let worst = pts.iter().map(|p| (p.1 - (my + slope * (p.0 - mx))).abs()).fold(T::zero(), T::max);
    let (lo, hi) = pts.iter().fold((T::infinity(), T::neg_infinity()), |(l, h), p| (l.min(p.1), h.max(p.1)));
    if hi > lo {
        worst / (hi - lo)
    } else {
        worst
    }
}

/// Leader rules replaced by perturbed ones; the follower best-responds
/// through its first-order condition with the equilibrium marginal value.
struct PerturbedLeader<T> {
    retailer: AffineRule<T>,
    subsidy: SubsidyRule<T>,
    farmer_value: QuadraticValue<T>,
    eta: T,
    mu_f: T,
    lambda_f: T,
}

impl<T: Scalar> ClosedLoop<T> for PerturbedLeader<T> {
    fn mode(&self) -> GameMode {
        GameMode::Stackelberg
    }

    fn controls(&self, h: T) -> Controls<T> {
        let x = self.subsidy.eval(h);
        let share = T::one() - x.unwrap_or(T::zero());
        let g = self.eta * h + self.mu_f * self.farmer_value.slope(h);
        let effort_f = if share > T::zero() { g / (share * self.lambda_f) } else { T::nan() };
        Controls { effort_f, effort_r: self.retailer.eval(h), subsidy: x }
    }
}

/// Perturbs the leader's effort and subsidy coefficients multiplicatively by
/// up to `spread` and compares the leader's simulated discounted profit.
pub fn leader_perturbation_check<T: Scalar>(
    sol: &GameSolution<T>,
    params: &ModelParams<T>,
    sampling: &LeaderSampling<T>,
) -> Result<LeaderCertificate<T>> {
    let (Some(subsidy), Some(farmer_value)) = (sol.policy.subsidy, sol.farmer) else {
        return Err(GameError::UnknownRole { role: "leader".into(), mode: sol.mode.to_string() });
    };
    let base = PerturbedLeader {
        retailer: sol.policy.retailer,
        subsidy,
        farmer_value,
        eta: params.derived().eta,
        mu_f: params.mu_f,
        lambda_f: params.lambda_f,
    };
    let cfg = SimConfig { horizon: sampling.horizon, step: sampling.step, integrator: Integrator::Rk4, h0: None };
    let profit = |lp: &PerturbedLeader<T>| -> Result<Option<T>> {
        let traj = integrate_trajectory(lp, &cfg, params)?;
        let j = discounted_profit(&traj, Role::Retailer, params)?;
        Ok(j.is_finite().then_some(j))
    };
    let baseline =
        profit(&base)?.ok_or_else(|| GameError::InvalidSim("equilibrium leader profit is not finite".into()))?;

    let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed);
    let spread = sampling.spread.as_f64();
    let factors: Vec<[T; 6]> =
        (0..sampling.samples).map(|_| std::array::from_fn(|_| T::lit(1.0 + rng.gen_range(-spread..=spread)))).collect();
    let outcomes: Vec<Option<T>> = factors
        .par_iter()
        .map(|f| {
            let r = base.retailer;
            let s = base.subsidy;
            let lp = PerturbedLeader {
                retailer: AffineRule::new(r.slope * f[0], r.intercept * f[1]),
                subsidy: SubsidyRule { n1: s.n1 * f[2], n0: s.n0 * f[3], d1: s.d1 * f[4], d0: s.d0 * f[5] },
                ..base
            };
            profit(&lp)
        })
        .collect::<Result<_>>()?;

    let denom = if baseline.abs() > T::zero() { baseline.abs() } else { T::one() };
    let gains: Vec<T> = outcomes.into_iter().flatten().map(|j| (j - baseline) / denom).collect();
    Ok(LeaderCertificate {
        samples: sampling.samples,
        spread: sampling.spread,
        seed: sampling.seed,
        feasible: gains.len(),
        baseline_profit: baseline,
        best_improvement: gains.iter().copied().fold(T::neg_infinity(), T::max),
        improving: gains.iter().filter(|g| **g > T::lit(LEADER_TOLERANCE)).count(),
        exhaustive: false,
    })
}
