//! Experiment drivers behind the `compare`, `sweep` and `verify` commands.
//!
//! Cells and sweep rows run in parallel on a pool of the configured size;
//! results are collected in input order, so output never depends on the
//! schedule.

use carbon_sink_game::oracle::POLICY_TOLERANCE;
use carbon_sink_game::{
    discounted_profit, equilibrium_check, exact_trajectory, integrate_trajectory, max_hjb_residual, simulate, solve,
    CertificationReport, ClosedLoop, GameError, GameMode, GameSolution64, GridSpec64, Integrator, ModelParams64, Role,
    SimConfig64, Trajectory64,
};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, Response, ScenarioConfig, SweepSpec};

/// Relative tolerance of the quadrature-versus-value comparison.
pub const VALUE_CONSISTENCY_TOLERANCE: f64 = 1e-3;
/// Sup-norm bound between the exact and RK4 paths.
pub const CROSS_CHECK_TOLERANCE: f64 = 1e-6;
/// Minimum error reduction of RK4 under step halving.
pub const ORDER_RATIO: f64 = 8.0;
/// Absolute agreement between `-beta/alpha` and the bisected drift root.
pub const STEADY_STATE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("cannot build worker pool: {0}")]
    Pool(String),
}

/// Runs `f` on a pool with `workers` threads, or on the global pool.
pub fn with_workers<R: Send>(workers: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R, RunError> {
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool =
                rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| RunError::Pool(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// One response quantity of a solved mode; `None` where the mode has no
/// such role.
pub fn response(sol: &GameSolution64, r: Response) -> Option<f64> {
    let hd = sol.steady_state;
    match r {
        Response::EfAtHd => Some(sol.policy.farmer.eval(hd)),
        Response::ErAtHd => Some(sol.policy.retailer.eval(hd)),
        Response::Hd => Some(hd),
        Response::FarmerValueAtHd => sol.value_at(Role::Farmer, hd).ok(),
        Response::RetailerValueAtHd => sol.value_at(Role::Retailer, hd).ok(),
        Response::TotalValueAtHd => sol.value_at(Role::Joint, hd).ok(),
    }
}

pub type ModeSolution = (GameMode, Result<GameSolution64, GameError>);

/// Solves every configured mode with the effective parameters.
pub fn solve_modes(cfg: &ScenarioConfig) -> Result<Vec<ModeSolution>, RunError> {
    let params = cfg.effective_params();
    with_workers(cfg.workers, || cfg.modes.par_iter().map(|&m| (m, solve(m, &params, &cfg.solver))).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Sink price as configured.
    Configured,
    /// Sink price forced to zero.
    NoSink,
}

impl Scenario {
    pub fn label(self) -> &'static str {
        match self {
            Scenario::Configured => "configured",
            Scenario::NoSink => "pc0",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellResult {
    pub solution: GameSolution64,
    pub trajectory: Trajectory64,
    /// Discounted profit by quadrature along the trajectory, per role.
    pub profits: Vec<(Role, Option<f64>)>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub mode: GameMode,
    pub scenario: Scenario,
    pub params: ModelParams64,
    pub h0: f64,
    pub outcome: Result<CellResult, String>,
}

impl Cell {
    pub fn sink_trading(&self) -> bool {
        self.params.p_c > 0.0
    }

    pub fn name(&self) -> String {
        format!("{}_{}", self.mode.code(), self.scenario.label())
    }

    pub fn solution(&self) -> Option<&GameSolution64> {
        self.outcome.as_ref().ok().map(|r| &r.solution)
    }
}

fn profit_roles(mode: GameMode) -> [Role; 3] {
    match mode {
        GameMode::Centralized => [Role::Joint; 3],
        _ => [Role::Farmer, Role::Retailer, Role::Joint],
    }
}

fn run_cell(mode: GameMode, scenario: Scenario, params: ModelParams64, cfg: &ScenarioConfig) -> Cell {
    let h0 = cfg.sim.initial(&params);
    let outcome = solve(mode, &params, &cfg.solver).map_err(|e| e.to_string()).and_then(|solution| {
        let trajectory = simulate(&solution, &cfg.sim, &params).map_err(|e| e.to_string())?;
        let mut notes = Vec::new();
        let mut profits = Vec::new();
        for role in profit_roles(mode) {
            if profits.iter().any(|(r, _)| *r == role) {
                continue;
            }
            match discounted_profit(&trajectory, role, &params) {
                Ok(v) => profits.push((role, Some(v))),
                Err(e) => {
                    notes.push(format!("{role} profit: {e}"));
                    profits.push((role, None));
                }
            }
        }
        Ok(CellResult { solution, trajectory, profits, notes })
    });
    Cell { mode, scenario, params, h0, outcome }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub cells: Vec<Cell>,
}

impl Comparison {
    pub fn cell(&self, mode: GameMode, scenario: Scenario) -> Option<&Cell> {
        self.cells.iter().find(|c| c.mode == mode && c.scenario == scenario)
    }

    pub fn failed(&self) -> usize {
        self.cells.iter().filter(|c| c.outcome.is_err()).count()
    }
}

/// Every selected mode with the sink price as configured and with `p_c = 0`.
pub fn run_compare(cfg: &ScenarioConfig) -> Result<Comparison, RunError> {
    cfg.validate()?;
    let base = cfg.effective_params();
    let jobs: Vec<(GameMode, Scenario, ModelParams64)> = cfg
        .modes
        .iter()
        .flat_map(|&m| [(m, Scenario::Configured, base), (m, Scenario::NoSink, base.without_sink_trading())])
        .collect();
    let cells = with_workers(cfg.workers, || jobs.par_iter().map(|&(m, s, p)| run_cell(m, s, p, cfg)).collect())?;
    Ok(Comparison { cells })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub mode: GameMode,
    pub value: f64,
    /// `ok`, or the reason the point failed.
    pub status: String,
    pub responses: Vec<Option<f64>>,
}

/// Location of the largest value of one response within one mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Peak {
    pub mode: GameMode,
    pub response: Response,
    pub argmax: Option<f64>,
    pub maximum: Option<f64>,
    /// True when both neighbours of the argmax were solved and are strictly
    /// smaller, i.e. an interior maximum was observed.
    pub interior: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub parameter: String,
    pub responses: Vec<Response>,
    pub rows: Vec<SweepRow>,
    pub peaks: Vec<Peak>,
}

impl SweepTable {
    pub fn rows_for(&self, mode: GameMode) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.mode == mode)
    }

    pub fn peak(&self, mode: GameMode, response: Response) -> Option<&Peak> {
        self.peaks.iter().find(|p| p.mode == mode && p.response == response)
    }

    pub fn failed(&self) -> usize {
        self.rows.iter().filter(|r| r.status != "ok").count()
    }
}

fn find_peak(rows: &[&SweepRow], k: usize, mode: GameMode, response: Response) -> Peak {
    let mut sorted: Vec<&SweepRow> = rows.to_vec();
    sorted.sort_by(|a, b| a.value.total_cmp(&b.value));
    let at = |i: usize| sorted[i].responses[k];
    let best = (0..sorted.len()).filter_map(|i| at(i).map(|v| (i, v))).fold(
        None,
        |acc: Option<(usize, f64)>, (i, v)| match acc {
            Some((_, bv)) if bv >= v => acc,
            _ => Some((i, v)),
        },
    );
    let interior = best.is_some_and(|(i, v)| {
        i > 0 && i + 1 < sorted.len() && at(i - 1).is_some_and(|l| l < v) && at(i + 1).is_some_and(|r| r < v)
    });
    Peak { mode, response, argmax: best.map(|(i, _)| sorted[i].value), maximum: best.map(|(_, v)| v), interior }
}

/// One row per (mode, value), modes outermost, values in the given order.
pub fn run_sweep(spec: &SweepSpec, cfg: &ScenarioConfig) -> Result<SweepTable, RunError> {
    spec.validate()?;
    let jobs: Vec<(GameMode, f64)> =
        spec.modes.iter().flat_map(|&m| spec.values.iter().map(move |&v| (m, v))).collect();
    let rows: Vec<SweepRow> = with_workers(cfg.workers, || {
        jobs.par_iter()
            .map(|&(mode, value)| {
                let mut params = cfg.params;
                params.set(&spec.parameter, value);
                if !cfg.sink_trading {
                    params = params.without_sink_trading();
                }
                match solve(mode, &params, &cfg.solver) {
                    Ok(sol) => SweepRow {
                        mode,
                        value,
                        status: "ok".into(),
                        responses: spec.responses.iter().map(|&r| response(&sol, r)).collect(),
                    },
                    Err(e) => {
                        SweepRow { mode, value, status: e.to_string(), responses: vec![None; spec.responses.len()] }
                    }
                }
            })
            .collect()
    })?;
    let mut peaks = Vec::new();
    for &mode in &spec.modes {
        let mine: Vec<&SweepRow> = rows.iter().filter(|r| r.mode == mode).collect();
        for (k, &r) in spec.responses.iter().enumerate() {
            peaks.push(find_peak(&mine, k, mode, r));
        }
    }
    Ok(SweepTable { parameter: spec.parameter.clone(), responses: spec.responses.clone(), rows, peaks })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub metric: Option<f64>,
    pub threshold: Option<f64>,
    pub detail: String,
}

impl Check {
    fn bound(name: String, metric: f64, threshold: f64, detail: String) -> Self {
        Check { name, passed: metric <= threshold, metric: Some(metric), threshold: Some(threshold), detail }
    }

    fn failed(name: String, detail: String) -> Self {
        Check { name, passed: false, metric: None, threshold: None, detail }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub certificates: Vec<CertificationReport<f64>>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }
}

/// Root of the closed-loop drift by bisection on an expanding bracket.
pub fn bisect_drift(sol: &GameSolution64, params: &ModelParams64) -> Option<f64> {
    let f = |h: f64| sol.drift(params, h);
    if f(0.0) == 0.0 {
        return Some(0.0);
    }
    let mut w = 1.0;
    while f(-w).signum() == f(w).signum() {
        w *= 2.0;
        if w > 1e12 {
            return None;
        }
    }
    let (mut lo, mut hi) = (-w, w);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) == 0.0 {
            return Some(mid);
        }
        if f(mid).signum() == f(lo).signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn rel_err(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}

/// Residual scan, stability, value consistency, trajectory cross-check, RK4
/// order and the grid certificate for one solution.
pub fn verify_solution(
    sol: &GameSolution64,
    params: &ModelParams64,
    sim: &SimConfig64,
    tolerance: f64,
) -> (Vec<Check>, Option<CertificationReport<f64>>) {
    let m = sol.mode;
    let mut checks = Vec::new();

    let r = max_hjb_residual(sol, params, 100);
    checks.push(Check::bound(format!("{m} hjb residual"), r, tolerance, "101 samples on [0, 2 H_d]".into()));

    match bisect_drift(sol, params) {
        Some(root) if sol.alpha < 0.0 => {
            let gap = (root - sol.steady_state).abs();
            checks.push(Check::bound(
                format!("{m} steady state"),
                gap,
                STEADY_STATE_TOLERANCE,
                format!("alpha = {}, H_d = {}, bisection = {root}", sol.alpha, sol.steady_state),
            ));
        }
        _ => checks.push(Check::failed(format!("{m} steady state"), format!("alpha = {} is not negative", sol.alpha))),
    }

    let exact_cfg = SimConfig64 { integrator: Integrator::Exact, ..*sim };
    let rk_cfg = SimConfig64 { integrator: Integrator::Rk4, ..*sim };
    match (exact_trajectory(sol, &exact_cfg, params), integrate_trajectory(sol, &rk_cfg, params)) {
        (Ok(exact), Ok(rk)) => {
            let h0 = sim.initial(params);
            let mut worst = 0.0_f64;
            let mut detail = Vec::new();
            let mut error = None;
            for role in sol.roles() {
                match (discounted_profit(&exact, role, params), sol.value_at(role, h0)) {
                    (Ok(got), Ok(want)) => {
                        worst = worst.max(rel_err(got, want));
                        detail.push(format!("{role}: {got} vs {want}"));
                    }
                    (Err(e), _) | (_, Err(e)) => error = Some(e.to_string()),
                }
            }
            checks.push(match error {
                Some(e) => Check::failed(format!("{m} value consistency"), e),
                None => Check::bound(
                    format!("{m} value consistency"),
                    worst,
                    VALUE_CONSISTENCY_TOLERANCE,
                    detail.join("; "),
                ),
            });
            checks.push(Check::bound(
                format!("{m} trajectory cross-check"),
                sup_diff(&exact.h, &rk.h),
                CROSS_CHECK_TOLERANCE,
                format!("exact vs rk4, step {}", sim.step),
            ));
        }
        (Err(e), _) | (_, Err(e)) => {
            checks.push(Check::failed(format!("{m} value consistency"), e.to_string()));
            checks.push(Check::failed(format!("{m} trajectory cross-check"), e.to_string()));
        }
    }
    checks.push(order_check(sol, params, sim));

    let grid = GridSpec64::for_solution(sol, params);
    let cert = match equilibrium_check(sol, params, &grid) {
        Ok(rep) => {
            let worst = rep.roles.iter().map(|r| r.policy_deviation).fold(0.0, f64::max);
            let mut detail: Vec<String> = rep
                .roles
                .iter()
                .map(|r| format!("{}: policy {:.3e}, value {:.3e}", r.role, r.policy_deviation, r.value_deviation))
                .collect();
            if let Some(l) = &rep.leader {
                detail.push(format!(
                    "leader: {} of {} samples improve, best {:.3e}",
                    l.improving, l.samples, l.best_improvement
                ));
            }
            checks.push(Check {
                name: format!("{m} equilibrium certificate"),
                passed: rep.passed(),
                metric: Some(worst),
                threshold: Some(POLICY_TOLERANCE),
                detail: detail.join("; "),
            });
            Some(rep)
        }
        Err(e) => {
            checks.push(Check::failed(format!("{m} equilibrium certificate"), e.to_string()));
            None
        }
    };
    (checks, cert)
}

/// RK4 error ratio under halving from coarse steps, where truncation rather
/// than round-off dominates.
fn order_check(sol: &GameSolution64, params: &ModelParams64, sim: &SimConfig64) -> Check {
    let name = format!("{} rk4 order", sol.mode);
    let err = |step: f64| -> Result<f64, GameError> {
        let cfg = SimConfig64 { horizon: 40.0, step, integrator: Integrator::Rk4, h0: sim.h0 };
        Ok(sup_diff(&exact_trajectory(sol, &cfg, params)?.h, &integrate_trajectory(sol, &cfg, params)?.h))
    };
    match (err(0.4), err(0.2)) {
        (Ok(c), Ok(_)) if c <= 1e-13 => Check {
            name,
            passed: true,
            metric: None,
            threshold: Some(ORDER_RATIO),
            detail: format!("errors at round-off ({c:e})"),
        },
        (Ok(c), Ok(f)) => Check {
            name,
            passed: c / f >= ORDER_RATIO,
            metric: Some(c / f),
            threshold: Some(ORDER_RATIO),
            detail: format!("sup error {c:e} at step 0.4, {f:e} at step 0.2"),
        },
        (Err(e), _) | (_, Err(e)) => Check::failed(name, e.to_string()),
    }
}

/// Solves every selected mode and runs [`verify_solution`] on each.
pub fn run_verify(cfg: &ScenarioConfig) -> Result<VerifyReport, RunError> {
    cfg.validate()?;
    let params = cfg.effective_params();
    let per_mode: Vec<(Vec<Check>, Option<CertificationReport<f64>>)> = with_workers(cfg.workers, || {
        cfg.modes
            .par_iter()
            .map(|&m| match solve(m, &params, &cfg.solver) {
                Ok(sol) => verify_solution(&sol, &params, &cfg.sim, cfg.solver.tolerance),
                Err(e) => (vec![Check::failed(format!("{m} solve"), e.to_string())], None),
            })
            .collect()
    })?;
    let mut report = VerifyReport { checks: Vec::new(), certificates: Vec::new() };
    for (checks, cert) in per_mode {
        report.checks.extend(checks);
        report.certificates.extend(cert);
    }
    Ok(report)
}
