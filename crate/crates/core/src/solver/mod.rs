//! Equilibrium coefficients, feedback rules, closed-loop drift and steady
//! state for each cooperation mode.
//!
//! Two backends are available. `Residual` solves the coefficient balances
//! collected from the substituted HJB equations (closed-form quadratics for
//! the decoupled modes, damped Newton on the coupled Stackelberg pair) and
//! verifies the result against the HJB equations directly. `PaperClosedForm`
//! evaluates the printed coefficient expressions as they stand, for
//! discrepancy reports.

mod centralized;
mod decentralized;
pub mod printed;
mod residual;
pub mod roots;
mod stackelberg;
pub mod system;

use serde::{Deserialize, Serialize};

pub use centralized::solve_centralized;
pub use decentralized::solve_decentralized;
pub use residual::{hjb_residual, max_hjb_residual, RoleResidual};
pub use roots::{select_stable_root, Candidate, Selection};
pub use stackelberg::solve_stackelberg;
pub use system::CoefficientSystem;

use crate::error::{GameError, Result};
use crate::model::{GameMode, ModelParams};
use crate::num::Scalar;
use crate::solution::{
    AffineRule, Backend, Diagnostics, FeedbackPolicy, FollowerConvention, GameSolution, QuadraticValue, SubsidyRule,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig<T> {
    pub backend: Backend,
    /// Bound on the normalised HJB residual `|rho V - max RHS| / (1 + |rho V|)`.
    pub tolerance: T,
    /// Bound on the relative residual of the collected coefficient equations.
    pub root_tolerance: T,
    pub convention: FollowerConvention,
    pub max_iterations: usize,
}

impl<T: Scalar> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            backend: Backend::Residual,
            tolerance: T::lit(1e-8),
            root_tolerance: T::lit(1e-12),
            convention: FollowerConvention::StandardCostShare,
            max_iterations: 200,
        }
    }
}

impl<T: Scalar> SolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > T::zero()) || !(self.root_tolerance > T::zero()) {
            return Err(GameError::InvalidSim("solver tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Solves one mode with the configured backend.
pub fn solve<T: Scalar>(mode: GameMode, params: &ModelParams<T>, cfg: &SolverConfig<T>) -> Result<GameSolution<T>> {
    match mode {
        GameMode::Decentralized => solve_decentralized(params, cfg),
        GameMode::Stackelberg => solve_stackelberg(params, cfg),
        GameMode::Centralized => solve_centralized(params, cfg),
    }
}

/// Rules implied by the decentralized first-order conditions.
pub(crate) fn decentralized_policy<T: Scalar>(p: &ModelParams<T>, a: T, b: T, m: T) -> FeedbackPolicy<T> {
    let eta = p.derived().eta;
    FeedbackPolicy {
        farmer: AffineRule::new((eta + T::two() * a * p.mu_f) / p.lambda_f, p.mu_f * b / p.lambda_f),
        retailer: AffineRule::new(T::zero(), p.mu_r * m / p.lambda_r),
        subsidy: None,
    }
}

/// Rules implied by the joint first-order conditions.
pub(crate) fn centralized_policy<T: Scalar>(p: &ModelParams<T>, a: T, b: T) -> FeedbackPolicy<T> {
    let eta = p.derived().eta;
    FeedbackPolicy {
        farmer: AffineRule::new((eta + T::two() * a * p.mu_f) / p.lambda_f, p.mu_f * b / p.lambda_f),
        retailer: AffineRule::new(T::two() * a * p.mu_r / p.lambda_r, p.mu_r * b / p.lambda_r),
        subsidy: None,
    }
}

/// Leader rules plus the follower's response under `convention`.
pub(crate) fn stackelberg_policy<T: Scalar>(
    p: &ModelParams<T>,
    [a, m, b, n]: [T; 4],
    convention: FollowerConvention,
) -> FeedbackPolicy<T> {
    let eta = p.derived().eta;
    let four = T::lit(4.0);
    let sink = eta / p.mu_f;
    let subsidy = SubsidyRule {
        n1: four * m - T::two() * a - sink,
        n0: T::two() * n - b,
        d1: four * m + T::two() * a + sink,
        d0: T::two() * n + b,
    };
    let farmer = match convention {
        // E_f = (eta H + mu_f V_f' + 2 mu_f V_r') / (2 lambda_f)
        FollowerConvention::StandardCostShare => {
            let k = p.mu_f / (T::two() * p.lambda_f);
            AffineRule::new(k * subsidy.d1, k * subsidy.d0)
        }
        FollowerConvention::PaperPrinted => {
            AffineRule::new((eta + T::two() * a * p.mu_f) / p.lambda_f, p.mu_f * b / p.lambda_f)
        }
    };
    FeedbackPolicy {
        farmer,
        retailer: AffineRule::new(T::two() * m * p.mu_r / p.lambda_r, p.mu_r * n / p.lambda_r),
        subsidy: Some(subsidy),
    }
}

/// Closed-loop drift `(alpha, beta)` of a policy.
pub(crate) fn drift_of<T: Scalar>(p: &ModelParams<T>, policy: &FeedbackPolicy<T>) -> (T, T) {
    let alpha = p.mu_f * policy.farmer.slope + p.mu_r * policy.retailer.slope - p.delta;
    let beta = p.mu_f * policy.farmer.intercept + p.mu_r * policy.retailer.intercept;
    (alpha, beta)
}

pub(crate) struct Assembly<T> {
    pub mode: GameMode,
    pub farmer: Option<QuadraticValue<T>>,
    pub retailer: Option<QuadraticValue<T>>,
    pub joint: Option<QuadraticValue<T>>,
    pub policy: FeedbackPolicy<T>,
    /// Unknowns in the order of the mode's coefficient system.
    pub unknowns: Vec<T>,
    pub diagnostics: Diagnostics<T>,
}

/// Derives drift and steady state, then runs the coefficient and HJB residual
/// checks and the operating-range flags.
pub(crate) fn finish<T: Scalar>(
    asm: Assembly<T>,
    params: &ModelParams<T>,
    cfg: &SolverConfig<T>,
) -> Result<GameSolution<T>> {
    let (alpha, beta) = drift_of(params, &asm.policy);
    if !(alpha < T::zero()) {
        return Err(GameError::UnstableModel {
            context: format!("{} closed loop", asm.mode),
            alphas: vec![alpha.as_f64()],
        });
    }
    let steady_state = if beta == T::zero() { T::zero() } else { -beta / alpha };
    let mut sol = GameSolution {
        mode: asm.mode,
        farmer: asm.farmer,
        retailer: asm.retailer,
        joint: asm.joint,
        policy: asm.policy,
        alpha,
        beta,
        steady_state,
        diagnostics: asm.diagnostics,
    };
    let convention =
        if asm.mode == GameMode::Stackelberg { cfg.convention } else { FollowerConvention::StandardCostShare };
    let system = CoefficientSystem::new(asm.mode, params, convention);
    sol.diagnostics.max_coefficient_residual = system.max_relative_residual(&asm.unknowns);
    sol.diagnostics.max_hjb_residual = max_hjb_residual(&sol, params, 100);
    sol.diagnostics.flags = sol.range_flags(sol.operating_max(params.h0));

    let consistent = cfg.backend == Backend::Residual && convention == FollowerConvention::StandardCostShare;
    if consistent && !(sol.diagnostics.max_hjb_residual <= cfg.tolerance) {
        return Err(GameError::NoConvergence {
            context: format!("{} HJB residual check", asm.mode),
            iterations: sol.diagnostics.iterations,
            residual: sol.diagnostics.max_hjb_residual.as_f64(),
        });
    }
    Ok(sol)
}
