use super::roots::{quadratic_roots, select_stable_root, Candidate};
use super::{decentralized_policy, finish, printed, Assembly, SolverConfig};
use crate::error::Result;
use crate::model::{GameMode, ModelParams, Role};
use crate::num::Scalar;
use crate::solution::{Backend, Diagnostics, FollowerConvention, GameSolution, QuadraticValue};

/// Feedback Nash equilibrium with a quadratic farmer value and a linear
/// retailer value.
pub fn solve_decentralized<T: Scalar>(params: &ModelParams<T>, cfg: &SolverConfig<T>) -> Result<GameSolution<T>> {
    cfg.validate()?;
    let p = params.validate()?;
    match cfg.backend {
        Backend::Residual => residual(&p, cfg),
        Backend::PaperClosedForm => printed::decentralized(&p, cfg),
    }
}

fn residual<T: Scalar>(p: &ModelParams<T>, cfg: &SolverConfig<T>) -> Result<GameSolution<T>> {
    let k = p.derived();
    let mut diag = Diagnostics::new(Backend::Residual, FollowerConvention::StandardCostShare);

    // H^2 balance: c2 A^2 + c1 A + c0 = 0
    let c2 = T::two() * p.mu_f * p.mu_f / p.lambda_f;
    let c1 = T::two() * (p.mu_f * k.eta / p.lambda_f - p.delta) - p.rho;
    let c0 = k.eta * k.eta / (T::two() * p.lambda_f);
    let (lo, hi, disc) = quadratic_roots(c2, c1, c0, "decentralized farmer H^2 balance")?;
    diag.discriminants.push(("farmer_quadratic".into(), disc));
    diag.discriminants.push(("printed_delta_gd".into(), printed::delta_gd(p)));

    let alpha_of = |a: T| (p.mu_f * k.eta + T::two() * a * p.mu_f * p.mu_f) / p.lambda_f - p.delta;
    let cands: Vec<_> =
        [lo, hi].into_iter().map(|a| Candidate { coefficients: a, alpha: alpha_of(a), size: a.abs() }).collect();
    diag.candidate_alphas = cands.iter().map(|c| c.alpha).collect();
    let sel = select_stable_root(&cands, "decentralized farmer H^2 balance")?;
    diag.ambiguous_root = sel.ambiguous && lo != hi;
    diag.root_branch = if sel.index == 0 { "minus-sqrt".into() } else { "plus-sqrt".into() };

    let a = sel.chosen.coefficients;
    let alpha = sel.chosen.alpha;
    let denom = p.rho - alpha;
    let m = p.p_r * k.k2 / denom;
    let b = ((p.p_f + p.p_c) * k.k1 + T::two() * a * m * p.mu_r * p.mu_r / p.lambda_r) / denom;
    let c = (p.mu_f * p.mu_f * b * b / (T::two() * p.lambda_f) + b * p.mu_r * p.mu_r * m / p.lambda_r) / p.rho;
    let n = (p.mu_r * p.mu_r * m * m / (T::two() * p.lambda_r) + m * p.mu_f * p.mu_f * b / p.lambda_f) / p.rho;

    finish(
        Assembly {
            mode: GameMode::Decentralized,
            farmer: Some(QuadraticValue::new(Role::Farmer, a, b, c)),
            retailer: Some(QuadraticValue::new(Role::Retailer, T::zero(), m, n)),
            joint: None,
            policy: decentralized_policy(p, a, b, m),
            unknowns: vec![a, m, b, c, n],
            diagnostics: diag,
        },
        p,
        cfg,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve(p: &ModelParams<f64>) -> GameSolution<f64> {
        solve_decentralized(p, &SolverConfig::default()).unwrap()
    }

    #[test]
    fn zero_payoffs_give_zero_solution() {
        let mut p = ModelParams::<f64>::baseline();
        p.p_f = 0.0;
        p.p_r = 0.0;
        p.p_c = 0.0;
        let s = solve(&p);
        let f = s.farmer.unwrap();
        let r = s.retailer.unwrap();
        assert_eq!((f.a, f.b, f.c, r.b, r.c), (0.0, 0.0, 0.0, 0.0, 0.0));
        assert_eq!(s.steady_state, 0.0);
        assert_eq!(s.policy.farmer.eval(3.0), 0.0);
        assert_eq!(s.policy.retailer.eval(3.0), 0.0);
    }

    #[test]
    fn retailer_without_revenue_exerts_no_effort() {
        let mut p = ModelParams::<f64>::baseline();
        p.p_r = 0.0;
        let s = solve(&p);
        assert_eq!(s.retailer.unwrap().b, 0.0);
        assert_eq!(s.policy.retailer.eval(5.0), 0.0);
    }

    #[test]
    fn retailer_value_is_linear() {
        let s = solve(&ModelParams::baseline());
        assert_eq!(s.retailer.unwrap().a, 0.0);
        assert!(s.alpha < 0.0);
        assert_eq!(s.diagnostics.root_branch, "minus-sqrt");
        assert!(s.diagnostics.flags.is_empty(), "{:?}", s.diagnostics.flags);
        assert!(s.diagnostics.max_coefficient_residual < 1e-12);
    }

    #[test]
    fn unstable_parameters_are_rejected() {
        let mut p = ModelParams::<f64>::baseline();
        p.p_c = 1.75;
        assert!(matches!(
            solve_decentralized(&p, &SolverConfig::default()),
            Err(crate::GameError::UnstableModel { .. })
        ));
        p.p_c = 3.0;
        assert!(matches!(solve_decentralized(&p, &SolverConfig::default()), Err(crate::GameError::ComplexRoot { .. })));
    }
}
