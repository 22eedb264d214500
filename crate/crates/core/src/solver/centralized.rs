use super::roots::{quadratic_roots, select_stable_root, Candidate};
use super::{centralized_policy, finish, printed, Assembly, SolverConfig};
use crate::error::Result;
use crate::model::{GameMode, ModelParams, Role};
use crate::num::Scalar;
use crate::solution::{Backend, Diagnostics, FollowerConvention, GameSolution, QuadraticValue};

/// Joint maximisation of total supply-chain profit.
pub fn solve_centralized<T: Scalar>(params: &ModelParams<T>, cfg: &SolverConfig<T>) -> Result<GameSolution<T>> {
    cfg.validate()?;
    let p = params.validate()?;
    match cfg.backend {
        Backend::Residual => residual(&p, cfg),
        Backend::PaperClosedForm => printed::centralized(&p, cfg),
    }
}

fn residual<T: Scalar>(p: &ModelParams<T>, cfg: &SolverConfig<T>) -> Result<GameSolution<T>> {
    let k = p.derived();
    let mut diag = Diagnostics::new(Backend::Residual, FollowerConvention::StandardCostShare);
    let reach = p.mu_f * p.mu_f / p.lambda_f + p.mu_r * p.mu_r / p.lambda_r;

    let c2 = T::two() * reach;
    let c1 = T::two() * (p.mu_f * k.eta / p.lambda_f - p.delta) - p.rho;
    let c0 = k.eta * k.eta / (T::two() * p.lambda_f);
    let (lo, hi, disc) = quadratic_roots(c2, c1, c0, "centralized H^2 balance")?;
    diag.discriminants.push(("joint_quadratic".into(), disc));
    diag.discriminants.push(("printed_delta_gc".into(), printed::delta_gc(p)));

    let alpha_of = |a: T| p.mu_f * k.eta / p.lambda_f + T::two() * a * reach - p.delta;
    let cands: Vec<_> =
        [lo, hi].into_iter().map(|a| Candidate { coefficients: a, alpha: alpha_of(a), size: a.abs() }).collect();
    diag.candidate_alphas = cands.iter().map(|c| c.alpha).collect();
    let sel = select_stable_root(&cands, "centralized H^2 balance")?;
    diag.ambiguous_root = sel.ambiguous && lo != hi;
    diag.root_branch = if sel.index == 0 { "minus-sqrt".into() } else { "plus-sqrt".into() };

    let a = sel.chosen.coefficients;
    let b = ((p.p_f + p.p_c) * k.k1 + p.p_r * k.k2) / (p.rho - sel.chosen.alpha);
    let c = b * b * reach / (T::two() * p.rho);

    finish(
        Assembly {
            mode: GameMode::Centralized,
            farmer: None,
            retailer: None,
            joint: Some(QuadraticValue::new(Role::Joint, a, b, c)),
            policy: centralized_policy(p, a, b),
            unknowns: vec![a, b, c],
            diagnostics: diag,
        },
        p,
        cfg,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_payoffs_give_zero_solution() {
        let mut p = ModelParams::<f64>::baseline();
        p.p_f = 0.0;
        p.p_r = 0.0;
        p.p_c = 0.0;
        let s = solve_centralized(&p, &SolverConfig::default()).unwrap();
        let v = s.joint.unwrap();
        assert_eq!((v.a, v.b, v.c), (0.0, 0.0, 0.0));
        assert_eq!(s.steady_state, 0.0);
    }

    #[test]
    fn symmetric_players_differ_by_sink_term() {
        let mut p = ModelParams::<f64>::baseline();
        p.mu_r = p.mu_f;
        p.lambda_r = p.lambda_f;
        let s = solve_centralized(&p, &SolverConfig::default()).unwrap();
        let eta = p.derived().eta;
        for h in [0.0, 1.0, 7.5, 20.0] {
            let gap = s.policy.farmer.eval(h) - s.policy.retailer.eval(h);
            assert!((gap - eta * h / p.lambda_f).abs() < 1e-12);
        }
    }

    #[test]
    fn per_role_values_do_not_exist() {
        let s = solve_centralized(&ModelParams::<f64>::baseline(), &SolverConfig::default()).unwrap();
        assert!(s.value(Role::Farmer).is_err());
        assert!(s.value(Role::Joint).is_ok());
    }
}
