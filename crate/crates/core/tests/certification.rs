use carbon_sink_game::oracle::{LEADER_TOLERANCE, POLICY_TOLERANCE, VALUE_TOLERANCE};
use carbon_sink_game::{
    equilibrium_check, grid_best_response, leader_perturbation_check, solve, GameError, GameMode, GameSolution64,
    GridSpec64, LeaderSampling, ModelParams64, Role, SolverConfig64,
};

fn baseline(mode: GameMode) -> (ModelParams64, GameSolution64) {
    let p = ModelParams64::baseline();
    let s = solve(mode, &p, &SolverConfig64::default()).unwrap();
    (p, s)
}

#[test]
fn zero_payoff_problem_has_zero_value_and_policy() {
    let mut p = ModelParams64::baseline();
    p.p_f = 0.0;
    p.p_r = 0.0;
    p.p_c = 0.0;
    let s = solve(GameMode::Decentralized, &p, &SolverConfig64::default()).unwrap();
    let grid = GridSpec64 { states: 64, actions: 65, ..GridSpec64::for_solution(&s, &p) };
    let br = grid_best_response(&p, GameMode::Decentralized, Role::Farmer, &s.policy, &grid).unwrap();
    assert!(br.value.iter().all(|v| *v == 0.0));
    assert!(br.effort_f.iter().all(|e| *e == 0.0));

    let rep = equilibrium_check(&s, &p, &grid).unwrap();
    for r in &rep.roles {
        assert_eq!(r.policy_deviation, 0.0);
        assert_eq!(r.value_deviation, 0.0);
    }
    assert!(rep.passed());
}

#[test]
fn decentralized_policies_are_best_responses() {
    let (p, s) = baseline(GameMode::Decentralized);
    let grid = GridSpec64::for_solution(&s, &p);
    let rep = equilibrium_check(&s, &p, &grid).unwrap();
    assert_eq!(rep.roles.len(), 2);
    for r in &rep.roles {
        assert!(r.policy_deviation < POLICY_TOLERANCE, "{:?}", r);
        assert!(r.steady_value_gap < VALUE_TOLERANCE, "{:?}", r);
    }
    assert!(rep.passed());

    // refining the grid tightens the certificate
    let fine = equilibrium_check(&s, &p, &grid.refined()).unwrap();
    for (c, f) in rep.roles.iter().zip(&fine.roles) {
        assert!(f.policy_deviation < c.policy_deviation, "{c:?} -> {f:?}");
    }
}

#[test]
fn stackelberg_follower_and_leader_checks() {
    let (p, s) = baseline(GameMode::Stackelberg);
    let rep = equilibrium_check(&s, &p, &GridSpec64::for_solution(&s, &p)).unwrap();
    assert_eq!(rep.roles.len(), 1);
    assert_eq!(rep.roles[0].role, Role::Farmer);
    assert!(rep.roles[0].policy_deviation < POLICY_TOLERANCE);
    let leader = rep.leader.as_ref().unwrap();
    assert_eq!(leader.samples, 200);
    assert!(!leader.exhaustive);
    assert_eq!(leader.improving, 0);
    assert!(leader.best_improvement < LEADER_TOLERANCE);
    assert!(rep.passed());
}

#[test]
fn leader_check_detects_a_suboptimal_leader() {
    // with its effort intercept halved, the leader can gain from perturbations
    let (p, mut s) = baseline(GameMode::Stackelberg);
    s.policy.retailer.intercept *= 0.5;
    let cert = leader_perturbation_check(&s, &p, &LeaderSampling { spread: 0.3, ..LeaderSampling::default() }).unwrap();
    assert!(cert.improving > 0, "{cert:?}");
}

#[test]
fn centralized_grid_value_matches_quadratic() {
    let (p, s) = baseline(GameMode::Centralized);
    let rep = equilibrium_check(&s, &p, &GridSpec64::for_solution(&s, &p)).unwrap();
    let joint = &rep.roles[0];
    assert_eq!(joint.role, Role::Joint);
    assert!(joint.value_deviation < VALUE_TOLERANCE, "{joint:?}");
    assert!(joint.policy_deviation < POLICY_TOLERANCE, "{joint:?}");
    assert!(joint.affine_fit_residual.unwrap() < 0.02, "{joint:?}");
    assert!(joint.steady_value_gap < VALUE_TOLERANCE, "{joint:?}");
    assert!(rep.passed());
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let (p, s) = baseline(GameMode::Decentralized);
    let grid = GridSpec64 { states: 128, actions: 65, ..GridSpec64::for_solution(&s, &p) };
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| grid_best_response(&p, GameMode::Decentralized, Role::Retailer, &s.policy, &grid).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn grid_errors() {
    let (p, s) = baseline(GameMode::Decentralized);
    let base = GridSpec64::for_solution(&s, &p);
    let bad = GridSpec64 { states: 10, ..base };
    assert!(matches!(
        grid_best_response(&p, GameMode::Decentralized, Role::Farmer, &s.policy, &bad),
        Err(GameError::InvalidGrid(_))
    ));
    let bad = GridSpec64 { dt: 1.5, ..base };
    assert!(matches!(
        grid_best_response(&p, GameMode::Decentralized, Role::Farmer, &s.policy, &bad),
        Err(GameError::InvalidGrid(_))
    ));
    // the retailer's effort alone pushes H above 1 whatever the farmer does
    let narrow = GridSpec64 { h_hi: 1.0, ..base };
    assert!(matches!(
        grid_best_response(&p, GameMode::Decentralized, Role::Farmer, &s.policy, &narrow),
        Err(GameError::LeftGrid { .. })
    ));
    let short = GridSpec64 { max_sweeps: 2, ..base };
    assert!(matches!(
        grid_best_response(&p, GameMode::Decentralized, Role::Farmer, &s.policy, &short),
        Err(GameError::GridNoConvergence { sweeps: 2, .. })
    ));
}
