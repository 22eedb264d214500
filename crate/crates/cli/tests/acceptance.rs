//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines always reach stdout. The
//! process fails when any criterion fails, except for the parts listed in
//! `UNATTAINABLE`. Those are still evaluated and printed as FAIL, but a
//! failure there does not fail the run. Every other part of such a
//! criterion must still pass.

use std::process::ExitCode;

use carbon_sink_cli::runner::{bisect_drift, Scenario};
use carbon_sink_cli::{run_compare, run_sweep, run_verify, Response, ScenarioConfig, SweepSpec};
use carbon_sink_game::{
    hjb_residual, solve, Backend, GameError, GameMode, GameSolution64, ModelParams64, Role, SolverConfig64,
};

/// Criteria whose failure is expected and explained in the decision log.
const UNATTAINABLE: &[u32] = &[2];

const HJB_TOL: f64 = 1e-8;
const DERIVED_TOL: f64 = 1e-3;
const PRINTED_TOL: f64 = 1e-6;

struct Outcome {
    passed: bool,
    /// The part of the criterion that must pass even when it is unattainable as a whole.
    required_ok: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: String) -> Self {
        Outcome { passed, required_ok: passed, detail }
    }
}

fn rel(got: f64, want: f64) -> f64 {
    ((got - want) / want).abs()
}

fn baseline(mode: GameMode) -> GameSolution64 {
    solve(mode, &ModelParams64::baseline(), &SolverConfig64::default()).expect("baseline solves")
}

/// Per-role normalised HJB residual over 100 points of `[0, 2 H_d]`.
fn residual_ok(sol: &GameSolution64, p: &ModelParams64) -> (bool, f64) {
    let top = 2.0 * sol.steady_state;
    let mut worst = 0.0_f64;
    let mut ok = true;
    for i in 0..100 {
        let h = top * i as f64 / 99.0;
        for r in hjb_residual(sol, p, h) {
            let bound = HJB_TOL * (1.0 + r.scale.abs());
            ok &= r.residual.abs() <= bound;
            worst = worst.max(r.residual.abs() / (1.0 + r.scale.abs()));
        }
    }
    (ok && worst.is_finite(), worst)
}

fn c1_hjb_residuals() -> Outcome {
    let p = ModelParams64::baseline();
    let mut ok = true;
    let mut parts = Vec::new();
    for mode in GameMode::ALL {
        let (pass, worst) = residual_ok(&baseline(mode), &p);
        ok &= pass;
        parts.push(format!("{mode} {worst:.1e}"));
    }
    Outcome::new(ok, format!("max normalised residual: {}", parts.join(", ")))
}

fn c2_coefficients() -> Outcome {
    let gd = baseline(GameMode::Decentralized);
    let gc = baseline(GameMode::Centralized);
    let (f, r, j) = (gd.farmer.unwrap(), gd.retailer.unwrap(), gc.joint.unwrap());
    let checks = [
        ("GD A", f.a, 1.5477),
        ("GD M", r.b, 1062.4),
        ("GD B", f.b, 1098.2),
        ("GD H_d", gd.steady_state, 7.778),
        ("GC A", j.a, 1.5504),
        ("GC B", j.b, 2163.5),
        ("GC H_d", gc.steady_state, 15.51),
    ];
    let worst = checks.iter().map(|(_, g, w)| rel(*g, *w)).fold(0.0, f64::max);
    let derived = worst <= DERIVED_TOL;

    let printed_cfg = SolverConfig64 { backend: Backend::PaperClosedForm, ..SolverConfig64::default() };
    let (printed, printed_detail) = match solve(GameMode::Centralized, &ModelParams64::baseline(), &printed_cfg) {
        Ok(s) => {
            let pj = s.joint.unwrap();
            let d = rel(pj.a, j.a).max(rel(pj.b, j.b));
            (d <= PRINTED_TOL, format!("printed centralized closed form deviates {d:.2e}"))
        }
        Err(GameError::ComplexRoot { discriminant, .. }) => {
            (false, format!("printed centralized closed form has a negative discriminant ({discriminant:.3e})"))
        }
        Err(e) => (false, format!("printed centralized closed form failed: {e}")),
    };
    Outcome {
        passed: derived && printed,
        required_ok: derived,
        detail: format!("derived values within {worst:.1e} relative; {printed_detail}"),
    }
}

fn c3_stability(cmp: &carbon_sink_cli::Comparison) -> Outcome {
    let mut ok = true;
    let mut worst = 0.0_f64;
    for cell in &cmp.cells {
        let Some(sol) = cell.solution() else {
            ok = false;
            continue;
        };
        ok &= sol.alpha < 0.0;
        match bisect_drift(sol, &cell.params) {
            Some(root) => worst = worst.max((root - sol.steady_state).abs()),
            None => ok = false,
        }
    }
    ok &= worst <= 1e-10;
    Outcome::new(ok, format!("{} solutions, alpha < 0, |H_d - bisection| <= {worst:.1e}", cmp.cells.len()))
}

fn steady(cmp: &carbon_sink_cli::Comparison, mode: GameMode, scenario: Scenario) -> &GameSolution64 {
    cmp.cell(mode, scenario).and_then(|c| c.solution()).expect("cell solved")
}

fn c4_orderings(cmp: &carbon_sink_cli::Comparison) -> Outcome {
    let [gd, gs, gc] = GameMode::ALL.map(|m| steady(cmp, m, Scenario::Configured));
    let hd = [gd, gs, gc].map(|s| s.steady_state);
    let joint = [gd, gs, gc].map(|s| s.value_at(Role::Joint, s.steady_state).unwrap());
    let ok = hd[2] > hd[1] && hd[1] > hd[0] && joint[2] > joint[1] && joint[1] > joint[0];
    Outcome::new(
        ok,
        format!(
            "H_d gc/gs/gd = {:.4}/{:.4}/{:.4}; joint value = {:.1}/{:.1}/{:.1}",
            hd[2], hd[1], hd[0], joint[2], joint[1], joint[0]
        ),
    )
}

fn c5_sink_dominance(cmp: &carbon_sink_cli::Comparison) -> Outcome {
    let mut ok = true;
    let mut tightest = f64::INFINITY;
    for mode in GameMode::ALL {
        let with = steady(cmp, mode, Scenario::Configured);
        let without = steady(cmp, mode, Scenario::NoSink);
        for role in with.roles() {
            let strict = matches!(role, Role::Farmer | Role::Joint);
            for h in [0.1, with.steady_state] {
                let gap = with.value_at(role, h).unwrap() - without.value_at(role, h).unwrap();
                ok &= if strict { gap > 0.0 } else { gap >= 0.0 };
                tightest = tightest.min(gap);
            }
        }
    }
    Outcome::new(ok, format!("smallest value gain from sink trading {tightest:.3}"))
}

fn c6_stackelberg(cmp: &carbon_sink_cli::Comparison) -> Outcome {
    let gd = steady(cmp, GameMode::Decentralized, Scenario::Configured);
    let gs = steady(cmp, GameMode::Stackelberg, Scenario::Configured);
    let at = |s: &GameSolution64, r| s.value_at(r, s.steady_state).unwrap();
    let (df, dr) = (at(gs, Role::Farmer) - at(gd, Role::Farmer), at(gs, Role::Retailer) - at(gd, Role::Retailer));
    let x = gs.policy.subsidy.and_then(|s| s.eval(gs.steady_state));
    let x_ok = match x {
        Some(x) if (0.0..1.0).contains(&x) => true,
        _ => gs.diagnostics.flags.iter().any(|f| f.contains("x_f")),
    };
    Outcome::new(df > 0.0 && dr > 0.0 && x_ok, format!("farmer +{df:.1}, retailer +{dr:.1}, x_f(H_d) = {x:?}"))
}

fn verify_group(report: &carbon_sink_cli::VerifyReport, suffixes: &[&str]) -> Outcome {
    let picked: Vec<_> = report.checks.iter().filter(|c| suffixes.iter().any(|s| c.name.ends_with(s))).collect();
    let ok = picked.len() == 3 * suffixes.len() && picked.iter().all(|c| c.passed);
    let detail = picked
        .iter()
        .map(|c| format!("{} {}", c.name, c.metric.map_or("-".into(), |m| format!("{m:.2e}"))))
        .collect::<Vec<_>>()
        .join(", ");
    Outcome::new(ok, detail)
}

fn c10_sensitivity(cfg: &ScenarioConfig) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (param, values) in
        [("mu_f", vec![1.0, 1.25, 1.5, 1.75, 2.0]), ("lambda_f", vec![300.0, 400.0, 500.0, 600.0, 700.0])]
    {
        let spec = SweepSpec { values, responses: vec![Response::EfAtHd], ..SweepSpec::linear(param, 0.0, 0.0, 0) };
        let table = run_sweep(&spec, cfg).expect("sweep runs");
        let col = |m: GameMode| -> Vec<Option<f64>> { table.rows_for(m).map(|r| r.responses[0]).collect() };
        let (gd, gs, gc) = (col(GameMode::Decentralized), col(GameMode::Stackelberg), col(GameMode::Centralized));
        let ordered = (0..gd.len()).all(|i| match (gd[i], gs[i], gc[i]) {
            (Some(d), Some(s), Some(c)) => c >= s && s >= d,
            _ => false,
        });
        ok &= ordered;
        parts.push(format!("{param} ordering {}", if ordered { "holds" } else { "broken" }));
    }
    let spec = SweepSpec {
        responses: vec![Response::EfAtHd],
        modes: vec![GameMode::Decentralized],
        ..SweepSpec::linear("p_c", 0.0, 5.0, 21)
    };
    let table = run_sweep(&spec, cfg).expect("sweep runs");
    let peak = table.peak(GameMode::Decentralized, Response::EfAtHd).unwrap();
    ok &= table.rows.len() == 21 && peak.argmax.is_some();
    parts.push(format!(
        "p_c sweep: {} rows ({} failed), argmax {:?}, interior peak {}",
        table.rows.len(),
        table.failed(),
        peak.argmax,
        if peak.interior { "observed" } else { "not observed" }
    ));
    Outcome::new(ok, parts.join("; "))
}

fn c11_negative_control() -> Outcome {
    let p = ModelParams64::baseline();
    let mut caught = 0;
    let mut total = 0;
    for mode in GameMode::ALL {
        let sol = baseline(mode);
        for role in sol.roles() {
            for k in 0..3 {
                let mut bad = sol.clone();
                let v = match role {
                    Role::Farmer => bad.farmer.as_mut(),
                    Role::Retailer => bad.retailer.as_mut(),
                    Role::Joint => bad.joint.as_mut(),
                }
                .unwrap();
                *[&mut v.a, &mut v.b, &mut v.c][k] += 0.1;
                total += 1;
                if !residual_ok(&bad, &p).0 {
                    caught += 1;
                }
            }
        }
    }
    Outcome::new(caught == total, format!("{caught} of {total} corrupted coefficients fail the residual check"))
}

type Criterion<'a> = (u32, &'static str, Box<dyn Fn() -> Outcome + 'a>);

fn main() -> ExitCode {
    let cfg = ScenarioConfig::default();
    let cmp = run_compare(&cfg).expect("compare runs");
    let verify = run_verify(&cfg).expect("verify runs");

    let criteria: Vec<Criterion> = vec![
        (1, "HJB residuals", Box::new(c1_hjb_residuals)),
        (2, "derived coefficient reproduction", Box::new(c2_coefficients)),
        (3, "stability and steady state", Box::new(|| c3_stability(&cmp))),
        (4, "mode orderings", Box::new(|| c4_orderings(&cmp))),
        (5, "sink-trading dominance", Box::new(|| c5_sink_dominance(&cmp))),
        (6, "Stackelberg over decentralized", Box::new(|| c6_stackelberg(&cmp))),
        (7, "value consistency", Box::new(|| verify_group(&verify, &["value consistency"]))),
        (8, "trajectory cross-check", Box::new(|| verify_group(&verify, &["trajectory cross-check", "rk4 order"]))),
        (9, "equilibrium certification", Box::new(|| verify_group(&verify, &["equilibrium certificate"]))),
        (10, "sensitivity checks", Box::new(|| c10_sensitivity(&cfg))),
        (11, "negative control", Box::new(c11_negative_control)),
    ];

    let mut passed = 0;
    let mut blocking = Vec::new();
    for (id, name, run) in &criteria {
        let o = run();
        println!("{} criterion {id:>2} {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        if o.passed {
            passed += 1;
        } else if !UNATTAINABLE.contains(id) || !o.required_ok {
            blocking.push(*id);
        }
    }
    println!("acceptance: {passed} of {} criteria passed", criteria.len());
    if blocking.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {blocking:?}");
        ExitCode::FAILURE
    }
}
