use std::fs;
use std::path::Path;
use std::process::Command;

use carbon_sink_cli::emit::{self, SUMMARY_HEADER};
use carbon_sink_cli::runner::Scenario;
use carbon_sink_cli::{run_compare, run_sweep, run_verify, verify_solution, Response, ScenarioConfig, SweepSpec};
use carbon_sink_game::{solve, GameMode, ModelParams64, SolverConfig64};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_carbon-sink"))
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

#[test]
fn identical_runs_write_identical_tables() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for (dir, workers) in [(&a, "1"), (&b, "4")] {
        let st = bin().args(["compare", "--workers", workers, "--out"]).arg(dir.path()).output().unwrap();
        assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    }
    let (ta, tb) = (csv_files(a.path()), csv_files(b.path()));
    assert_eq!(ta.len(), 7);
    assert_eq!(ta, tb);

    let report: serde_json::Value = serde_json::from_slice(&fs::read(a.path().join("report.json")).unwrap()).unwrap();
    assert!(report["generated_at_unix"].as_u64().is_some());
    assert_eq!(report["flagged"], 0);
    assert_eq!(report["tables"].as_array().unwrap().len(), 7);
    assert_eq!(report["config"]["params"]["h0"], 0.1);
}

#[test]
fn toggle_matches_zero_sink_price() {
    let off = ScenarioConfig { sink_trading: false, ..ScenarioConfig::default() };
    let zero: ScenarioConfig = "p_c = 0".parse().unwrap();
    let (a, b) = (run_compare(&off).unwrap(), run_compare(&zero).unwrap());
    let (ea, eb) = (emit::comparison_artifacts(&a).unwrap(), emit::comparison_artifacts(&b).unwrap());
    assert_eq!(ea, eb);

    // within one config the two cells of a mode differ only through eta
    let cmp = run_compare(&ScenarioConfig { modes: vec![GameMode::Stackelberg], ..ScenarioConfig::default() }).unwrap();
    let (with, without) = (
        cmp.cell(GameMode::Stackelberg, Scenario::Configured).unwrap(),
        cmp.cell(GameMode::Stackelberg, Scenario::NoSink).unwrap(),
    );
    assert_eq!(with.params.without_sink_trading(), without.params);
    assert!(with.params.derived().eta > 0.0);
    assert_eq!(without.params.derived().eta, 0.0);
}

#[test]
fn sweep_at_baseline_reproduces_compare() {
    let cfg = ScenarioConfig::default();
    let cmp = run_compare(&cfg).unwrap();
    let summary = String::from_utf8(emit::summary_table(&cmp).unwrap().bytes).unwrap();
    let spec = SweepSpec { values: vec![0.5], ..SweepSpec::linear("p_c", 0.0, 0.0, 0) };
    let sweep = run_sweep(&spec, &cfg).unwrap();
    let sweep_csv = String::from_utf8(emit::sweep_table(&sweep).unwrap().bytes).unwrap();

    let col = |name: &str| SUMMARY_HEADER.iter().position(|h| *h == name).unwrap();
    let pairs = [
        (Response::EfAtHd, "E_f"),
        (Response::ErAtHd, "E_r"),
        (Response::Hd, "H_d"),
        (Response::FarmerValueAtHd, "V_f_Hd"),
        (Response::RetailerValueAtHd, "V_r_Hd"),
        (Response::TotalValueAtHd, "V_total_Hd"),
    ];
    for mode in GameMode::ALL {
        let s: Vec<&str> = summary
            .lines()
            .find(|l| l.starts_with(&format!("{},configured,", mode.code())))
            .unwrap()
            .split(',')
            .collect();
        let w: Vec<&str> = sweep_csv.lines().find(|l| l.starts_with(mode.code())).unwrap().split(',').collect();
        assert_eq!(w[2], "ok");
        for (k, (r, name)) in pairs.iter().enumerate() {
            assert_eq!(spec.responses[k], *r);
            assert_eq!(w[3 + k], s[col(name)], "{mode} {name}");
        }
    }
}

#[test]
fn sweep_keeps_failed_points_in_order() {
    let cfg = ScenarioConfig { workers: Some(3), ..ScenarioConfig::default() };
    let spec = SweepSpec {
        modes: vec![GameMode::Decentralized, GameMode::Centralized],
        responses: vec![Response::Hd],
        ..SweepSpec::linear("p_c", 0.0, 5.0, 21)
    };
    let t = run_sweep(&spec, &cfg).unwrap();
    assert_eq!(t.rows.len(), 42);
    let gd: Vec<f64> = t.rows_for(GameMode::Decentralized).map(|r| r.value).collect();
    assert_eq!(gd, spec.values);
    assert!(t.rows[..21].iter().all(|r| r.mode == GameMode::Decentralized));
    let failed: Vec<_> = t.rows.iter().filter(|r| r.status != "ok").collect();
    assert!(!failed.is_empty());
    assert!(failed.iter().all(|r| r.responses == vec![None]));

    // invalid parameter values become failed rows too
    let spec = SweepSpec {
        values: vec![-1.0, 1.0],
        modes: vec![GameMode::Decentralized],
        ..SweepSpec::linear("delta", 0.0, 0.0, 0)
    };
    let t = run_sweep(&spec, &cfg).unwrap();
    assert!(t.rows[0].status.contains("delta"));
    assert_eq!(t.rows[1].status, "ok");
}

#[test]
fn mode_ordering_under_mu_f_sweep() {
    let spec = SweepSpec { responses: vec![Response::EfAtHd], ..SweepSpec::linear("mu_f", 1.0, 2.0, 5) };
    let t = run_sweep(&spec, &ScenarioConfig::default()).unwrap();
    let col = |m| t.rows_for(m).map(|r| r.responses[0].unwrap()).collect::<Vec<_>>();
    let (gd, gs, gc) = (col(GameMode::Decentralized), col(GameMode::Stackelberg), col(GameMode::Centralized));
    for i in 0..5 {
        assert!(gc[i] >= gs[i] && gs[i] >= gd[i], "{i}: {} {} {}", gc[i], gs[i], gd[i]);
    }
}

#[test]
fn empty_config_file_gives_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.toml");
    fs::write(&path, "").unwrap();
    let cfg = ScenarioConfig::load(&path).unwrap();
    assert_eq!(cfg.params, ModelParams64::baseline());
    assert_eq!(cfg.params.h0, 0.1);
    assert!(ScenarioConfig::load(&dir.path().join("missing.toml")).is_err());
}

#[test]
fn bad_config_is_reported_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(&path, "lambda_f = -1\n").unwrap();
    let out = bin().args(["solve", "--config"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lambda_f"));
}

#[test]
fn verify_passes_at_baseline_and_zero_payoffs() {
    let rep = run_verify(&ScenarioConfig::default()).unwrap();
    assert!(rep.passed(), "{:#?}", rep.checks.iter().filter(|c| !c.passed).collect::<Vec<_>>());
    assert_eq!(rep.checks.len(), 18);

    let zero: ScenarioConfig = "p_f = 0\np_r = 0\np_c = 0".parse().unwrap();
    let rep = run_verify(&zero).unwrap();
    assert!(rep.passed());
    for c in rep.checks.iter().filter(|c| !c.name.ends_with("rk4 order") && !c.name.ends_with("cross-check")) {
        assert_eq!(c.metric, Some(0.0), "{}", c.name);
    }
}

#[test]
fn corrupted_coefficient_fails_the_residual_scan() {
    let p = ModelParams64::baseline();
    let cfg = ScenarioConfig::default();
    let mut sol = solve(GameMode::Decentralized, &p, &SolverConfig64::default()).unwrap();
    sol.farmer.as_mut().unwrap().a += 0.1;
    let (checks, _) = verify_solution(&sol, &p, &cfg.sim, cfg.solver.tolerance);
    let hjb = checks.iter().find(|c| c.name.ends_with("hjb residual")).unwrap();
    assert!(!hjb.passed);
}

#[test]
fn printed_backend_reports_discrepancies() {
    let out = bin().args(["solve", "--backend", "paper"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stdout.contains("[gd] backend paper-closed-form"));
    assert!(stderr.contains("[gc] complex root"), "{stderr}");
}

#[test]
fn simulate_and_sweep_commands() {
    let out = bin().args(["simulate", "--mode", "gs", "--horizon", "1", "--step", "0.25"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert_eq!(text.lines().nth(1).unwrap().split(',').count(), 12);

    let out = bin().args(["simulate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin()
        .args(["sweep", "--mode", "gd", "--param", "p_c", "--values", "0,1,2", "--response", "ef_at_hd,hd"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "mode,p_c,status,ef_at_hd,hd");
    assert_eq!(lines.len(), 4);
    assert!(lines[3].starts_with("gd,2,complex root"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("interior peak not observed"));
}
