//! Rendering of result tables and the run report, and writing them to an
//! output directory.
//!
//! Tables contain only computed numbers, so identical configs give
//! byte-identical files; the wall-clock timestamp lives in the report alone.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use carbon_sink_game::{GameSolution64, Role, Trajectory64};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::config::{Response, ScenarioConfig};
use crate::runner::{response, Cell, Comparison, SweepTable, VerifyReport};

#[derive(Debug, Error)]
pub enum EmitError {
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("cannot render {name}: {reason}")]
    Render { name: String, reason: String },
}

/// A named file body, rendered in memory before anything touches disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
}

fn num(v: f64) -> String {
    v.to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn render(name: &str, header: &[String], rows: &[Vec<String>]) -> Result<Artifact, EmitError> {
    let fail = |e: csv::Error| EmitError::Render { name: name.into(), reason: e.to_string() };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(fail)?;
    for r in rows {
        w.write_record(r).map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| EmitError::Render { name: name.into(), reason: e.to_string() })?;
    Ok(Artifact { name: name.into(), bytes })
}

pub const SUMMARY_HEADER: [&str; 30] = [
    "mode",
    "scenario",
    "sink_trading",
    "p_c",
    "status",
    "A",
    "B",
    "C",
    "M",
    "N",
    "F",
    "alpha",
    "beta",
    "H_d",
    "E_f",
    "E_r",
    "x_f",
    "H0",
    "V_f_H0",
    "V_r_H0",
    "V_total_H0",
    "V_f_Hd",
    "V_r_Hd",
    "V_total_Hd",
    "profit_f",
    "profit_r",
    "profit_total",
    "max_hjb_residual",
    "flagged_samples",
    "flags",
];

/// Coefficients under their conventional names: `A, B, C` belong to the
/// farmer (or the joint value), `M, N, F` to the retailer. The retailer's
/// decentralized value is linear, `M H + N`.
pub fn coefficients(sol: &GameSolution64) -> [Option<f64>; 6] {
    let lead = sol.farmer.or(sol.joint);
    let (a, b, c) = lead.map_or((None, None, None), |v| (Some(v.a), Some(v.b), Some(v.c)));
    let (m, n, f) = match (sol.mode, sol.retailer) {
        (carbon_sink_game::GameMode::Decentralized, Some(r)) => (Some(r.b), Some(r.c), None),
        (_, Some(r)) => (Some(r.a), Some(r.b), Some(r.c)),
        (_, None) => (None, None, None),
    };
    [a, b, c, m, n, f]
}

fn summary_row(cell: &Cell) -> Vec<String> {
    let mut row = vec![
        cell.mode.code().to_string(),
        cell.scenario.label().to_string(),
        cell.sink_trading().to_string(),
        num(cell.params.p_c),
    ];
    let res = match &cell.outcome {
        Ok(r) => r,
        Err(e) => {
            row.push(format!("error: {e}"));
            row.resize(SUMMARY_HEADER.len(), String::new());
            return row;
        }
    };
    let sol = &res.solution;
    let hd = sol.steady_state;
    row.push("ok".into());
    row.extend(coefficients(sol).map(opt));
    row.extend([num(sol.alpha), num(sol.beta)]);
    row.extend([Response::Hd, Response::EfAtHd, Response::ErAtHd].map(|r| opt(response(sol, r))));
    row.push(opt(sol.policy.subsidy.and_then(|s| s.eval(hd))));
    row.push(num(cell.h0));
    for role in [Role::Farmer, Role::Retailer, Role::Joint] {
        row.push(opt(sol.value_at(role, cell.h0).ok()));
    }
    row.extend(
        [Response::FarmerValueAtHd, Response::RetailerValueAtHd, Response::TotalValueAtHd]
            .map(|r| opt(response(sol, r))),
    );
    for role in [Role::Farmer, Role::Retailer, Role::Joint] {
        row.push(opt(res.profits.iter().find(|(r, _)| *r == role).and_then(|(_, v)| *v)));
    }
    row.push(num(sol.diagnostics.max_hjb_residual));
    row.push(res.trajectory.flagged.iter().filter(|f| **f).count().to_string());
    let mut flags = sol.diagnostics.flags.clone();
    flags.extend(res.notes.iter().cloned());
    row.push(flags.join("; "));
    row
}

pub fn summary_table(cmp: &Comparison) -> Result<Artifact, EmitError> {
    let header: Vec<String> = SUMMARY_HEADER.iter().map(|s| s.to_string()).collect();
    let rows: Vec<Vec<String>> = cmp.cells.iter().map(summary_row).collect();
    render("summary.csv", &header, &rows)
}

pub fn trajectory_table(name: &str, traj: &Trajectory64) -> Result<Artifact, EmitError> {
    let mut bytes = Vec::new();
    traj.write_table(&mut bytes).map_err(|e| EmitError::Render { name: name.into(), reason: e.to_string() })?;
    Ok(Artifact { name: name.into(), bytes })
}

pub fn comparison_artifacts(cmp: &Comparison) -> Result<Vec<Artifact>, EmitError> {
    let mut out = vec![summary_table(cmp)?];
    for cell in &cmp.cells {
        if let Ok(r) = &cell.outcome {
            out.push(trajectory_table(&format!("trajectory_{}.csv", cell.name()), &r.trajectory)?);
        }
    }
    Ok(out)
}

pub fn sweep_table(table: &SweepTable) -> Result<Artifact, EmitError> {
    let mut header: Vec<String> = vec!["mode".into(), table.parameter.clone(), "status".into()];
    header.extend(table.responses.iter().map(|r| r.name().to_string()));
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| {
            let mut row = vec![r.mode.code().to_string(), num(r.value), r.status.clone()];
            row.extend(r.responses.iter().map(|v| opt(*v)));
            row
        })
        .collect();
    render("sweep.csv", &header, &rows)
}

pub fn peaks_table(table: &SweepTable) -> Result<Artifact, EmitError> {
    let header: Vec<String> =
        ["mode", "response", "argmax", "maximum", "interior_peak"].iter().map(|s| s.to_string()).collect();
    let rows: Vec<Vec<String>> = table
        .peaks
        .iter()
        .map(|p| {
            let seen = if p.interior { "observed" } else { "not-observed" };
            vec![p.mode.code().into(), p.response.name().into(), opt(p.argmax), opt(p.maximum), seen.into()]
        })
        .collect();
    render("sweep_peaks.csv", &header, &rows)
}

pub fn verify_table(report: &VerifyReport) -> Result<Artifact, EmitError> {
    let header: Vec<String> =
        ["check", "result", "metric", "threshold", "detail"].iter().map(|s| s.to_string()).collect();
    let rows: Vec<Vec<String>> = report
        .checks
        .iter()
        .map(|c| {
            let result = if c.passed { "PASS" } else { "FAIL" };
            vec![c.name.clone(), result.into(), opt(c.metric), opt(c.threshold), c.detail.clone()]
        })
        .collect();
    render("verify.csv", &header, &rows)
}

/// Solver diagnostics without the bulky trajectory data.
pub fn solution_summary(sol: &GameSolution64) -> Value {
    json!({
        "mode": sol.mode,
        "farmer": sol.farmer,
        "retailer": sol.retailer,
        "joint": sol.joint,
        "policy": sol.policy,
        "alpha": sol.alpha,
        "beta": sol.beta,
        "steady_state": sol.steady_state,
        "diagnostics": sol.diagnostics,
    })
}

/// Structured run report: versions, config echo, command-specific body,
/// and the one timestamp of the run.
pub fn run_report(
    command: &str,
    cfg: &ScenarioConfig,
    body: Value,
    flagged: usize,
    files: &[&Artifact],
) -> Result<Artifact, EmitError> {
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let doc = json!({
        "command": command,
        "generated_at_unix": stamp,
        "versions": {
            "carbon-sink-cli": env!("CARGO_PKG_VERSION"),
            "carbon-sink-game": carbon_sink_game::VERSION,
        },
        "config": cfg,
        "flagged": flagged,
        "tables": files.iter().map(|a| a.name.as_str()).collect::<Vec<_>>(),
        "results": body,
    });
    let bytes = serde_json::to_vec_pretty(&doc)
        .map_err(|e| EmitError::Render { name: "report.json".into(), reason: e.to_string() })?;
    Ok(Artifact { name: "report.json".into(), bytes })
}

/// Writes every artifact into `dir` and returns the manifest.
///
/// Each file is written to a temporary name and renamed into place. If any
/// write fails, everything written by this call is removed again.
pub fn emit_results(artifacts: &[Artifact], dir: &Path) -> Result<Manifest, EmitError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| EmitError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let mut written: Vec<PathBuf> = Vec::new();
    let mut result = Ok(());
    for a in artifacts {
        let path = dir.join(&a.name);
        let tmp = dir.join(format!(".{}.partial", a.name));
        let step = fs::write(&tmp, &a.bytes).map_err(io(&tmp)).and_then(|_| fs::rename(&tmp, &path).map_err(io(&path)));
        if let Err(e) = step {
            let _ = fs::remove_file(&tmp);
            result = Err(e);
            break;
        }
        written.push(path);
    }
    match result {
        Ok(()) => Ok(Manifest { dir: dir.to_path_buf(), files: written }),
        Err(e) => {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            Err(e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failed_write_leaves_nothing_behind() {
        let dir = tempfile::tempdir().unwrap();
        let good = Artifact { name: "a.csv".into(), bytes: b"x\n".to_vec() };
        // a name with a missing parent directory cannot be written
        let bad = Artifact { name: "missing/b.csv".into(), bytes: b"y\n".to_vec() };
        assert!(emit_results(&[good.clone(), bad], dir.path()).is_err());
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);

        let m = emit_results(&[good], dir.path()).unwrap();
        assert_eq!(m.files, vec![dir.path().join("a.csv")]);
        assert_eq!(fs::read(dir.path().join("a.csv")).unwrap(), b"x\n");
    }
}
