use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use carbon_sink_cli::emit::{self, Artifact};
use carbon_sink_cli::{
    emit_results, parse_backend, parse_modes, run_compare, run_sweep, run_verify, runner, ConfigError, EmitError,
    Response, RunError, ScenarioConfig, SweepSpec,
};
use carbon_sink_game::{simulate, GameError};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Parser)]
#[command(name = "carbon-sink", version, about = "Solve, simulate and compare the carbon-sink supply chain game")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML scenario file; absent keys take baseline values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// gd, gs, gc or all.
    #[arg(long, global = true)]
    mode: Option<String>,
    /// Force the carbon-sink price to zero.
    #[arg(long, global = true)]
    no_sink_trading: bool,
    /// Directory for tables and the run report.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// residual or paper.
    #[arg(long, global = true)]
    backend: Option<String>,
    #[arg(long, global = true)]
    horizon: Option<f64>,
    #[arg(long, global = true)]
    step: Option<f64>,
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Print equilibrium coefficients for each mode.
    Solve,
    /// Closed-loop trajectory table.
    Simulate,
    /// All modes with and without sink trading.
    Compare,
    /// One-parameter sensitivity sweep.
    Sweep(SweepArgs),
    /// Residual, consistency and grid certification checks.
    Verify,
}

#[derive(Args)]
struct SweepArgs {
    /// Parameter to sweep, e.g. p_c.
    #[arg(long)]
    param: Option<String>,
    /// Comma-separated values.
    #[arg(long, value_delimiter = ',', conflicts_with = "range")]
    values: Vec<f64>,
    /// Linear grid: MIN MAX COUNT.
    #[arg(long, num_args = 3, value_names = ["MIN", "MAX", "COUNT"])]
    range: Option<Vec<f64>>,
    /// Comma-separated response names (default: all).
    #[arg(long, value_delimiter = ',')]
    response: Vec<Response>,
}

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error(transparent)]
    Emit(#[from] EmitError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write to stdout: {0}")]
    Stdout(#[from] std::io::Error),
}

fn scenario(cli: &Cli) -> Result<ScenarioConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(m) = &cli.mode {
        cfg.modes = parse_modes(m).map_err(CliError::Usage)?;
    }
    if cli.no_sink_trading {
        cfg.sink_trading = false;
    }
    if let Some(b) = &cli.backend {
        cfg.solver.backend = parse_backend(b).map_err(CliError::Usage)?;
    }
    if let Some(h) = cli.horizon {
        cfg.sim.horizon = h;
    }
    if let Some(s) = cli.step {
        cfg.sim.step = s;
    }
    if cli.out.is_some() {
        cfg.out = cli.out.clone();
    }
    if cli.workers.is_some() {
        cfg.workers = cli.workers;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn sweep_spec(args: &SweepArgs, cfg: &ScenarioConfig) -> Result<SweepSpec, CliError> {
    let mut spec = match (&args.param, &cfg.sweep) {
        (Some(p), _) => SweepSpec { modes: cfg.modes.clone(), ..SweepSpec::linear(p, 0.0, 0.0, 0) },
        (None, Some(s)) => s.clone(),
        (None, None) => return Err(CliError::Usage("sweep needs --param or a [sweep] section".into())),
    };
    if let Some(r) = &args.range {
        let count = r[2];
        if count < 1.0 || count.fract() != 0.0 {
            return Err(CliError::Usage(format!("--range count must be a positive integer, got {count}")));
        }
        spec.values = SweepSpec::linear(&spec.parameter, r[0], r[1], count as usize).values;
    } else if !args.values.is_empty() {
        spec.values = args.values.clone();
    }
    if !args.response.is_empty() {
        spec.responses = args.response.clone();
    }
    if args.param.is_some() || cfg.sweep.is_none() {
        spec.modes = cfg.modes.clone();
    }
    spec.validate()?;
    Ok(spec)
}

fn write_out(
    cfg: &ScenarioConfig,
    command: &str,
    tables: Vec<Artifact>,
    body: Value,
    flagged: usize,
) -> Result<(), CliError> {
    let Some(dir) = &cfg.out else { return Ok(()) };
    let report = emit::run_report(command, cfg, body, flagged, &tables.iter().collect::<Vec<_>>())?;
    let mut all = tables;
    all.push(report);
    let manifest = emit_results(&all, dir)?;
    for f in &manifest.files {
        eprintln!("wrote {}", f.display());
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let cfg = scenario(cli)?;
    let mut stdout = std::io::stdout().lock();
    match &cli.command {
        Command::Solve => {
            let mut ok = true;
            let mut body = Vec::new();
            for (mode, res) in runner::solve_modes(&cfg)? {
                match res {
                    Ok(sol) => {
                        writeln!(stdout, "[{mode}] backend {}", sol.diagnostics.backend)?;
                        let names = ["A", "B", "C", "M", "N", "F"];
                        for (n, v) in names.iter().zip(emit::coefficients(&sol)) {
                            if let Some(v) = v {
                                writeln!(stdout, "  {n} = {v}")?;
                            }
                        }
                        writeln!(
                            stdout,
                            "  alpha = {}\n  beta = {}\n  H_d = {}",
                            sol.alpha, sol.beta, sol.steady_state
                        )?;
                        writeln!(stdout, "  max_hjb_residual = {:e}", sol.diagnostics.max_hjb_residual)?;
                        for f in &sol.diagnostics.flags {
                            writeln!(stdout, "  flag: {f}")?;
                        }
                        body.push(emit::solution_summary(&sol));
                    }
                    Err(e) => {
                        ok = false;
                        eprintln!("[{mode}] {e}");
                        body.push(json!({ "mode": mode, "error": e.to_string() }));
                    }
                }
            }
            write_out(&cfg, "solve", Vec::new(), Value::Array(body), 0)?;
            Ok(ok)
        }
        Command::Simulate => {
            if cfg.out.is_none() && cfg.modes.len() != 1 {
                return Err(CliError::Usage("simulate prints one table; pick a single --mode or give --out".into()));
            }
            let params = cfg.effective_params();
            let mut tables = Vec::new();
            let mut body = Vec::new();
            let mut flagged = 0;
            for (mode, res) in runner::solve_modes(&cfg)? {
                let sol = res?;
                let traj = simulate(&sol, &cfg.sim, &params)?;
                flagged += traj.flagged.iter().filter(|f| **f).count();
                tables.push(emit::trajectory_table(&format!("trajectory_{}.csv", mode.code()), &traj)?);
                body.push(emit::solution_summary(&sol));
            }
            if cfg.out.is_none() {
                stdout.write_all(&tables[0].bytes)?;
            }
            write_out(&cfg, "simulate", tables, Value::Array(body), flagged)?;
            Ok(true)
        }
        Command::Compare => {
            let cmp = run_compare(&cfg)?;
            let tables = emit::comparison_artifacts(&cmp)?;
            stdout.write_all(&tables[0].bytes)?;
            let mut flagged = 0;
            let cells: Vec<Value> = cmp
                .cells
                .iter()
                .map(|c| match &c.outcome {
                    Ok(r) => {
                        flagged +=
                            r.trajectory.flagged.iter().filter(|f| **f).count() + r.solution.diagnostics.flags.len();
                        json!({ "cell": c.name(), "solution": emit::solution_summary(&r.solution), "notes": r.notes })
                    }
                    Err(e) => json!({ "cell": c.name(), "error": e }),
                })
                .collect();
            for c in cmp.cells.iter().filter(|c| c.outcome.is_err()) {
                eprintln!("[{}] {}", c.name(), c.outcome.as_ref().err().map(String::as_str).unwrap_or_default());
            }
            write_out(&cfg, "compare", tables, Value::Array(cells), flagged)?;
            Ok(cmp.failed() == 0)
        }
        Command::Sweep(args) => {
            let spec = sweep_spec(args, &cfg)?;
            let table = run_sweep(&spec, &cfg)?;
            let tables = vec![emit::sweep_table(&table)?, emit::peaks_table(&table)?];
            stdout.write_all(&tables[0].bytes)?;
            for p in &table.peaks {
                let at = p.argmax.map_or("none".to_string(), |v| v.to_string());
                let seen = if p.interior { "observed" } else { "not observed" };
                eprintln!("[{}] {}: argmax {} = {at}, interior peak {seen}", p.mode, p.response, table.parameter);
            }
            let body = json!({ "sweep": spec, "failed_rows": table.failed(), "peaks": table.peaks });
            write_out(&cfg, "sweep", tables, body, table.failed())?;
            Ok(true)
        }
        Command::Verify => {
            let report = run_verify(&cfg)?;
            for c in &report.checks {
                let verdict = if c.passed { "PASS" } else { "FAIL" };
                let metric = c.metric.map_or("-".to_string(), |m| format!("{m:.3e}"));
                writeln!(stdout, "{verdict} {} (metric {metric}) {}", c.name, c.detail)?;
            }
            let failed = report.checks.iter().filter(|c| !c.passed).count();
            let body = serde_json::to_value(&report).unwrap_or(Value::Null);
            write_out(&cfg, "verify", vec![emit::verify_table(&report)?], body, failed)?;
            Ok(report.passed())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
