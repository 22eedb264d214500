//! Scenario configuration: a flat TOML document of parameter overrides plus
//! optional `sim`, `solver` and `sweep` sections. Absent fields take the
//! baseline values.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use carbon_sink_game::{
    Backend, FollowerConvention, GameError, GameMode, Integrator, ModelParams64, SimConfig64, SolverConfig64,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("malformed config: {0}")]
    Syntax(String),

    #[error("config field `{field}`: {reason}")]
    Field { field: String, reason: String },

    #[error("unknown config key `{0}`")]
    UnknownKey(String),

    #[error("{0}")]
    Params(#[from] GameError),

    #[error("no game mode selected")]
    NoModes,
}

fn field_err(field: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError::Field { field: field.into(), reason: reason.into() }
}

/// Quantities a sweep can record, all evaluated at the steady state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Response {
    EfAtHd,
    ErAtHd,
    Hd,
    FarmerValueAtHd,
    RetailerValueAtHd,
    TotalValueAtHd,
}

impl Response {
    pub const ALL: [Response; 6] = [
        Response::EfAtHd,
        Response::ErAtHd,
        Response::Hd,
        Response::FarmerValueAtHd,
        Response::RetailerValueAtHd,
        Response::TotalValueAtHd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Response::EfAtHd => "ef_at_hd",
            Response::ErAtHd => "er_at_hd",
            Response::Hd => "hd",
            Response::FarmerValueAtHd => "farmer_value_at_hd",
            Response::RetailerValueAtHd => "retailer_value_at_hd",
            Response::TotalValueAtHd => "total_value_at_hd",
        }
    }
}

impl fmt::Display for Response {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Response {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Response::ALL.into_iter().find(|r| r.name() == s).ok_or_else(|| {
            let names: Vec<_> = Response::ALL.iter().map(|r| r.name()).collect();
            format!("unknown response '{s}' (expected one of {})", names.join(", "))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    /// Any parameter key, e.g. `p_c` or `mu_f`.
    pub parameter: String,
    pub values: Vec<f64>,
    pub responses: Vec<Response>,
    pub modes: Vec<GameMode>,
}

impl SweepSpec {
    /// `count` evenly spaced values from `min` to `max` inclusive.
    pub fn linear(parameter: &str, min: f64, max: f64, count: usize) -> Self {
        let values = match count {
            0 => Vec::new(),
            1 => vec![min],
            n => (0..n).map(|i| min + (max - min) * i as f64 / (n - 1) as f64).collect(),
        };
        Self { parameter: parameter.into(), values, responses: Response::ALL.to_vec(), modes: GameMode::ALL.to_vec() }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if ModelParams64::baseline().get(&self.parameter).is_none() {
            return Err(field_err("sweep.parameter", format!("`{}` is not a model parameter", self.parameter)));
        }
        if self.values.is_empty() {
            return Err(field_err("sweep.values", "no values to sweep"));
        }
        if let Some(v) = self.values.iter().find(|v| !v.is_finite()) {
            return Err(field_err("sweep.values", format!("non-finite value {v}")));
        }
        if self.responses.is_empty() {
            return Err(field_err("sweep.responses", "no response selected"));
        }
        if self.modes.is_empty() {
            return Err(ConfigError::NoModes);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub params: ModelParams64,
    pub modes: Vec<GameMode>,
    /// Off forces `p_c = 0` everywhere.
    pub sink_trading: bool,
    pub sim: SimConfig64,
    pub solver: SolverConfig64,
    pub sweep: Option<SweepSpec>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            params: ModelParams64::baseline(),
            modes: GameMode::ALL.to_vec(),
            sink_trading: true,
            sim: SimConfig64::default(),
            solver: SolverConfig64::default(),
            sweep: None,
            out: None,
            workers: None,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SimSection {
    horizon: Option<f64>,
    step: Option<f64>,
    integrator: Option<Integrator>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SolverSection {
    backend: Option<String>,
    tolerance: Option<f64>,
    root_tolerance: Option<f64>,
    convention: Option<FollowerConvention>,
    max_iterations: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSection {
    parameter: String,
    values: Option<Vec<f64>>,
    min: Option<f64>,
    max: Option<f64>,
    count: Option<usize>,
    responses: Option<Vec<Response>>,
    modes: Option<Modes>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Modes {
    One(String),
    Many(Vec<String>),
}

impl Modes {
    fn resolve(self) -> Result<Vec<GameMode>, String> {
        let names = match self {
            Modes::One(s) => vec![s],
            Modes::Many(v) => v,
        };
        let mut out = Vec::new();
        for name in names {
            let picked = parse_modes(&name)?;
            for m in picked {
                if !out.contains(&m) {
                    out.push(m);
                }
            }
        }
        Ok(out)
    }
}

/// `gd`, `gs`, `gc` (or the long names), or `all`.
pub fn parse_modes(s: &str) -> Result<Vec<GameMode>, String> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(GameMode::ALL.to_vec());
    }
    s.parse().map(|m| vec![m])
}

/// `residual`, or `paper` / `paper-closed-form`.
pub fn parse_backend(s: &str) -> Result<Backend, String> {
    match s.to_ascii_lowercase().as_str() {
        "residual" => Ok(Backend::Residual),
        "paper" | "paper-closed-form" => Ok(Backend::PaperClosedForm),
        other => Err(format!("unknown backend '{other}' (expected residual or paper)")),
    }
}

fn section<'de, S: Deserialize<'de>>(name: &str, value: toml::Value) -> Result<S, ConfigError> {
    if !value.is_table() {
        return Err(field_err(name, "expected a table"));
    }
    value.try_into().map_err(|e: toml::de::Error| field_err(name, e.message().to_string()))
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        text.parse()
    }

    /// Parameters actually solved: the overrides, with `p_c = 0` when sink
    /// trading is off.
    pub fn effective_params(&self) -> ModelParams64 {
        if self.sink_trading {
            self.params
        } else {
            self.params.without_sink_trading()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.modes.is_empty() {
            return Err(ConfigError::NoModes);
        }
        self.params.validate()?;
        self.sim.steps()?;
        self.solver.validate()?;
        if let Some(sweep) = &self.sweep {
            sweep.validate()?;
        }
        if self.workers == Some(0) {
            return Err(field_err("workers", "must be at least 1"));
        }
        Ok(())
    }

    fn apply(&mut self, key: &str, value: toml::Value) -> Result<(), ConfigError> {
        match key {
            "modes" => {
                let modes: Modes =
                    value.try_into().map_err(|_| field_err(key, "expected a string or list of strings"))?;
                self.modes = modes.resolve().map_err(|e| field_err(key, e))?;
            }
            "sink_trading" => {
                self.sink_trading = value.as_bool().ok_or_else(|| field_err(key, "expected a boolean"))?;
            }
            "out" => {
                self.out = Some(value.as_str().ok_or_else(|| field_err(key, "expected a path string"))?.into());
            }
            "workers" => {
                let n = value
                    .as_integer()
                    .filter(|n| *n > 0)
                    .ok_or_else(|| field_err(key, "expected a positive integer"))?;
                self.workers = Some(n as usize);
            }
            "sim" => {
                let s: SimSection = section(key, value)?;
                self.sim.horizon = s.horizon.unwrap_or(self.sim.horizon);
                self.sim.step = s.step.unwrap_or(self.sim.step);
                self.sim.integrator = s.integrator.unwrap_or(self.sim.integrator);
            }
            "solver" => {
                let s: SolverSection = section(key, value)?;
                if let Some(b) = s.backend {
                    self.solver.backend = parse_backend(&b).map_err(|e| field_err("solver.backend", e))?;
                }
                self.solver.tolerance = s.tolerance.unwrap_or(self.solver.tolerance);
                self.solver.root_tolerance = s.root_tolerance.unwrap_or(self.solver.root_tolerance);
                self.solver.convention = s.convention.unwrap_or(self.solver.convention);
                self.solver.max_iterations = s.max_iterations.unwrap_or(self.solver.max_iterations);
            }
            "sweep" => {
                let s: SweepSection = section(key, value)?;
                let mut spec = match (s.values, s.min, s.max, s.count) {
                    (Some(values), None, None, None) => {
                        SweepSpec { values, ..SweepSpec::linear(&s.parameter, 0.0, 0.0, 0) }
                    }
                    (None, Some(min), Some(max), Some(count)) => SweepSpec::linear(&s.parameter, min, max, count),
                    _ => return Err(field_err("sweep", "give either `values` or all of `min`, `max`, `count`")),
                };
                if let Some(r) = s.responses {
                    spec.responses = r;
                }
                if let Some(m) = s.modes {
                    spec.modes = m.resolve().map_err(|e| field_err("sweep.modes", e))?;
                }
                self.sweep = Some(spec);
            }
            _ => {
                let name = match key {
                    "Q0" => "q0",
                    "D0" => "d0",
                    "H0" => "h0",
                    k => k,
                };
                if self.params.get(name).is_none() {
                    return Err(ConfigError::UnknownKey(key.into()));
                }
                let v = match value {
                    toml::Value::Float(f) => f,
                    toml::Value::Integer(i) => i as f64,
                    _ => return Err(field_err(key, "expected a number")),
                };
                self.params.set(name, v);
            }
        }
        Ok(())
    }
}

impl FromStr for ScenarioConfig {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, ConfigError> {
        let table: toml::Table =
            text.parse().map_err(|e: toml::de::Error| ConfigError::Syntax(e.message().to_string()))?;
        let mut cfg = ScenarioConfig::default();
        for (key, value) in table {
            cfg.apply(&key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
