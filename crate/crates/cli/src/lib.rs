//! Experiment runner for the carbon-sink supply chain game.
//!
//! [`config`] reads scenario documents, [`runner`] drives the comparison,
//! sweep and verification studies, and [`emit`] turns results into CSV
//! tables plus a JSON run report.

pub mod config;
pub mod emit;
pub mod runner;

pub use config::{parse_backend, parse_modes, ConfigError, Response, ScenarioConfig, SweepSpec};
pub use emit::{emit_results, Artifact, EmitError, Manifest};
pub use runner::{
    response, run_compare, run_sweep, run_verify, verify_solution, Cell, Check, Comparison, RunError, Scenario,
    SweepRow, SweepTable, VerifyReport,
};
