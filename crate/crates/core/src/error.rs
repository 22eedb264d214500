use std::fmt;

use thiserror::Error;

/// A single violated parameter constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamViolation {
    pub field: &'static str,
    pub constraint: &'static str,
    pub value: f64,
}

impl fmt::Display for ParamViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: \"{}\" violated (value {})", self.field, self.constraint, self.value)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("invalid parameters: {}", join(.0))]
    InvalidParams(Vec<ParamViolation>),

    #[error("demand multiplier d0 - b*p = {0} is negative")]
    NegativeDemand(f64),

    #[error("complex root in {context}: discriminant {discriminant} < 0")]
    ComplexRoot { context: String, discriminant: f64 },

    #[error("unstable model in {context}: no candidate has a negative drift slope (alphas: {alphas:?})")]
    UnstableModel { context: String, alphas: Vec<f64> },

    #[error("no attracting steady state: drift slope alpha = {0} >= 0")]
    NoSteadyState(f64),

    #[error("root iteration for {context} did not converge after {iterations} iterations (residual {residual})")]
    NoConvergence { context: String, iterations: usize, residual: f64 },

    #[error("invalid simulation config: {0}")]
    InvalidSim(String),

    #[error("horizon too short: rho*T = {0} < 20, use a longer horizon")]
    HorizonTooShort(f64),

    #[error("role {role} has no value function in {mode} mode")]
    UnknownRole { role: String, mode: String },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("value iteration did not converge within {sweeps} sweeps (last change {residual})")]
    GridNoConvergence { sweeps: usize, residual: f64 },

    #[error("greedy dynamics leave the state grid at H = {state}; widen the range")]
    LeftGrid { state: f64 },

    #[error("{0}")]
    Io(String),
}

fn join(v: &[ParamViolation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T, E = GameError> = std::result::Result<T, E>;
