//! Domain types and the instantaneous model primitives: reduction dynamics,
//! supply, demand, carbon sink and effort costs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{GameError, ParamViolation, Result};
use crate::num::Scalar;

/// Exogenous model parameters.
///
/// Field names double as the keys of the configuration document.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams<T> {
    /// Farmer effort-cost coefficient.
    pub lambda_f: T,
    /// Retailer effort-cost coefficient.
    pub lambda_r: T,
    /// Impact of farmer effort on the reduction level.
    pub mu_f: T,
    /// Impact of retailer effort on the reduction level.
    pub mu_r: T,
    /// Impact of farmer effort on the per-unit carbon sink.
    pub omega: T,
    /// Farmer marginal profit per unit.
    pub p_f: T,
    /// Retailer marginal profit per unit.
    pub p_r: T,
    /// Product unit price.
    pub p: T,
    /// Carbon-sink unit price. Zero disables sink trading.
    pub p_c: T,
    /// Price sensitivity of supply.
    pub a: T,
    /// Price sensitivity of demand.
    pub b: T,
    /// Decay rate of the reduction level.
    pub delta: T,
    /// Discount rate.
    pub rho: T,
    /// Consumer low-carbon preference.
    pub theta: T,
    /// Base supply.
    pub q0: T,
    /// Base demand.
    pub d0: T,
    /// Initial reduction level.
    pub h0: T,
}

/// Initial reduction level used when none is configured.
pub const DEFAULT_H0: f64 = 0.1;

impl<T: Scalar> ModelParams<T> {
    /// The reference parameter set used throughout the numerical experiments.
    pub fn baseline() -> Self {
        Self {
            lambda_f: T::lit(500.0),
            lambda_r: T::lit(200.0),
            mu_f: T::lit(1.5),
            mu_r: T::lit(0.5),
            omega: T::lit(0.4),
            p_f: T::lit(5.0),
            p_r: T::lit(10.0),
            p: T::lit(25.0),
            p_c: T::lit(0.5),
            a: T::lit(3.0),
            b: T::lit(2.0),
            delta: T::lit(1.0),
            rho: T::lit(0.7),
            theta: T::lit(0.8),
            q0: T::lit(300.0),
            d0: T::lit(250.0),
            h0: T::lit(DEFAULT_H0),
        }
    }

    /// Same parameters with carbon-sink trading switched off.
    pub fn without_sink_trading(mut self) -> Self {
        self.p_c = T::zero();
        self
    }

    /// Parameter values by their configuration key, in declaration order.
    pub fn fields(&self) -> [(&'static str, T); 17] {
        [
            ("lambda_f", self.lambda_f),
            ("lambda_r", self.lambda_r),
            ("mu_f", self.mu_f),
            ("mu_r", self.mu_r),
            ("omega", self.omega),
            ("p_f", self.p_f),
            ("p_r", self.p_r),
            ("p", self.p),
            ("p_c", self.p_c),
            ("a", self.a),
            ("b", self.b),
            ("delta", self.delta),
            ("rho", self.rho),
            ("theta", self.theta),
            ("q0", self.q0),
            ("d0", self.d0),
            ("h0", self.h0),
        ]
    }

    pub fn get(&self, name: &str) -> Option<T> {
        self.fields().into_iter().find(|(k, _)| *k == name).map(|(_, v)| v)
    }

    /// Sets a field by its configuration key. Returns `false` for an unknown key.
    pub fn set(&mut self, name: &str, value: T) -> bool {
        let slot = match name {
            "lambda_f" => &mut self.lambda_f,
            "lambda_r" => &mut self.lambda_r,
            "mu_f" => &mut self.mu_f,
            "mu_r" => &mut self.mu_r,
            "omega" => &mut self.omega,
            "p_f" => &mut self.p_f,
            "p_r" => &mut self.p_r,
            "p" => &mut self.p,
            "p_c" => &mut self.p_c,
            "a" => &mut self.a,
            "b" => &mut self.b,
            "delta" => &mut self.delta,
            "rho" => &mut self.rho,
            "theta" => &mut self.theta,
            "q0" => &mut self.q0,
            "d0" => &mut self.d0,
            "h0" => &mut self.h0,
            _ => return false,
        };
        *slot = value;
        true
    }

    /// Checks every sign constraint and returns the parameters unchanged when
    /// all of them hold.
    pub fn validate(self) -> Result<Self> {
        let mut violations = Vec::new();
        let mut check = |field: &'static str, value: T, constraint: &'static str, ok: bool| {
            if !ok || !value.is_finite() {
                violations.push(ParamViolation { field, constraint, value: value.as_f64() });
            }
        };
        let z = T::zero();
        check("lambda_f", self.lambda_f, "lambda_f > 0", self.lambda_f > z);
        check("lambda_r", self.lambda_r, "lambda_r > 0", self.lambda_r > z);
        check("mu_f", self.mu_f, "mu_f > 0", self.mu_f > z);
        check("mu_r", self.mu_r, "mu_r > 0", self.mu_r > z);
        check("omega", self.omega, "omega > 0", self.omega > z);
        check("delta", self.delta, "delta > 0", self.delta > z);
        check("rho", self.rho, "rho > 0", self.rho > z);
        check("theta", self.theta, "theta > 0", self.theta > z);
        check("p_f", self.p_f, "p_f >= 0", self.p_f >= z);
        check("p_r", self.p_r, "p_r >= 0", self.p_r >= z);
        check("p", self.p, "p >= 0", self.p >= z);
        check("p_c", self.p_c, "p_c >= 0", self.p_c >= z);
        check("a", self.a, "a > 0", self.a > z);
        check("b", self.b, "b > 0", self.b > z);
        check("q0", self.q0, "q0 >= 0", self.q0 >= z);
        check("d0", self.d0, "d0 >= 0", self.d0 >= z);
        check("h0", self.h0, "h0 >= 0", self.h0 >= z);
        let supply_mult = self.q0 + self.a * self.p;
        check("q0", supply_mult, "q0 + a*p >= 0", supply_mult >= z);
        if !violations.is_empty() {
            return Err(GameError::InvalidParams(violations));
        }
        let demand_mult = self.d0 - self.b * self.p;
        if demand_mult < z {
            return Err(GameError::NegativeDemand(demand_mult.as_f64()));
        }
        Ok(self)
    }

    pub fn derived(&self) -> DerivedConstants<T> {
        DerivedConstants::new(self)
    }

    /// Closed-loop rate of change of the reduction level.
    pub fn reduction_drift(&self, h: T, effort_f: T, effort_r: T) -> T {
        self.mu_f * effort_f + self.mu_r * effort_r - self.delta * h
    }

    /// Effort cost rates `(farmer, retailer)`.
    pub fn effort_costs(&self, effort_f: T, effort_r: T) -> (T, T) {
        (T::half() * self.lambda_f * effort_f * effort_f, T::half() * self.lambda_r * effort_r * effort_r)
    }
}

impl<T: Scalar> Default for ModelParams<T> {
    fn default() -> Self {
        Self::baseline()
    }
}

/// Multipliers that the closed-form algebra works with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedConstants<T> {
    /// Supply per unit of reduction level, `(q0 + a p) theta`.
    pub k1: T,
    /// Demand per unit of reduction level, `(d0 - b p) theta`.
    pub k2: T,
    /// Sink revenue slope, `p_c omega k1`.
    pub eta: T,
}

impl<T: Scalar> DerivedConstants<T> {
    pub fn new(params: &ModelParams<T>) -> Self {
        let k1 = (params.q0 + params.a * params.p) * params.theta;
        let k2 = (params.d0 - params.b * params.p) * params.theta;
        Self { k1, k2, eta: params.p_c * params.omega * k1 }
    }

    pub fn supply(&self, h: T) -> T {
        self.k1 * h
    }

    pub fn demand(&self, h: T) -> T {
        self.k2 * h
    }

    /// Total carbon sink, one unit per product plus `omega` per unit of farmer effort.
    pub fn carbon_sink(&self, h: T, effort_f: T, omega: T) -> T {
        (T::one() + omega * effort_f) * self.supply(h)
    }
}

/// Cooperation mode between farmer and retailer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GameMode {
    Decentralized,
    Stackelberg,
    Centralized,
}

impl GameMode {
    pub const ALL: [GameMode; 3] = [GameMode::Decentralized, GameMode::Stackelberg, GameMode::Centralized];

    pub fn code(self) -> &'static str {
        match self {
            GameMode::Decentralized => "gd",
            GameMode::Stackelberg => "gs",
            GameMode::Centralized => "gc",
        }
    }
}

impl fmt::Display for GameMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for GameMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "gd" | "decentralized" => Ok(GameMode::Decentralized),
            "gs" | "stackelberg" => Ok(GameMode::Stackelberg),
            "gc" | "centralized" => Ok(GameMode::Centralized),
            other => Err(format!("unknown mode '{other}' (expected gd, gs or gc)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Farmer,
    Retailer,
    /// Whole supply chain.
    Joint,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Farmer => "farmer",
            Role::Retailer => "retailer",
            Role::Joint => "joint",
        })
    }
}
