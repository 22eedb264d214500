//! Solved equilibria: value functions, feedback rules and diagnostics.

use serde::Serialize;

use crate::error::{GameError, Result};
use crate::model::{GameMode, ModelParams, Role};
use crate::num::Scalar;

/// `V(H) = a H^2 + b H + c`. A linear value has `a = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraticValue<T> {
    pub role: Role,
    pub a: T,
    pub b: T,
    pub c: T,
}

impl<T: Scalar> QuadraticValue<T> {
    pub fn new(role: Role, a: T, b: T, c: T) -> Self {
        Self { role, a, b, c }
    }

    pub fn eval(&self, h: T) -> T {
        (self.a * h + self.b) * h + self.c
    }

    pub fn slope(&self, h: T) -> T {
        T::two() * self.a * h + self.b
    }
}

/// Effort rule `E(H) = slope * H + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AffineRule<T> {
    pub slope: T,
    pub intercept: T,
}

impl<T: Scalar> AffineRule<T> {
    pub fn new(slope: T, intercept: T) -> Self {
        Self { slope, intercept }
    }

    pub fn eval(&self, h: T) -> T {
        self.slope * h + self.intercept
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }
}

/// Subsidy ratio `x(H) = (n1 H + n0) / (d1 H + d0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubsidyRule<T> {
    pub n1: T,
    pub n0: T,
    pub d1: T,
    pub d0: T,
}

impl<T: Scalar> SubsidyRule<T> {
    pub fn denominator(&self, h: T) -> T {
        self.d1 * h + self.d0
    }

    /// `None` where the denominator vanishes (the ratio is undefined there).
    pub fn eval(&self, h: T) -> Option<T> {
        let den = self.denominator(h);
        let scale = (self.d1 * h).abs() + self.d0.abs() + (self.n1 * h).abs() + self.n0.abs();
        if den == T::zero() || den.abs() <= T::epsilon() * T::lit(64.0) * scale {
            None
        } else {
            Some((self.n1 * h + self.n0) / den)
        }
    }
}

/// Feedback strategies of both players.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeedbackPolicy<T> {
    pub farmer: AffineRule<T>,
    pub retailer: AffineRule<T>,
    /// Only present in Stackelberg play.
    pub subsidy: Option<SubsidyRule<T>>,
}

/// Controls applied at a given state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Controls<T> {
    pub effort_f: T,
    pub effort_r: T,
    /// Subsidy ratio; `None` outside Stackelberg or where the rule is undefined.
    pub subsidy: Option<T>,
}

/// Anything that maps a reduction level to applied controls.
pub trait ClosedLoop<T: Scalar>: Sync {
    fn mode(&self) -> GameMode;

    fn controls(&self, h: T) -> Controls<T>;

    fn drift(&self, params: &ModelParams<T>, h: T) -> T {
        let c = self.controls(h);
        params.reduction_drift(h, c.effort_f, c.effort_r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    /// Coefficient equations collected from the substituted HJB equations.
    #[default]
    Residual,
    /// Printed closed-form coefficient expressions, evaluated verbatim.
    PaperClosedForm,
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Backend::Residual => "residual",
            Backend::PaperClosedForm => "paper-closed-form",
        })
    }
}

/// How the Stackelberg follower's first-order condition treats the subsidy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum FollowerConvention {
    /// `E_f = (eta H + mu_f V_f') / ((1 - x_f) lambda_f)`.
    #[default]
    StandardCostShare,
    /// `E_f = (eta H + mu_f V_f') / lambda_f` together with the printed
    /// substituted equations (extra `mu_f` on the squared sink term).
    PaperPrinted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics<T> {
    pub backend: Backend,
    pub convention: FollowerConvention,
    /// Largest HJB residual over the scan, normalised by `1 + |rho V|`.
    pub max_hjb_residual: T,
    /// Largest absolute residual of the collected coefficient equations.
    pub max_coefficient_residual: T,
    pub root_branch: String,
    /// Named discriminants met while solving.
    pub discriminants: Vec<(String, T)>,
    /// Alphas of every candidate root considered.
    pub candidate_alphas: Vec<T>,
    pub ambiguous_root: bool,
    pub iterations: usize,
    /// Steady state from the printed closed form, when that backend ran.
    pub printed_steady_state: Option<T>,
    /// Nonnegativity and subsidy-range violations on the operating range.
    pub flags: Vec<String>,
}

impl<T: Scalar> Diagnostics<T> {
    pub fn new(backend: Backend, convention: FollowerConvention) -> Self {
        Self {
            backend,
            convention,
            max_hjb_residual: T::zero(),
            max_coefficient_residual: T::zero(),
            root_branch: String::new(),
            discriminants: Vec::new(),
            candidate_alphas: Vec::new(),
            ambiguous_root: false,
            iterations: 0,
            printed_steady_state: None,
            flags: Vec::new(),
        }
    }
}

/// Equilibrium of one cooperation mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameSolution<T> {
    pub mode: GameMode,
    /// Farmer value in decentralized/Stackelberg play.
    pub farmer: Option<QuadraticValue<T>>,
    /// Retailer value in decentralized/Stackelberg play.
    pub retailer: Option<QuadraticValue<T>>,
    /// Supply-chain value in centralized play.
    pub joint: Option<QuadraticValue<T>>,
    pub policy: FeedbackPolicy<T>,
    /// Closed-loop drift is `alpha H + beta`.
    pub alpha: T,
    pub beta: T,
    pub steady_state: T,
    pub diagnostics: Diagnostics<T>,
}

impl<T: Scalar> GameSolution<T> {
    /// Value function of `role`. `Joint` is the sum of both roles outside
    /// centralized play; per-role values do not exist in centralized play.
    pub fn value(&self, role: Role) -> Result<QuadraticValue<T>> {
        let missing = || GameError::UnknownRole { role: role.to_string(), mode: self.mode.to_string() };
        match role {
            Role::Farmer => self.farmer.ok_or_else(missing),
            Role::Retailer => self.retailer.ok_or_else(missing),
            Role::Joint => match (self.joint, self.farmer, self.retailer) {
                (Some(j), _, _) => Ok(j),
                (None, Some(f), Some(r)) => Ok(QuadraticValue::new(Role::Joint, f.a + r.a, f.b + r.b, f.c + r.c)),
                _ => Err(missing()),
            },
        }
    }

    /// Roles that carry their own value function in this mode.
    pub fn roles(&self) -> Vec<Role> {
        match self.mode {
            GameMode::Centralized => vec![Role::Joint],
            _ => vec![Role::Farmer, Role::Retailer],
        }
    }

    pub fn value_at(&self, role: Role, h: T) -> Result<T> {
        self.value(role).map(|v| v.eval(h))
    }

    /// Upper end of the operating range used for policy checks.
    pub fn operating_max(&self, h0: T) -> T {
        (T::two() * self.steady_state).max(h0).max(T::one())
    }

    /// Flags negative efforts on `[0, h_max]` and, in Stackelberg play,
    /// subsidy ratios outside `[0, 1)` or an undefined ratio.
    pub fn range_flags(&self, h_max: T) -> Vec<String> {
        let mut flags = Vec::new();
        for (name, rule) in [("E_f", self.policy.farmer), ("E_r", self.policy.retailer)] {
            let lo = rule.eval(T::zero()).min(rule.eval(h_max));
            if lo < -T::epsilon() * T::lit(1e3) * (T::one() + rule.intercept.abs()) {
                flags.push(format!("{name} negative on [0, {h_max}] (min {lo})"));
            }
        }
        if let Some(rule) = self.policy.subsidy {
            let n = 200;
            let mut undefined = false;
            let mut outside = None;
            for i in 0..=n {
                let h = h_max * T::lit(i as f64 / n as f64);
                match rule.eval(h) {
                    None => undefined = true,
                    Some(x) if x < T::zero() || x >= T::one() => {
                        outside.get_or_insert((h, x));
                    }
                    _ => {}
                }
            }
            if undefined {
                flags.push(format!("x_f undefined (zero denominator) on [0, {h_max}]"));
            }
            if let Some((h, x)) = outside {
                flags.push(format!("x_f outside [0, 1) on [0, {h_max}] (x_f({h}) = {x})"));
            }
        }
        flags
    }
}

impl<T: Scalar> ClosedLoop<T> for GameSolution<T> {
    fn mode(&self) -> GameMode {
        self.mode
    }

    fn controls(&self, h: T) -> Controls<T> {
        Controls {
            effort_f: self.policy.farmer.eval(h),
            effort_r: self.policy.retailer.eval(h),
            subsidy: self.policy.subsidy.and_then(|s| s.eval(h)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_value_and_slope() {
        let v = QuadraticValue::new(Role::Farmer, 2.0, 3.0, 4.0);
        assert_eq!(v.eval(0.0), 4.0);
        assert_eq!(v.eval(1.0), 9.0);
        assert_eq!(v.slope(1.5), 9.0);
    }

    #[test]
    fn subsidy_rule_undefined_at_zero_denominator() {
        let r = SubsidyRule { n1: 0.0, n0: 0.0, d1: 0.0, d0: 0.0 };
        assert_eq!(r.eval(1.0), None);
        // equal marginal values with no sink revenue: (2m - m) / (2m + m)
        let m = 7.0_f64;
        let r = SubsidyRule { n1: 0.0, n0: 2.0 * m - m, d1: 0.0, d0: 2.0 * m + m };
        assert!((r.eval(3.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }
}
