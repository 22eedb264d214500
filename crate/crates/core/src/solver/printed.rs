//! Printed closed-form coefficient expressions, evaluated as they stand.
//!
//! Undefined subscripts are read as `s -> f` (farmer) and `m -> r`
//! (retailer). Nothing here is corrected: sign slips and cross-mode
//! references are kept so the discrepancy against the residual backend can
//! be reported. Effort rules are rebuilt from the model's first-order
//! conditions using the printed coefficients.

use super::{centralized_policy, decentralized_policy, finish, stackelberg_policy, Assembly, SolverConfig};
use crate::error::{GameError, Result};
use crate::model::{GameMode, ModelParams, Role};
use crate::num::Scalar;
use crate::solution::{Backend, Diagnostics, GameSolution, QuadraticValue};

fn sqrt_checked<T: Scalar>(disc: T, context: &str) -> Result<T> {
    if disc < T::zero() || disc.is_nan() {
        return Err(GameError::ComplexRoot { context: context.into(), discriminant: disc.as_f64() });
    }
    Ok(disc.sqrt())
}

/// Discriminant of the printed decentralized farmer curvature.
pub fn delta_gd<T: Scalar>(p: &ModelParams<T>) -> T {
    let eta = p.derived().eta;
    let four = T::lit(4.0);
    let x = four * p.mu_f * eta - four * p.lambda_f * p.delta - T::two() * p.rho * p.lambda_f;
    let y = four * p.mu_f * eta;
    x * x - y * y
}

/// Discriminant of the printed centralized curvature.
pub fn delta_gc<T: Scalar>(p: &ModelParams<T>) -> T {
    let eta = p.derived().eta;
    let (lf, lr, mf, mr, rho, d) = (p.lambda_f, p.lambda_r, p.mu_f, p.mu_r, p.rho, p.delta);
    let four = T::lit(4.0);
    let r2d = rho - T::two() * d;
    four * lr * eta * eta * (T::two() * lr * mf * mf + lf * mr * mr + lr * lr * lf * r2d * (four * eta * mf + r2d))
}

/// Discriminant inside the printed farmer Stackelberg curvature, given `M`.
pub fn delta_gs1<T: Scalar>(p: &ModelParams<T>, m: T) -> T {
    let eta = p.derived().eta;
    let (lf, lr, mf, mr, rho, d) = (p.lambda_f, p.lambda_r, p.mu_f, p.mu_r, p.rho, p.delta);
    let (two, four, eight) = (T::two(), T::lit(4.0), T::lit(8.0));
    let rho2 = rho * rho;
    let rho3 = rho2 * rho;
    let mf2 = mf * mf;
    let lrd = lf * rho * d;
    two * (mf * eta * rho).powi(2)
        + two * eta * lf * mf * rho2 * (rho2 - two * d)
        + lf * rho3 * (lf * rho3 + four * m * mf2 - four * lf * rho * d)
        + four * m * m * mf2 * mf2
        - eight * m * lf * rho * d * mf2
        + four * lf * lf
        + four * lrd * lrd
        + eight
            * m
            * mr
            * mr
            * lf
            * (lr * rho * eta + lf * lr * rho3 + two * m * mf2 * lr + two * m * mr * mr * lf - two * lr * lf * rho * d)
}

/// Discriminant inside the printed retailer Stackelberg curvature, given `A`.
pub fn delta_gs2<T: Scalar>(p: &ModelParams<T>, a: T) -> T {
    let k = p.derived();
    let (lf, lr, mf, mr, rho, d) = (p.lambda_f, p.lambda_r, p.mu_f, p.mu_r, p.rho, p.delta);
    let (two, four) = (T::two(), T::lit(4.0));
    let rho2 = rho * rho;
    let rho3 = rho2 * rho;
    let w = k.k2 * p.p_c * p.omega;
    two * lr * (w * rho).powi(2) * (lr * mf * mf + lf)
        + two * w * lr * lf * rho * (lr * rho3 * mf - two * a * mr * mr - two * lr * rho * d)
        + four * lr * lf * rho2 * (rho3 + rho2 * d + d * d)
        + four * a * lr * lf * mf * mf * (lr * rho3 - a * mr * mr - two * lr * rho * d)
}

struct CentralizedPrinted<T> {
    a: T,
    b: T,
    c: T,
    disc: T,
}

fn centralized_coefficients<T: Scalar>(p: &ModelParams<T>) -> Result<CentralizedPrinted<T>> {
    let k = p.derived();
    let (lf, lr, mf, mr) = (p.lambda_f, p.lambda_r, p.mu_f, p.mu_r);
    let reach = lr * mf * mf + lf * mr * mr;
    let disc = delta_gc(p);
    let root = sqrt_checked(disc, "printed centralized curvature")?;
    let a = (T::two() * p.delta * lf - p.rho * lf - T::two() * lr * mf * k.eta - root) / (T::lit(4.0) * reach);
    let b = lf * lr * ((p.p_c + p.p_f) * k.k1 + p.p_r * k.k2)
        / (lf * lr * (p.rho - p.delta) - k.eta * lr * mf - T::two() * a * reach);
    let c = b * b * reach / (T::two() * lr * lf * p.rho);
    Ok(CentralizedPrinted { a, b, c, disc })
}

pub(crate) fn decentralized<T: Scalar>(p: &ModelParams<T>, cfg: &SolverConfig<T>) -> Result<GameSolution<T>> {
    let k = p.derived();
    let (lf, lr, mf, mr, rho) = (p.lambda_f, p.lambda_r, p.mu_f, p.mu_r, p.rho);
    let mut diag = Diagnostics::new(Backend::PaperClosedForm, cfg.convention);
    let disc = delta_gd(p);
    diag.discriminants.push(("printed_delta_gd".into(), disc));
    let root = sqrt_checked(disc, "printed decentralized farmer curvature")?;
    diag.root_branch = "minus-sqrt".into();

    let four = T::lit(4.0);
    let a = (T::two() * rho * lf + four * lf * p.delta - four * mf * k.eta - root) / (T::lit(8.0) * mf * mf);
    let m = p.p_r * k.k2 * lf / (k.eta * mf + T::two() * a * mf * mf + lf * rho - p.delta * lf);
    let b = -((T::two() * lr * lr * a * m + k.k1 * lr * p.p_c + k.k1 * lr * p.p_f) * lf)
        / (lr * (p.p_c * p.omega * k.k1 * mf + T::two() * a * mf * mf - lf * rho - p.delta * lf));
    let c = b * (lf * lf * lr * b + T::two() * m * lr * lr * lf) / (T::two() * lr * lf * rho);
    let n = m * (T::two() * lr * mf * mf * b + m * mr * mr * lf) / (T::two() * lr * lf * rho);
    diag.printed_steady_state =
        Some((lr * mf * b + lf * mr * m) / (lf * lr * p.delta - T::two() * a * mf * lr - k.eta * mf * lr));

    finish(
        Assembly {
            mode: GameMode::Decentralized,
            farmer: Some(QuadraticValue::new(Role::Farmer, a, b, c)),
            retailer: Some(QuadraticValue::new(Role::Retailer, T::zero(), m, n)),
            joint: None,
            policy: decentralized_policy(p, a, b, m),
            unknowns: vec![a, m, b, c, n],
            diagnostics: diag,
        },
        p,
        cfg,
    )
}

pub(crate) fn centralized<T: Scalar>(p: &ModelParams<T>, cfg: &SolverConfig<T>) -> Result<GameSolution<T>> {
    let k = p.derived();
    let mut diag = Diagnostics::new(Backend::PaperClosedForm, cfg.convention);
    diag.discriminants.push(("printed_delta_gc".into(), delta_gc(p)));
    let CentralizedPrinted { a, b, c, .. } = centralized_coefficients(p)?;
    diag.root_branch = "minus-sqrt".into();
    let (lf, lr, mf, mr) = (p.lambda_f, p.lambda_r, p.mu_f, p.mu_r);
    let mix = lf * mr + lr * mf;
    diag.printed_steady_state = Some(mix * b / (lf * lr * p.delta - lr * k.eta - T::two() * mix * a));

    finish(
        Assembly {
            mode: GameMode::Centralized,
            farmer: None,
            retailer: None,
            joint: Some(QuadraticValue::new(Role::Joint, a, b, c)),
            policy: centralized_policy(p, a, b),
            unknowns: vec![a, b, c],
            diagnostics: diag,
        },
        p,
        cfg,
    )
}

pub(crate) fn stackelberg<T: Scalar>(p: &ModelParams<T>, cfg: &SolverConfig<T>) -> Result<GameSolution<T>> {
    let k = p.derived();
    let (lf, lr, mf, mr, rho, d) = (p.lambda_f, p.lambda_r, p.mu_f, p.mu_r, p.rho, p.delta);
    let (two, four, eight) = (T::two(), T::lit(4.0), T::lit(8.0));
    let rho3 = rho * rho * rho;
    let reach = lr * mf * mf + lf * mr * mr;
    let mut diag = Diagnostics::new(Backend::PaperClosedForm, cfg.convention);

    // the printed A and M refer to each other: iterate from zero
    let base = two * lr * lf * rho * d - k.eta * lr * rho * mf - lr * lf * rho3;
    let a_of = |m: T| -> Result<(T, T)> {
        let disc = delta_gs1(p, m);
        let root = sqrt_checked(disc, "printed Stackelberg farmer curvature")?;
        Ok(((base - two * mf * mf * lr * m - four * mr * mr * lf * m - root) / (two * mf * mf * lr), disc))
    };
    let m_of = |a: T| -> Result<(T, T)> {
        let disc = delta_gs2(p, a);
        let root = sqrt_checked(disc, "printed Stackelberg retailer curvature")?;
        Ok(((base - two * a * lr * mf * mf - root) / (four * reach), disc))
    };
    let (mut a, mut m) = (T::zero(), T::zero());
    let mut converged = false;
    let mut step = T::infinity();
    for it in 1..=cfg.max_iterations {
        let (m_next, d2) = m_of(a)?;
        let (a_next, d1) = a_of(m_next)?;
        step = (a_next - a).abs().max((m_next - m).abs());
        a = a_next;
        m = m_next;
        diag.iterations = it;
        diag.discriminants = vec![("printed_delta_gs1".into(), d1), ("printed_delta_gs2".into(), d2)];
        if step <= cfg.root_tolerance * (T::one() + a.abs() + m.abs()) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(GameError::NoConvergence {
            context: "printed Stackelberg curvature fixed point".into(),
            iterations: cfg.max_iterations,
            residual: step.as_f64(),
        });
    }
    diag.root_branch = "minus-sqrt".into();

    // the printed linear coefficient takes its curvature from centralized play
    let gc = centralized_coefficients(p)?;
    diag.discriminants.push(("printed_delta_gc".into(), gc.disc));
    let b = lf * lr * ((p.p_c + p.p_f) * k.k1 + p.p_r * k.k2)
        / (lf * lr * (rho - d) - k.eta * lr * mf - two * gc.a * reach);
    let n =
        two * lr * mf * mf * b * (a + two * m - four * lr * lf * p.p_r * rho * rho * k.k2 - k.eta * lr * mf * rho * b)
            / (four * rho3 * lf * lr - two * k.eta * mf * rho * lr
                + four * lf * lr * d * rho
                + four * mf * mf * lr * (a + two * m)
                + eight * mr * mr * lf * m);
    let c = (mf * mf * lr * b * b + (four * mr * mr * lf + two * mf * mf * lr) * b * n) / (four * rho3 * lf * lr);
    let f = (mf * mf * lr * (b * b + four * n * b) + four * reach * n * n) / (eight * rho3 * lr * lf);
    diag.printed_steady_state = Some(
        (two * (lf * rho * mr + lr * mf) * n + lr * mf * b)
            / (four * lr * mf * m - rho * lr * k.eta - four * lf * mr * rho * m - two * lr * mf * a
                + two * lr * lf * rho * d),
    );

    finish(
        Assembly {
            mode: GameMode::Stackelberg,
            farmer: Some(QuadraticValue::new(Role::Farmer, a, b, c)),
            retailer: Some(QuadraticValue::new(Role::Retailer, m, n, f)),
            joint: None,
            policy: stackelberg_policy(p, [a, m, b, n], cfg.convention),
            unknowns: vec![a, m, b, n, c, f],
            diagnostics: diag,
        },
        p,
        cfg,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printed_farmer_curvature_matches_collected_quadratic() {
        let p = ModelParams::<f64>::baseline();
        let cfg = SolverConfig { backend: Backend::PaperClosedForm, ..SolverConfig::default() };
        let s = decentralized(&p, &cfg).unwrap();
        assert!((s.farmer.unwrap().a - 1.5476742133487205).abs() < 1e-12);
        // printed retailer marginal value has the wrong sign
        assert!(s.retailer.unwrap().b < 0.0);
        assert!(s.diagnostics.max_coefficient_residual > 1e-3);
    }

    #[test]
    fn printed_centralized_discriminant_is_negative_at_baseline() {
        let p = ModelParams::<f64>::baseline();
        assert!(delta_gc(&p) < 0.0);
        assert!(matches!(centralized_coefficients(&p), Err(GameError::ComplexRoot { .. })));
    }

    #[test]
    fn printed_stackelberg_fixed_point_hits_complex_root() {
        let p = ModelParams::<f64>::baseline();
        assert!(delta_gs2(&p, 0.0) < 0.0);
        let cfg = SolverConfig { backend: Backend::PaperClosedForm, ..SolverConfig::default() };
        assert!(matches!(stackelberg(&p, &cfg), Err(GameError::ComplexRoot { .. })));
    }
}
