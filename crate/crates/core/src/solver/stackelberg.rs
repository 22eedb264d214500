use super::roots::{newton2, select_stable_root, Candidate};
use super::{finish, printed, stackelberg_policy, Assembly, SolverConfig};
use crate::error::{GameError, Result};
use crate::model::{GameMode, ModelParams, Role};
use crate::num::Scalar;
use crate::solution::{Backend, Diagnostics, FollowerConvention, GameSolution, QuadraticValue};

/// Leader-follower play: the retailer leads with promotion effort and a
/// subsidy ratio on the farmer's effort cost, the farmer follows.
pub fn solve_stackelberg<T: Scalar>(params: &ModelParams<T>, cfg: &SolverConfig<T>) -> Result<GameSolution<T>> {
    cfg.validate()?;
    let p = params.validate()?;
    match cfg.backend {
        Backend::Residual => residual(&p, cfg),
        Backend::PaperClosedForm => printed::stackelberg(&p, cfg),
    }
}

/// The coupled H^2 balances in `(A, M)` and their Jacobian.
struct QuadraticPair<T> {
    p: ModelParams<T>,
    eta: T,
    /// Additional constant on the squared sink term (zero for the standard convention).
    extra: T,
}

impl<T: Scalar> QuadraticPair<T> {
    fn new(p: &ModelParams<T>, convention: FollowerConvention) -> Self {
        let eta = p.derived().eta;
        let factor = match convention {
            FollowerConvention::StandardCostShare => T::one(),
            FollowerConvention::PaperPrinted => p.mu_f,
        };
        Self { p: *p, eta, extra: (factor - T::one()) * eta * eta }
    }

    fn slopes(&self, a: T, m: T) -> (T, T) {
        let ga = self.eta + T::two() * self.p.mu_f * a;
        (ga, ga + T::lit(4.0) * self.p.mu_f * m)
    }

    fn eval(&self, [a, m]: [T; 2]) -> ([T; 2], T) {
        let p = &self.p;
        let (ga, sa) = self.slopes(a, m);
        let lf4 = T::lit(4.0) * p.lambda_f;
        let lf8 = T::lit(8.0) * p.lambda_f;
        let mr2 = p.mu_r * p.mu_r / p.lambda_r;
        let decay = T::two() * p.delta + p.rho;
        let fa = (ga * sa + self.extra) / lf4 + T::lit(4.0) * mr2 * a * m - decay * a;
        let fm = (sa * sa + self.extra) / lf8 + T::two() * mr2 * m * m - decay * m;
        let scale = decay * (a.abs() + m.abs()) + self.eta * self.eta / lf8;
        ([fa, fm], scale)
    }

    fn jacobian(&self, [a, m]: [T; 2]) -> [[T; 2]; 2] {
        let p = &self.p;
        let (ga, sa) = self.slopes(a, m);
        let lf4 = T::lit(4.0) * p.lambda_f;
        let mr2 = p.mu_r * p.mu_r / p.lambda_r;
        let decay = T::two() * p.delta + p.rho;
        let two_mu = T::two() * p.mu_f;
        let four_mu = T::lit(4.0) * p.mu_f;
        [
            [two_mu * (sa + ga) / lf4 + T::lit(4.0) * mr2 * m - decay, four_mu * ga / lf4 + T::lit(4.0) * mr2 * a],
            [two_mu * sa / lf4, four_mu * sa / lf4 + T::lit(4.0) * mr2 * m - decay],
        ]
    }
}

/// Drift slope induced by `(A, M)` under a follower convention.
fn alpha_of<T: Scalar>(p: &ModelParams<T>, convention: FollowerConvention, a: T, m: T) -> T {
    let eta = p.derived().eta;
    let ga = eta + T::two() * p.mu_f * a;
    let farmer = match convention {
        FollowerConvention::StandardCostShare => (ga + T::lit(4.0) * p.mu_f * m) / (T::two() * p.lambda_f),
        FollowerConvention::PaperPrinted => ga / p.lambda_f,
    };
    p.mu_f * farmer + T::two() * p.mu_r * p.mu_r * m / p.lambda_r - p.delta
}

fn seeds<T: Scalar>(p: &ModelParams<T>) -> Vec<[T; 2]> {
    // decentralized farmer curvature first
    let mut out = Vec::new();
    let dec = super::solve_decentralized(p, &SolverConfig::default());
    out.push([dec.map(|s| s.farmer.map(|f| f.a).unwrap_or(T::zero())).unwrap_or(T::zero()), T::zero()]);
    let scale = (T::two() * p.delta + p.rho) * p.lambda_f / (p.mu_f * p.mu_f);
    let grid = [-0.5, 0.0, 0.1, 0.25, 0.5, 1.0];
    for ga in grid {
        for gm in grid {
            out.push([scale * T::lit(ga), scale * T::lit(gm)]);
        }
    }
    out
}

fn residual<T: Scalar>(p: &ModelParams<T>, cfg: &SolverConfig<T>) -> Result<GameSolution<T>> {
    let k = p.derived();
    let conv = cfg.convention;
    let mut diag = Diagnostics::new(Backend::Residual, conv);
    let pair = QuadraticPair::new(p, conv);

    let mut roots: Vec<[T; 2]> = Vec::new();
    let mut iterations = 0;
    for (i, seed) in seeds(p).into_iter().enumerate() {
        let Some((x, it)) =
            newton2(|x| pair.eval(x), |x| pair.jacobian(x), seed, cfg.root_tolerance, cfg.max_iterations)
        else {
            continue;
        };
        if i == 0 {
            iterations = it;
        }
        let dup = roots.iter().any(|r| {
            let tol = T::lit(1e-7) * (T::one() + r[0].abs() + r[1].abs());
            (r[0] - x[0]).abs() <= tol && (r[1] - x[1]).abs() <= tol
        });
        if !dup {
            roots.push(x);
        }
    }
    if roots.is_empty() {
        let (r, _) = pair.eval([T::zero(), T::zero()]);
        return Err(GameError::NoConvergence {
            context: "Stackelberg (A, M) balances".into(),
            iterations: cfg.max_iterations,
            residual: r[0].abs().max(r[1].abs()).as_f64(),
        });
    }
    diag.iterations = iterations;
    let cands: Vec<_> = roots
        .iter()
        .map(|&[a, m]| Candidate { coefficients: [a, m], alpha: alpha_of(p, conv, a, m), size: a.abs() })
        .collect();
    diag.candidate_alphas = cands.iter().map(|c| c.alpha).collect();
    let sel = select_stable_root(&cands, "Stackelberg (A, M) balances")?;
    diag.ambiguous_root = sel.ambiguous;
    let [a, m] = sel.chosen.coefficients;
    diag.root_branch = format!("stable root {} of {}", sel.index + 1, cands.len());
    diag.discriminants.push(("printed_delta_gs1".into(), printed::delta_gs1(p, m)));
    diag.discriminants.push(("printed_delta_gs2".into(), printed::delta_gs2(p, a)));

    // linear H^1 balances in (B, N)
    let (ga, sa) = pair.slopes(a, m);
    let mu = p.mu_f;
    let lf4 = T::lit(4.0) * p.lambda_f;
    let mr2 = p.mu_r * p.mu_r / p.lambda_r;
    let rd = p.rho + p.delta;
    let m11 = rd - mu * (ga + sa) / lf4 - T::two() * mr2 * m;
    let m12 = -T::two() * mu * ga / lf4 - T::two() * mr2 * a;
    let m21 = -mu * sa / lf4;
    let m22 = rd - T::two() * mr2 * m - T::two() * mu * sa / lf4;
    let r1 = (p.p_f + p.p_c) * k.k1;
    let r2 = p.p_r * k.k2;
    let det = m11 * m22 - m12 * m21;
    if det == T::zero() || !det.is_finite() {
        return Err(GameError::NoConvergence {
            context: "Stackelberg linear (B, N) balances are singular".into(),
            iterations: 0,
            residual: f64::INFINITY,
        });
    }
    let b = (r1 * m22 - m12 * r2) / det;
    let n = (m11 * r2 - m21 * r1) / det;
    let gb = mu * b;
    let sb = mu * (b + T::two() * n);
    let c = (gb * sb / lf4 + mr2 * b * n) / p.rho;
    let f = (mr2 * n * n / T::two() + sb * sb / (T::lit(8.0) * p.lambda_f)) / p.rho;

    finish(
        Assembly {
            mode: GameMode::Stackelberg,
            farmer: Some(QuadraticValue::new(Role::Farmer, a, b, c)),
            retailer: Some(QuadraticValue::new(Role::Retailer, m, n, f)),
            joint: None,
            policy: stackelberg_policy(p, [a, m, b, n], conv),
            unknowns: vec![a, m, b, n, c, f],
            diagnostics: diag,
        },
        p,
        cfg,
    )
}
