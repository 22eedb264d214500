//! Coefficient equations obtained by substituting the quadratic/linear value
//! ansatz into each role's HJB equation and collecting powers of `H`.

use crate::model::{GameMode, ModelParams, Role};
use crate::num::Scalar;
use crate::solution::FollowerConvention;

/// `c0 + c1 H`.
#[derive(Debug, Clone, Copy)]
struct Lin<T> {
    c0: T,
    c1: T,
}

/// `c0 + c1 H + c2 H^2`.
#[derive(Debug, Clone, Copy)]
struct Quad<T> {
    c0: T,
    c1: T,
    c2: T,
}

impl<T: Scalar> Lin<T> {
    fn new(c0: T, c1: T) -> Self {
        Self { c0, c1 }
    }

    fn scale(self, k: T) -> Self {
        Self::new(self.c0 * k, self.c1 * k)
    }

    fn add(self, o: Self) -> Self {
        Self::new(self.c0 + o.c0, self.c1 + o.c1)
    }

    fn mul(self, o: Self) -> Quad<T> {
        Quad { c0: self.c0 * o.c0, c1: self.c0 * o.c1 + self.c1 * o.c0, c2: self.c1 * o.c1 }
    }

    fn quad(self) -> Quad<T> {
        Quad { c0: self.c0, c1: self.c1, c2: T::zero() }
    }
}

impl<T: Scalar> Quad<T> {
    fn scale(self, k: T) -> Self {
        Quad { c0: self.c0 * k, c1: self.c1 * k, c2: self.c2 * k }
    }

    fn add(self, o: Self) -> Self {
        Quad { c0: self.c0 + o.c0, c1: self.c1 + o.c1, c2: self.c2 + o.c2 }
    }

    fn coeff(&self, power: u8) -> T {
        match power {
            0 => self.c0,
            1 => self.c1,
            _ => self.c2,
        }
    }
}

type BalanceFn<T> = Box<dyn Fn(&[T]) -> (T, T) + Send + Sync>;

/// One collected balance: `rho * coefficient` on the left, the matching
/// power of the maximized right-hand side on the right.
pub struct Balance<T> {
    pub role: Role,
    pub power: u8,
    eval: BalanceFn<T>,
}

impl<T: Scalar> Balance<T> {
    /// `(lhs, rhs)` at the given unknowns.
    pub fn sides(&self, x: &[T]) -> (T, T) {
        (self.eval)(x)
    }

    pub fn residual(&self, x: &[T]) -> T {
        let (l, r) = self.sides(x);
        l - r
    }
}

/// The algebraic system a mode's value coefficients must satisfy.
pub struct CoefficientSystem<T> {
    pub mode: GameMode,
    pub unknowns: Vec<&'static str>,
    pub balances: Vec<Balance<T>>,
}

impl<T: Scalar> CoefficientSystem<T> {
    pub fn new(mode: GameMode, params: &ModelParams<T>, convention: FollowerConvention) -> Self {
        match mode {
            GameMode::Decentralized => decentralized(*params),
            GameMode::Stackelberg => stackelberg(*params, convention),
            GameMode::Centralized => centralized(*params),
        }
    }

    pub fn residuals(&self, x: &[T]) -> Vec<T> {
        self.balances.iter().map(|b| b.residual(x)).collect()
    }

    /// Largest `|lhs - rhs| / (1 + |lhs|)` over all balances.
    pub fn max_relative_residual(&self, x: &[T]) -> T {
        self.balances
            .iter()
            .map(|b| {
                let (l, r) = b.sides(x);
                (l - r).abs() / (T::one() + l.abs())
            })
            .fold(T::zero(), T::max)
    }
}

fn balances<T: Scalar>(
    role: Role,
    powers: &[u8],
    slot: &'static [usize],
    rho: T,
    rhs: impl Fn(&[T]) -> Quad<T> + Send + Sync + Clone + 'static,
) -> Vec<Balance<T>> {
    powers
        .iter()
        .map(|&power| {
            let rhs = rhs.clone();
            let idx = slot[power as usize];
            Balance { role, power, eval: Box::new(move |x: &[T]| (rho * x[idx], rhs(x).coeff(power))) }
        })
        .collect()
}

// unknowns: A, M, B, C, N
fn decentralized<T: Scalar>(p: ModelParams<T>) -> CoefficientSystem<T> {
    let k = p.derived();
    let farmer = move |x: &[T]| {
        let (a, m, b) = (x[0], x[1], x[2]);
        let vf = Lin::new(b, T::two() * a);
        let e_r = p.mu_r * m / p.lambda_r;
        let g = Lin::new(T::zero(), k.eta).add(vf.scale(p.mu_f));
        Lin::new(T::zero(), (p.p_f + p.p_c) * k.k1)
            .quad()
            .add(g.mul(g).scale(T::one() / (T::two() * p.lambda_f)))
            .add(vf.scale(p.mu_r * e_r).quad())
            .add(vf.mul(Lin::new(T::zero(), -p.delta)))
    };
    let retailer = move |x: &[T]| {
        let (a, m, b) = (x[0], x[1], x[2]);
        let vf = Lin::new(b, T::two() * a);
        let e_f = Lin::new(T::zero(), k.eta).add(vf.scale(p.mu_f)).scale(T::one() / p.lambda_f);
        let e_r = p.mu_r * m / p.lambda_r;
        let drift = e_f.scale(p.mu_f).add(Lin::new(p.mu_r * e_r, -p.delta));
        Lin::new(-T::half() * p.lambda_r * e_r * e_r, p.p_r * k.k2).quad().add(drift.scale(m).quad())
    };
    let mut bal = balances(Role::Farmer, &[2, 1, 0], &[3, 2, 0], p.rho, farmer);
    bal.extend(balances(Role::Retailer, &[1, 0], &[4, 1, 1], p.rho, retailer));
    CoefficientSystem { mode: GameMode::Decentralized, unknowns: vec!["A", "M", "B", "C", "N"], balances: bal }
}

// unknowns: A, M, B, N, C, F
fn stackelberg<T: Scalar>(p: ModelParams<T>, convention: FollowerConvention) -> CoefficientSystem<T> {
    let k = p.derived();
    // printed substituted equations carry mu_f on the squared sink term
    let sink_sq = match convention {
        FollowerConvention::StandardCostShare => T::one(),
        FollowerConvention::PaperPrinted => p.mu_f,
    };
    let extra = (sink_sq - T::one()) * k.eta * k.eta;
    let parts = move |x: &[T]| {
        let vf = Lin::new(x[2], T::two() * x[0]);
        let vr = Lin::new(x[3], T::two() * x[1]);
        let g = Lin::new(T::zero(), k.eta).add(vf.scale(p.mu_f));
        let s = g.add(vr.scale(T::two() * p.mu_f));
        (vf, vr, g, s)
    };
    let farmer = move |x: &[T]| {
        let (vf, vr, g, s) = parts(x);
        Lin::new(T::zero(), (p.p_f + p.p_c) * k.k1)
            .quad()
            .add(g.mul(s).scale(T::one() / (T::lit(4.0) * p.lambda_f)))
            .add(Quad { c0: T::zero(), c1: T::zero(), c2: extra / (T::lit(4.0) * p.lambda_f) })
            .add(vf.mul(vr).scale(p.mu_r * p.mu_r / p.lambda_r))
            .add(vf.mul(Lin::new(T::zero(), -p.delta)))
    };
    let leader = move |x: &[T]| {
        let (_, vr, _, s) = parts(x);
        Lin::new(T::zero(), p.p_r * k.k2)
            .quad()
            .add(vr.mul(vr).scale(p.mu_r * p.mu_r / (T::two() * p.lambda_r)))
            .add(s.mul(s).scale(T::one() / (T::lit(8.0) * p.lambda_f)))
            .add(Quad { c0: T::zero(), c1: T::zero(), c2: extra / (T::lit(8.0) * p.lambda_f) })
            .add(vr.mul(Lin::new(T::zero(), -p.delta)))
    };
    let mut bal = balances(Role::Farmer, &[2, 1, 0], &[4, 2, 0], p.rho, farmer);
    bal.extend(balances(Role::Retailer, &[2, 1, 0], &[5, 3, 1], p.rho, leader));
    CoefficientSystem { mode: GameMode::Stackelberg, unknowns: vec!["A", "M", "B", "N", "C", "F"], balances: bal }
}

// unknowns: A, B, C
fn centralized<T: Scalar>(p: ModelParams<T>) -> CoefficientSystem<T> {
    let k = p.derived();
    let joint = move |x: &[T]| {
        let v = Lin::new(x[1], T::two() * x[0]);
        let g = Lin::new(T::zero(), k.eta).add(v.scale(p.mu_f));
        Lin::new(T::zero(), (p.p_f + p.p_c) * k.k1 + p.p_r * k.k2)
            .quad()
            .add(g.mul(g).scale(T::one() / (T::two() * p.lambda_f)))
            .add(v.mul(v).scale(p.mu_r * p.mu_r / (T::two() * p.lambda_r)))
            .add(v.mul(Lin::new(T::zero(), -p.delta)))
    };
    CoefficientSystem {
        mode: GameMode::Centralized,
        unknowns: vec!["A", "B", "C"],
        balances: balances(Role::Joint, &[2, 1, 0], &[2, 1, 0], p.rho, joint),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_balance_per_role_and_power() {
        let p = ModelParams::<f64>::baseline();
        let conv = FollowerConvention::StandardCostShare;
        let shape =
            |m| CoefficientSystem::new(m, &p, conv).balances.iter().map(|b| (b.role, b.power)).collect::<Vec<_>>();
        assert_eq!(
            shape(GameMode::Decentralized),
            [(Role::Farmer, 2), (Role::Farmer, 1), (Role::Farmer, 0), (Role::Retailer, 1), (Role::Retailer, 0)]
        );
        assert_eq!(shape(GameMode::Stackelberg).len(), 6);
        assert_eq!(shape(GameMode::Centralized), [(Role::Joint, 2), (Role::Joint, 1), (Role::Joint, 0)]);
    }

    #[test]
    fn decentralized_quadratic_matches_hand_collection() {
        // rho A = eta^2/(2 lf) + 2A(mu_f eta/lf - delta) + 2 A^2 mu_f^2 / lf
        let p = ModelParams::<f64>::baseline();
        let sys = CoefficientSystem::new(GameMode::Decentralized, &p, FollowerConvention::default());
        for a in [0.0, 1.0, 3.5] {
            let r = sys.balances[0].residual(&[a, 0.0, 0.0, 0.0, 0.0]);
            let hand = -(0.009 * a * a - 2.34 * a + 3.6);
            assert!((r - hand).abs() < 1e-12, "{r} vs {hand}");
        }
    }

    #[test]
    fn residuals_are_finite() {
        let p = ModelParams::<f64>::baseline();
        for m in GameMode::ALL {
            let sys = CoefficientSystem::new(m, &p, FollowerConvention::PaperPrinted);
            let x = vec![1.25; sys.unknowns.len()];
            assert!(sys.residuals(&x).iter().all(|r| r.is_finite()));
        }
    }
}
