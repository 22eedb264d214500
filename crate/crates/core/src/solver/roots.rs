//! Scalar and two-dimensional root finding plus stable-branch selection.

use crate::error::{GameError, Result};
use crate::num::Scalar;

/// Real roots of `c2 x^2 + c1 x + c0 = 0` with `c2 != 0`, smaller first.
///
/// Uses the cancellation-free form `q = -(c1 + sign(c1) sqrt(disc)) / 2`.
pub fn quadratic_roots<T: Scalar>(c2: T, c1: T, c0: T, context: &str) -> Result<(T, T, T)> {
    let disc = c1 * c1 - T::lit(4.0) * c2 * c0;
    if disc < T::zero() || !disc.is_finite() {
        return Err(GameError::ComplexRoot { context: context.to_string(), discriminant: disc.as_f64() });
    }
    let sq = disc.sqrt();
    let q = -T::half() * (c1 + c1.signum() * sq);
    let (r1, r2) = if q == T::zero() { (T::zero(), T::zero()) } else { (q / c2, c0 / q) };
    Ok((r1.min(r2), r1.max(r2), disc))
}

/// A candidate root together with the closed-loop drift slope it induces.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate<T, C> {
    pub coefficients: C,
    pub alpha: T,
    /// Magnitude used to break ties between stable candidates.
    pub size: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection<T, C> {
    pub chosen: Candidate<T, C>,
    pub index: usize,
    pub ambiguous: bool,
}

/// Picks the candidate with a negative drift slope. When several are stable
/// the one with the smallest `size` wins and the choice is marked ambiguous.
pub fn select_stable_root<T: Scalar, C: Clone>(
    candidates: &[Candidate<T, C>],
    context: &str,
) -> Result<Selection<T, C>> {
    let stable: Vec<usize> = (0..candidates.len()).filter(|&i| candidates[i].alpha < T::zero()).collect();
    let Some(&first) = stable.first() else {
        return Err(GameError::UnstableModel {
            context: context.to_string(),
            alphas: candidates.iter().map(|c| c.alpha.as_f64()).collect(),
        });
    };
    let index =
        stable.iter().copied().fold(first, |best, i| if candidates[i].size < candidates[best].size { i } else { best });
    Ok(Selection { chosen: candidates[index].clone(), index, ambiguous: stable.len() > 1 })
}

/// Damped Newton iteration for a 2x2 system with an analytic Jacobian.
///
/// Returns the root and the number of iterations; the step is halved until
/// the residual norm decreases.
pub fn newton2<T, F, J>(f: F, jac: J, start: [T; 2], tol: T, max_iter: usize) -> Option<([T; 2], usize)>
where
    T: Scalar,
    F: Fn([T; 2]) -> ([T; 2], T),
    J: Fn([T; 2]) -> [[T; 2]; 2],
{
    let norm = |x: [T; 2]| -> T {
        let (r, scale) = f(x);
        r[0].abs().max(r[1].abs()) / (T::one() + scale)
    };
    let mut x = start;
    let mut current = norm(x);
    for it in 0..max_iter {
        if current <= tol {
            return Some((x, it));
        }
        let (r, _) = f(x);
        let j = jac(x);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == T::zero() || !det.is_finite() {
            return None;
        }
        let dx = [(r[0] * j[1][1] - r[1] * j[0][1]) / det, (j[0][0] * r[1] - j[1][0] * r[0]) / det];
        let mut step = T::one();
        let mut accepted = false;
        for _ in 0..40 {
            let trial = [x[0] - step * dx[0], x[1] - step * dx[1]];
            let n = norm(trial);
            if n.is_finite() && n < current {
                x = trial;
                current = n;
                accepted = true;
                break;
            }
            step = step * T::half();
        }
        if !accepted {
            return if current <= tol * T::lit(1e3) { Some((x, it)) } else { None };
        }
    }
    (current <= tol).then_some((x, max_iter))
}

/// Bisection root of a continuous function with a sign change on `[lo, hi]`.
pub fn bisect<T: Scalar>(f: impl Fn(T) -> T, mut lo: T, mut hi: T, tol: T) -> Option<T> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == T::zero() {
        return Some(lo);
    }
    if fhi == T::zero() {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    for _ in 0..400 {
        let mid = T::half() * (lo + hi);
        if hi - lo <= tol || mid == lo || mid == hi {
            return Some(mid);
        }
        let fm = f(mid);
        if fm == T::zero() {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(T::half() * (lo + hi))
}
