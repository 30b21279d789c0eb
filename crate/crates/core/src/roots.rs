//! Safeguarded Newton iteration for monotone scalar equations.

use crate::error::Result;
use crate::scalar::Scalar;

/// Result of evaluating a root-finding target.
pub(crate) enum Eval<T> {
    /// Function value and derivative.
    Value(T, T),
    /// The point lies past a singularity on the positive side.
    Overflow,
}

/// Root of a non-increasing `f` on `[lo, hi]` with `f(lo) >= 0 >= f(hi)`.
///
/// Newton steps are taken when they stay inside the current bracket and
/// bisection otherwise. `Overflow` counts as a positive value.
pub(crate) fn decreasing_root<T, F>(mut f: F, mut lo: T, mut hi: T, start: Option<T>, tol: T) -> Result<T>
where
    T: Scalar,
    F: FnMut(T) -> Result<Eval<T>>,
{
    let half = T::c(0.5);
    let mut x = start.filter(|&s| s > lo && s < hi).unwrap_or(half * (lo + hi));
    for _ in 0..200 {
        match f(x)? {
            Eval::Overflow => {
                lo = x;
                x = half * (lo + hi);
            }
            Eval::Value(v, dv) => {
                if v == T::zero() {
                    return Ok(x);
                }
                if v > T::zero() {
                    lo = x;
                } else {
                    hi = x;
                }
                let newton = if dv < T::zero() { x - v / dv } else { T::nan() };
                let next = if newton > lo && newton < hi { newton } else { half * (lo + hi) };
                let scale = T::one() + x.abs();
                if (next - x).abs() <= tol * scale {
                    return Ok(next);
                }
                x = next;
            }
        }
        if hi - lo <= tol * (T::one() + lo.abs()) {
            return Ok(half * (lo + hi));
        }
    }
    Ok(x)
}
