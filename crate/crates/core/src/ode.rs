//! Adaptive Dormand–Prince 5(4) integrator.
//!
//! Every requested target time is hit exactly and the stage cache is reset
//! there, so callers can pass discontinuities of the right-hand side as
//! targets and integrate piecewise-smooth systems without losing order.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Tolerances and safeguards for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct OdeConfig<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    /// Any monitored component exceeding this magnitude counts as a blow-up.
    pub blow_up_bound: T,
    pub max_steps: usize,
}

impl<T: Scalar> Default for OdeConfig<T> {
    fn default() -> Self {
        // 1e-10 is only meaningful in double precision.
        let tol = T::c(1e-10).max(T::epsilon() * T::c(1e3));
        Self {
            abs_tol: tol,
            rel_tol: tol,
            blow_up_bound: T::c(1e8),
            max_steps: 1_000_000,
        }
    }
}

pub trait OdeSystem<T: Scalar> {
    fn dim(&self) -> usize;

    fn rhs(&self, t: T, y: &[T], dy: &mut [T]);

    /// Components checked against [`OdeConfig::blow_up_bound`].
    fn monitored(&self) -> Range<usize> {
        0..self.dim()
    }
}

// Dormand–Prince tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Tableau<T> {
    c: [T; 7],
    a: [[T; 6]; 7],
    e: [T; 7],
}

impl<T: Scalar> Tableau<T> {
    fn new() -> Self {
        Self {
            c: C.map(T::c),
            a: A.map(|row| row.map(T::c)),
            e: E.map(T::c),
        }
    }
}

fn rms_norm<T: Scalar>(v: &[T], scale: &[T]) -> T {
    let n = T::from_usize_lossy(v.len().max(1));
    let s: T = v
        .iter()
        .zip(scale)
        .map(|(&x, &s)| {
            let r = x / s;
            r * r
        })
        .sum();
    (s / n).sqrt()
}

/// Integrates `sys` forward from `(t0, y0)` through the ascending `targets`,
/// calling `emit(i, y)` with the state at `targets[i]`. Returns the final state.
pub fn integrate<T, S, F>(
    sys: &S,
    t0: T,
    y0: &[T],
    targets: &[T],
    cfg: &OdeConfig<T>,
    mut emit: F,
) -> Result<Vec<T>>
where
    T: Scalar,
    S: OdeSystem<T> + ?Sized,
    F: FnMut(usize, &[T]),
{
    let n = sys.dim();
    debug_assert_eq!(y0.len(), n);
    let tab = Tableau::<T>::new();
    let monitored = sys.monitored();

    let mut y = y0.to_vec();
    let mut t = t0;
    let mut k: Vec<Vec<T>> = vec![vec![T::zero(); n]; 7];
    let mut tmp = vec![T::zero(); n];
    let mut y_new = vec![T::zero(); n];
    let mut err = vec![T::zero(); n];
    let mut scale = vec![T::zero(); n];
    let mut steps = 0usize;
    let mut h_next: Option<T> = None;

    for (idx, &target) in targets.iter().enumerate() {
        if target < t {
            return Err(Error::invalid("integration targets must be ascending"));
        }
        if target == t {
            emit(idx, &y);
            continue;
        }
        // Fresh derivative at each segment start: the rhs may jump at targets.
        sys.rhs(t, &y, &mut k[0]);
        let mut h = match h_next {
            Some(h) => h,
            None => {
                let (k0, rest) = k.split_at_mut(1);
                initial_step(sys, t, &y, &k0[0], cfg, &mut tmp, &mut rest[0])
            }
        };
        loop {
            let remaining = target - t;
            if remaining <= T::zero() {
                break;
            }
            let last = h >= remaining;
            let h_try = if last { remaining } else { h };
            let min_step = T::epsilon() * T::c(16.0) * t.abs().max(T::one());
            if h_try < min_step && !last {
                return Err(Error::DomainViolation { blow_up_time: t.to_f64_lossy() });
            }
            steps += 1;
            if steps > cfg.max_steps {
                return Err(Error::DomainViolation { blow_up_time: t.to_f64_lossy() });
            }

            for s in 1..7 {
                for i in 0..n {
                    let mut acc = y[i];
                    for j in 0..s {
                        if tab.a[s][j] != T::zero() {
                            acc = acc + h_try * tab.a[s][j] * k[j][i];
                        }
                    }
                    tmp[i] = acc;
                }
                sys.rhs(t + tab.c[s] * h_try, &tmp, &mut k[s]);
                if s == 6 {
                    y_new.copy_from_slice(&tmp);
                }
            }
            for i in 0..n {
                let mut e = T::zero();
                for s in 0..7 {
                    e = e + tab.e[s] * k[s][i];
                }
                err[i] = h_try * e;
                scale[i] = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y_new[i].abs());
            }
            let err_norm = rms_norm(&err, &scale);
            if !err_norm.is_finite() {
                // Overflowed inside the stages; retry smaller before declaring blow-up.
                h = h_try * T::c(0.1);
                continue;
            }
            if err_norm <= T::one() {
                t = if last { target } else { t + h_try };
                y.copy_from_slice(&y_new);
                for i in monitored.clone() {
                    if !y[i].is_finite() || y[i].abs() > cfg.blow_up_bound {
                        return Err(Error::DomainViolation { blow_up_time: t.to_f64_lossy() });
                    }
                }
                // FSAL: last stage is the derivative at the new point.
                let (first, rest) = k.split_at_mut(1);
                first[0].copy_from_slice(&rest[5]);
                let fac = if err_norm == T::zero() {
                    T::c(5.0)
                } else {
                    (T::c(0.9) * err_norm.powf(T::c(-0.2))).min(T::c(5.0)).max(T::c(0.2))
                };
                if !last {
                    h = h_try * fac;
                } else {
                    h_next = Some((h_try * fac).max(h));
                }
            } else {
                let fac = (T::c(0.9) * err_norm.powf(T::c(-0.2))).max(T::c(0.2));
                h = h_try * fac.min(T::one());
            }
        }
        emit(idx, &y);
    }
    Ok(y)
}

fn initial_step<T, S>(sys: &S, t: T, y: &[T], f0: &[T], cfg: &OdeConfig<T>, tmp: &mut [T], f1: &mut [T]) -> T
where
    T: Scalar,
    S: OdeSystem<T> + ?Sized,
{
    let scale: Vec<T> = y.iter().map(|v| cfg.abs_tol + cfg.rel_tol * v.abs()).collect();
    let d0 = rms_norm(y, &scale);
    let d1 = rms_norm(f0, &scale);
    let h0 = if d0 < T::c(1e-5) || d1 < T::c(1e-5) {
        T::c(1e-6)
    } else {
        T::c(0.01) * d0 / d1
    };
    for i in 0..y.len() {
        tmp[i] = y[i] + h0 * f0[i];
    }
    sys.rhs(t + h0, tmp, f1);
    let diff: Vec<T> = f1.iter().zip(f0).map(|(&a, &b)| a - b).collect();
    let d2 = rms_norm(&diff, &scale) / h0;
    let h1 = if d1.max(d2) <= T::c(1e-15) {
        (h0 * T::c(1e-3)).max(T::c(1e-6))
    } else {
        (T::c(0.01) / d1.max(d2)).powf(T::c(0.2))
    };
    (h0 * T::c(100.0)).min(h1)
}
