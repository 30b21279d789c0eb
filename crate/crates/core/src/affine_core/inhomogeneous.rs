use std::ops::Range;

use crate::affine_core::model::AffineModelSpec;
use crate::error::{check_dim, Error, Result};
use crate::ode::{integrate, OdeConfig, OdeSystem};
use crate::scalar::Scalar;

/// Functional characteristics `F(t, u)`, `R(t, u)` depending on calendar time.
pub trait TimeDependentCharacteristics<T: Scalar>: Sync {
    fn dim(&self) -> usize;

    fn f(&self, t: T, u: &[T]) -> T;

    fn r(&self, t: T, u: &[T], out: &mut [T]);

    /// Times at which the characteristics may be discontinuous or kinked.
    fn breakpoints(&self) -> Vec<T> {
        Vec::new()
    }

    /// Which state coordinates count towards the blow-up bound.
    fn monitored(&self) -> Range<usize> {
        0..self.dim()
    }
}

impl<T: Scalar> TimeDependentCharacteristics<T> for AffineModelSpec<T> {
    fn dim(&self) -> usize {
        AffineModelSpec::dim(self)
    }

    fn f(&self, _t: T, u: &[T]) -> T {
        self.f_value(u)
    }

    fn r(&self, _t: T, u: &[T], out: &mut [T]) {
        self.r_into(u, out)
    }
}

/// Piecewise-constant vector function, right-continuous: `values[j]` holds on
/// `[times[j], times[j + 1])` and the last value extends to infinity.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstant<T> {
    times: Vec<T>,
    values: Vec<Vec<T>>,
}

impl<T: Scalar> PiecewiseConstant<T> {
    pub fn new(times: Vec<T>, values: Vec<Vec<T>>) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(Error::invalid("need one value per breakpoint"));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("breakpoints must be strictly increasing"));
        }
        let d = values[0].len();
        for v in &values {
            check_dim(d, v.len())?;
        }
        Ok(Self { times, values })
    }

    pub fn constant(start: T, value: Vec<T>) -> Self {
        Self { times: vec![start], values: vec![value] }
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn values(&self) -> &[Vec<T>] {
        &self.values
    }

    pub fn at(&self, t: T) -> &[T] {
        let j = self.times.partition_point(|&s| s <= t);
        &self.values[j.saturating_sub(1)]
    }
}

/// Characteristics of `(X, Y)` with `Y_t = ∫_0^t θ_s ∘ X_s ds`.
#[derive(Debug, Clone)]
pub struct ExtendedCharacteristics<T> {
    spec: AffineModelSpec<T>,
    theta: PiecewiseConstant<T>,
}

pub fn extended_characteristics<T: Scalar>(
    spec: &AffineModelSpec<T>,
    theta: PiecewiseConstant<T>,
) -> Result<ExtendedCharacteristics<T>> {
    check_dim(spec.dim(), theta.dim())?;
    for v in theta.values() {
        if v.iter().any(|&x| !(x >= T::zero()) || !x.is_finite()) {
            return Err(Error::invalid("weight function must be finite and nonnegative"));
        }
    }
    Ok(ExtendedCharacteristics { spec: spec.clone(), theta })
}

impl<T: Scalar> ExtendedCharacteristics<T> {
    pub fn model(&self) -> &AffineModelSpec<T> {
        &self.spec
    }

    pub fn theta(&self) -> &PiecewiseConstant<T> {
        &self.theta
    }
}

impl<T: Scalar> TimeDependentCharacteristics<T> for ExtendedCharacteristics<T> {
    fn dim(&self) -> usize {
        2 * self.spec.dim()
    }

    fn f(&self, _t: T, u: &[T]) -> T {
        self.spec.f_value(&u[..self.spec.dim()])
    }

    fn r(&self, t: T, u: &[T], out: &mut [T]) {
        let d = self.spec.dim();
        let (ux, uy) = u.split_at(d);
        let (rx, ry) = out.split_at_mut(d);
        self.spec.r_into(ux, rx);
        let th = self.theta.at(t);
        for i in 0..d {
            rx[i] = rx[i] + th[i] * uy[i];
            ry[i] = T::zero();
        }
    }

    fn breakpoints(&self) -> Vec<T> {
        self.theta.times().to_vec()
    }

    fn monitored(&self) -> Range<usize> {
        0..self.spec.dim()
    }
}

struct BackwardSegment<'a, T, C: ?Sized> {
    chars: &'a C,
    t_end: T,
    // Evaluation times are clamped into the open segment so a right-continuous
    // coefficient is read from the interval being integrated.
    lo: T,
    hi: T,
}

impl<T: Scalar, C: TimeDependentCharacteristics<T> + ?Sized> OdeSystem<T> for BackwardSegment<'_, T, C> {
    fn dim(&self) -> usize {
        1 + self.chars.dim()
    }

    fn rhs(&self, tau: T, y: &[T], dy: &mut [T]) {
        let s = (self.t_end - tau).max(self.lo).min(self.hi);
        dy[0] = self.chars.f(s, &y[1..]);
        self.chars.r(s, &y[1..], &mut dy[1..]);
    }

    fn monitored(&self) -> Range<usize> {
        let m = self.chars.monitored();
        m.start + 1..m.end + 1
    }
}

/// `(φ_{s,t}(u), ψ_{s,t}(u))` for time-dependent characteristics, integrated
/// backward in `s` from the terminal values `(0, u)` at `s = t`.
pub fn solve_riccati_inhomogeneous<T, C>(chars: &C, s: T, t: T, u: &[T], cfg: &OdeConfig<T>) -> Result<(T, Vec<T>)>
where
    T: Scalar,
    C: TimeDependentCharacteristics<T> + ?Sized,
{
    check_dim(chars.dim(), u.len())?;
    if !(s <= t) {
        return Err(Error::invalid("need s <= t"));
    }
    let mut cuts: Vec<T> = chars.breakpoints().into_iter().filter(|&b| b > s && b < t).collect();
    cuts.sort_by(|a, b| b.partial_cmp(a).expect("finite breakpoints"));
    cuts.dedup();
    let mut y = Vec::with_capacity(1 + u.len());
    y.push(T::zero());
    y.extend_from_slice(u);
    let mut upper = t;
    for lower in cuts.into_iter().chain(std::iter::once(s)) {
        if lower >= upper {
            continue;
        }
        let width = upper - lower;
        let nudge = width * T::c(1e-12);
        let seg = BackwardSegment { chars, t_end: upper, lo: lower + nudge, hi: upper - nudge };
        y = integrate(&seg, T::zero(), &y, &[width], cfg, |_, _| {}).map_err(|e| match e {
            Error::DomainViolation { blow_up_time } => Error::DomainViolation {
                blow_up_time: upper.to_f64_lossy() - blow_up_time,
            },
            e => e,
        })?;
        upper = lower;
    }
    let phi = y[0];
    y.remove(0);
    Ok((phi, y))
}
