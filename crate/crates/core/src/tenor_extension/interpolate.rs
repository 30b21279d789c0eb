//! Interpolating functions `U: [0, T_N] → R^d_{≥0}` through the fitted `u_l`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::affine_core::AffineModelSpec;
use crate::error::{Error, Result};
use crate::multicurve::{log_m0, Manifold, MulticurveModel};
use crate::roots::{decreasing_root, Eval};
use crate::scalar::{dot, Scalar};
use crate::tenor_extension::forward_curve::ForwardCurve;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InterpolatorKind {
    /// Fit of the whole initial forward curve along the manifold.
    If1,
    /// Linear between consecutive `u_l`.
    If2,
    /// Cubic spline where a single component moves, linear elsewhere.
    If3,
}

impl InterpolatorKind {
    pub const ALL: [InterpolatorKind; 3] = [Self::If1, Self::If2, Self::If3];

    pub fn label(self) -> &'static str {
        match self {
            Self::If1 => "if1",
            Self::If2 => "if2",
            Self::If3 => "if3",
        }
    }
}

impl fmt::Display for InterpolatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for InterpolatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "if1" => Ok(Self::If1),
            "if2" => Ok(Self::If2),
            "if3" => Ok(Self::If3),
            other => Err(Error::invalid(format!("unknown interpolator `{other}`"))),
        }
    }
}

/// How `u` moves across one master interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntervalClass {
    Flat,
    /// Only this component changes.
    Run(usize),
    /// Several components change.
    Curved,
}

#[derive(Debug, Clone, Copy)]
enum End<T> {
    Natural,
    Clamped(T),
}

/// Slopes of the cubic spline through equidistant `y` with spacing `h`.
fn spline_slopes<T: Scalar>(h: T, y: &[T], left: End<T>, right: End<T>) -> Vec<T> {
    let n = y.len() - 1;
    let three = T::c(3.0);
    let d: Vec<T> = y.windows(2).map(|w| (w[1] - w[0]) / h).collect();
    // Tridiagonal rows a·m_{j−1} + b·m_j + c·m_{j+1} = r.
    let mut a = vec![T::zero(); n + 1];
    let mut b = vec![T::zero(); n + 1];
    let mut c = vec![T::zero(); n + 1];
    let mut r = vec![T::zero(); n + 1];
    match left {
        End::Natural => {
            b[0] = T::c(2.0);
            c[0] = T::one();
            r[0] = three * d[0];
        }
        End::Clamped(m) => {
            b[0] = T::one();
            r[0] = m;
        }
    }
    for j in 1..n {
        a[j] = T::one();
        b[j] = T::c(4.0);
        c[j] = T::one();
        r[j] = three * (d[j - 1] + d[j]);
    }
    match right {
        End::Natural => {
            a[n] = T::one();
            b[n] = T::c(2.0);
            r[n] = three * d[n - 1];
        }
        End::Clamped(m) => {
            b[n] = T::one();
            r[n] = m;
        }
    }
    for j in 1..=n {
        let w = a[j] / b[j - 1];
        b[j] = b[j] - w * c[j - 1];
        r[j] = r[j] - w * r[j - 1];
    }
    let mut m = vec![T::zero(); n + 1];
    m[n] = r[n] / b[n];
    for j in (0..n).rev() {
        m[j] = (r[j] - c[j] * m[j + 1]) / b[j];
    }
    m
}

/// Fritsch–Carlson slopes for equidistant data.
fn pchip_slopes<T: Scalar>(h: T, y: &[T], left: End<T>, right: End<T>) -> Vec<T> {
    let n = y.len() - 1;
    let d: Vec<T> = y.windows(2).map(|w| (w[1] - w[0]) / h).collect();
    let mut m = vec![T::zero(); n + 1];
    for j in 1..n {
        if d[j - 1] * d[j] > T::zero() {
            m[j] = T::c(2.0) / (T::one() / d[j - 1] + T::one() / d[j]);
        }
    }
    let end = |d0: T, d1: Option<T>| -> T {
        let Some(d1) = d1 else { return d0 };
        let mut v = T::c(0.5) * (T::c(3.0) * d0 - d1);
        if v * d0 <= T::zero() {
            v = T::zero();
        } else if d0 * d1 <= T::zero() && v.abs() > T::c(3.0) * d0.abs() {
            v = T::c(3.0) * d0;
        }
        v
    };
    m[0] = match left {
        End::Clamped(v) => v,
        End::Natural => end(d[0], d.get(1).copied()),
    };
    m[n] = match right {
        End::Clamped(v) => v,
        End::Natural => end(d[n - 1], if n >= 2 { Some(d[n - 2]) } else { None }),
    };
    m
}

/// Largest value of the derivative of the cubic Hermite piece on `[0, h]`.
fn hermite_max_slope<T: Scalar>(h: T, y0: T, y1: T, m0: T, m1: T) -> T {
    // h·p'(s) = A s² + B s + C on s ∈ [0, 1].
    let a = T::c(6.0) * (y0 - y1) + T::c(3.0) * h * (m0 + m1);
    let b = T::c(-6.0) * (y0 - y1) - h * (T::c(4.0) * m0 + T::c(2.0) * m1);
    let c = h * m0;
    let mut best = c.max(a + b + c);
    if a < T::zero() {
        let s = -b / (T::c(2.0) * a);
        if s > T::zero() && s < T::one() {
            best = best.max(a * s * s + b * s + c);
        }
    }
    best / h
}

fn hermite<T: Scalar>(h: T, s: T, y0: T, y1: T, m0: T, m1: T) -> (T, T) {
    let s2 = s * s;
    let s3 = s2 * s;
    let two = T::c(2.0);
    let three = T::c(3.0);
    let h00 = two * s3 - three * s2 + T::one();
    let h10 = s3 - two * s2 + s;
    let h01 = -two * s3 + three * s2;
    let h11 = s3 - s2;
    let v = h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1;
    let six = T::c(6.0);
    let dv = ((six * s2 - six * s) * y0 + (three * s2 - T::c(4.0) * s + T::one()) * h * m0 + (six * s - six * s2) * y1
        + (three * s2 - two * s) * h * m1)
        / h;
    (v, dv)
}

/// Manifold parameter as a function of maturity, solving the curve-fit equation.
#[derive(Debug, Clone)]
struct CurveFit<T> {
    model: AffineModelSpec<T>,
    manifold: Manifold<T>,
    curve: ForwardCurve<T>,
    total: T,
    /// `(T, s(T), s'(T))`, increasing in `T`.
    nodes: Vec<(T, T, T)>,
}

const CURVE_TOL: f64 = 1e-10;

impl<T: Scalar> CurveFit<T> {
    fn target(&self, t: T) -> T {
        self.total - self.curve.cumulative(t)
    }

    fn residual(&self, t: T, s: T) -> Result<T> {
        let (v, _) = log_m0(&self.model, self.model.horizon(), &self.manifold.point(s))?;
        Ok(v - self.target(t))
    }

    fn solve(&self, t: T, lo: T, hi: T, start: Option<T>) -> Result<T> {
        let y = self.target(t);
        let t_n = self.model.horizon();
        decreasing_root(
            |s: T| {
                Ok(match log_m0(&self.model, t_n, &self.manifold.point(s)) {
                    Ok((v, g)) => Eval::Value(v - y, dot(&g, &self.manifold.tangent(s))),
                    Err(Error::DomainViolation { .. }) => Eval::Overflow,
                    Err(e) => return Err(e),
                })
            },
            lo,
            hi,
            start,
            T::c(1e-15),
        )
    }

    /// `s'(T) = −f̃(T) / ⟨∇ log M_0, g'(s)⟩`.
    fn slope(&self, t: T, s: T) -> Result<T> {
        let (_, g) = log_m0(&self.model, self.model.horizon(), &self.manifold.point(s))?;
        let den = dot(&g, &self.manifold.tangent(s));
        if !(den < T::zero()) {
            return Err(Error::Fit { maturity: t.to_f64_lossy(), reason: "manifold tangent is not transversal".into() });
        }
        Ok(-self.curve.value(t) / den)
    }

    fn build(
        model: AffineModelSpec<T>,
        manifold: Manifold<T>,
        curve: ForwardCurve<T>,
        dates: &[T],
        knot_params: &[T],
    ) -> Result<Self> {
        let t_n = *dates.last().expect("nonempty grid");
        let total = curve.cumulative(t_n);
        let mut fit = Self { model, manifold, curve, total, nodes: Vec::new() };
        let per = 4;
        let mut nodes = Vec::new();
        for l in 0..dates.len() - 1 {
            let (a, b) = (dates[l], dates[l + 1]);
            nodes.push((a, knot_params[l], fit.slope(a, knot_params[l])?));
            let mut prev = knot_params[l];
            for j in 1..per {
                let t = a + (b - a) * T::from_usize_lossy(j) / T::from_usize_lossy(per);
                let s = fit.solve(t, prev, knot_params[l + 1], None)?;
                nodes.push((t, s, fit.slope(t, s)?));
                prev = s;
            }
        }
        let last = dates.len() - 1;
        nodes.push((t_n, knot_params[last], fit.slope(t_n, knot_params[last])?));

        // Refine until the Hermite midpoint meets the residual tolerance.
        let mut out = vec![nodes[0]];
        let mut stack: Vec<((T, T, T), (T, T, T), usize)> = nodes.windows(2).rev().map(|w| (w[0], w[1], 0)).collect();
        while let Some((p, q, depth)) = stack.pop() {
            let h = q.0 - p.0;
            let mid = p.0 + T::c(0.5) * h;
            let (guess, _) = hermite(h, T::c(0.5), p.1, q.1, p.2, q.2);
            let res = fit.residual(mid, guess.max(p.1).min(q.1))?;
            if res.abs() <= T::c(CURVE_TOL) || depth >= 30 {
                out.push(q);
                continue;
            }
            let s = fit.solve(mid, p.1, q.1, Some(guess))?;
            let m = (mid, s, fit.slope(mid, s)?);
            stack.push((m, q, depth + 1));
            stack.push((p, m, depth + 1));
        }
        fit.nodes = out;
        Ok(fit)
    }

    fn param(&self, t: T) -> Result<T> {
        let j = self.nodes.partition_point(|n| n.0 <= t).clamp(1, self.nodes.len() - 1);
        let (p, q) = (self.nodes[j - 1], self.nodes[j]);
        if t == p.0 {
            return Ok(p.1);
        }
        if t == q.0 {
            return Ok(q.1);
        }
        let h = q.0 - p.0;
        let (guess, _) = hermite(h, (t - p.0) / h, p.1, q.1, p.2, q.2);
        if p.1 == q.1 {
            return Ok(p.1);
        }
        self.solve(t, p.1, q.1, Some(guess))
    }
}

/// Continuous, componentwise non-increasing `U` with `U(T_l) = u_l`.
#[derive(Debug, Clone)]
pub struct InterpolatingFunction<T> {
    kind: InterpolatorKind,
    dates: Vec<T>,
    u: Vec<Vec<T>>,
    classes: Vec<IntervalClass>,
    /// Per master interval, the derivative just after its left date and just before its right date.
    slopes: Vec<(Vec<T>, Vec<T>)>,
    fit: Option<Box<CurveFit<T>>>,
    monotone_fallback: bool,
}

impl<T: Scalar> InterpolatingFunction<T> {
    /// Builds an interpolator through the fitted `u` sequence. IF1 needs the
    /// initial forward curve, which must reprice the initial bonds.
    pub fn build(kind: InterpolatorKind, mc: &MulticurveModel<T>, curve: Option<&ForwardCurve<T>>) -> Result<Self> {
        let seq = mc.sequences();
        let dates = mc.tenor().dates();
        let mut this = Self::from_points(kind, dates.clone(), seq.u.clone())?;
        if kind == InterpolatorKind::If1 {
            let curve = curve.ok_or_else(|| Error::invalid("IF1 needs an initial forward curve"))?;
            curve.check(mc.tenor(), mc.initial(), T::c(1e-8))?;
            if !seq.manifold.is_c1() {
                return Err(Error::invalid("IF1 needs a C¹ manifold"));
            }
            let fit = CurveFit::build(mc.model().clone(), seq.manifold.clone(), curve.clone(), &dates, &seq.u_params)?;
            this.fit = Some(Box::new(fit));
        }
        Ok(this)
    }

    /// Piecewise-polynomial interpolator (IF2 or IF3) through arbitrary points.
    pub fn from_points(kind: InterpolatorKind, dates: Vec<T>, u: Vec<Vec<T>>) -> Result<Self> {
        if dates.len() < 2 || dates.len() != u.len() {
            return Err(Error::invalid("need matching dates and values, at least two"));
        }
        let d = u[0].len();
        for (l, w) in u.windows(2).enumerate() {
            crate::error::check_dim(d, w[1].len())?;
            if w[0].iter().zip(&w[1]).any(|(&a, &b)| b > a) {
                return Err(Error::invalid(format!("u is not non-increasing between dates {l} and {}", l + 1)));
            }
        }
        if u.iter().flatten().any(|&x| x < T::zero()) {
            return Err(Error::invalid("u must be nonnegative"));
        }
        let n = dates.len() - 1;
        let classes: Vec<IntervalClass> = u
            .windows(2)
            .map(|w| {
                let moving: Vec<usize> = (0..d)
                    .filter(|&c| (w[0][c] - w[1][c]).abs() > T::c(1e-12) * (T::one() + w[0][c].abs()))
                    .collect();
                match moving.len() {
                    0 => IntervalClass::Flat,
                    1 => IntervalClass::Run(moving[0]),
                    _ => IntervalClass::Curved,
                }
            })
            .collect();
        let chord = |l: usize| -> Vec<T> {
            let h = dates[l + 1] - dates[l];
            (0..d).map(|c| (u[l + 1][c] - u[l][c]) / h).collect()
        };
        let mut slopes: Vec<(Vec<T>, Vec<T>)> = (0..n).map(|l| (chord(l), chord(l))).collect();
        let mut monotone_fallback = false;
        if kind == InterpolatorKind::If3 {
            let mut l = 0;
            while l < n {
                let IntervalClass::Run(c) = classes[l] else {
                    l += 1;
                    continue;
                };
                let mut e = l;
                while e + 1 < n && classes[e + 1] == IntervalClass::Run(c) {
                    e += 1;
                }
                let end_for = |neighbour: Option<IntervalClass>| match neighbour {
                    None | Some(IntervalClass::Curved) => End::Natural,
                    _ => End::Clamped(T::zero()),
                };
                let left = end_for(if l == 0 { None } else { Some(classes[l - 1]) });
                let right = end_for(classes.get(e + 1).copied());
                let h = dates[l + 1] - dates[l];
                let y: Vec<T> = (l..=e + 1).map(|k| u[k][c]).collect();
                let mut m = spline_slopes(h, &y, left, right);
                let tol = T::c(1e-12) * (T::one() + y[0].abs()) / h;
                let bad = (0..y.len() - 1).any(|j| hermite_max_slope(h, y[j], y[j + 1], m[j], m[j + 1]) > tol);
                if bad {
                    m = pchip_slopes(h, &y, left, right);
                    monotone_fallback = true;
                }
                for (j, k) in (l..=e).enumerate() {
                    let mut a = vec![T::zero(); d];
                    let mut b = vec![T::zero(); d];
                    a[c] = m[j];
                    b[c] = m[j + 1];
                    slopes[k] = (a, b);
                }
                l = e + 1;
            }
        }
        Ok(Self { kind, dates, u, classes, slopes, fit: None, monotone_fallback })
    }

    pub fn kind(&self) -> InterpolatorKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.u[0].len()
    }

    pub fn dates(&self) -> &[T] {
        &self.dates
    }

    pub fn knot_values(&self) -> &[Vec<T>] {
        &self.u
    }

    pub fn horizon(&self) -> T {
        *self.dates.last().expect("nonempty")
    }

    pub fn interval_classes(&self) -> &[IntervalClass] {
        &self.classes
    }

    /// Whether a spline run failed the monotonicity check and was replaced by
    /// a monotone Hermite interpolant.
    pub fn monotone_fallback(&self) -> bool {
        self.monotone_fallback
    }

    /// Node times of the IF1 fitting grid.
    pub fn fitting_grid(&self) -> Option<Vec<T>> {
        self.fit.as_ref().map(|f| f.nodes.iter().map(|n| n.0).collect())
    }

    /// `log M_0^{U(T)} − ∫_T^{T_N} f̃` for IF1.
    pub fn curve_residual(&self, t: T) -> Result<Option<T>> {
        match &self.fit {
            None => Ok(None),
            Some(f) => {
                let u = self.value(t)?;
                let (v, _) = log_m0(&f.model, f.model.horizon(), &u)?;
                Ok(Some(v - f.target(t)))
            }
        }
    }

    fn interval(&self, t: T) -> Result<usize> {
        let t_n = self.horizon();
        if !(t >= T::zero() && t <= t_n) {
            return Err(Error::invalid(format!("time {} outside [0, T_N]", t.to_f64_lossy())));
        }
        let l = self.dates.partition_point(|&d| d <= t);
        Ok(l.saturating_sub(1).min(self.dates.len() - 2))
    }

    fn knot_at(&self, t: T) -> Option<usize> {
        self.dates.binary_search_by(|d| d.partial_cmp(&t).expect("finite time")).ok()
    }

    pub fn value(&self, t: T) -> Result<Vec<T>> {
        let l = self.interval(t)?;
        if let Some(k) = self.knot_at(t) {
            return Ok(self.u[k].clone());
        }
        if let Some(f) = &self.fit {
            return Ok(f.manifold.point(f.param(t)?));
        }
        let h = self.dates[l + 1] - self.dates[l];
        let s = (t - self.dates[l]) / h;
        let (m0, m1) = &self.slopes[l];
        Ok((0..self.dim()).map(|c| hermite(h, s, self.u[l][c], self.u[l + 1][c], m0[c], m1[c]).0).collect())
    }

    /// `dU/dt` from the right (`right = true`) or from the left. At the ends
    /// of `[0, T_N]` the only available side is used.
    pub fn derivative_side(&self, t: T, right: bool) -> Result<Vec<T>> {
        let mut l = self.interval(t)?;
        let knot = self.knot_at(t);
        if let Some(f) = &self.fit {
            let s = f.param(t)?;
            let rate = f.slope(t, s)?;
            return Ok(f.manifold.tangent(s).into_iter().map(|g| g * rate).collect());
        }
        if !right {
            if let Some(k) = knot {
                if k > 0 {
                    l = k - 1;
                }
            }
        }
        let h = self.dates[l + 1] - self.dates[l];
        let s = ((t - self.dates[l]) / h).max(T::zero()).min(T::one());
        let (m0, m1) = &self.slopes[l];
        Ok((0..self.dim()).map(|c| hermite(h, s, self.u[l][c], self.u[l + 1][c], m0[c], m1[c]).1).collect())
    }

    /// Right-hand derivative `dU/dt+`; at `T_N` the left derivative.
    pub fn derivative(&self, t: T) -> Result<Vec<T>> {
        self.derivative_side(t, true)
    }

    /// Samples `n` points per master interval and errors unless `U` is
    /// non-increasing (strictly decreasing in some component if `strict`).
    pub fn check_monotone(&self, n: usize, strict: bool) -> Result<()> {
        let mut prev = self.value(T::zero())?;
        for l in 0..self.dates.len() - 1 {
            for j in 1..=n.max(1) {
                let t = self.dates[l] + (self.dates[l + 1] - self.dates[l]) * T::from_usize_lossy(j) / T::from_usize_lossy(n.max(1));
                let cur = self.value(t)?;
                let tol = T::c(1e-12);
                if cur.iter().zip(&prev).any(|(&a, &b)| a > b + tol) {
                    return Err(Error::invalid(format!("U increases near t = {}", t.to_f64_lossy())));
                }
                if strict && cur == prev {
                    return Err(Error::invalid(format!("U is flat near t = {}", t.to_f64_lossy())));
                }
                prev = cur;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dates(n: usize) -> Vec<f64> {
        (0..=n).map(|l| 0.25 * l as f64).collect()
    }

    #[test]
    fn linear_hits_knots_and_is_chordal() {
        let u = vec![vec![1.0, 0.5], vec![0.6, 0.5], vec![0.0, 0.2], vec![0.0, 0.0]];
        let f = InterpolatingFunction::from_points(InterpolatorKind::If2, dates(3), u.clone()).unwrap();
        for (l, ul) in u.iter().enumerate() {
            assert_eq!(&f.value(0.25 * l as f64).unwrap(), ul);
        }
        let mid = f.value(0.125).unwrap();
        assert!((mid[0] - 0.8).abs() < 1e-15 && (mid[1] - 0.5).abs() < 1e-15);
        assert_eq!(f.derivative(0.25).unwrap(), vec![-2.4, -1.2]);
        assert_eq!(f.derivative_side(0.25, false).unwrap(), vec![-1.6, 0.0]);
        assert_eq!(f.derivative(0.75).unwrap(), vec![0.0, -0.8]);
    }

    #[test]
    fn spline_runs_are_c1_and_linear_on_curved_stretches() {
        // Run in component 0, a curved step, then a run in component 1.
        let u = vec![
            vec![2.0, 1.0],
            vec![1.5, 1.0],
            vec![1.1, 1.0],
            vec![0.9, 0.8],
            vec![0.9, 0.5],
            vec![0.9, 0.2],
            vec![0.9, 0.0],
        ];
        let f = InterpolatingFunction::from_points(InterpolatorKind::If3, dates(6), u).unwrap();
        assert_eq!(
            f.interval_classes(),
            &[IntervalClass::Run(0), IntervalClass::Run(0), IntervalClass::Curved, IntervalClass::Run(1), IntervalClass::Run(1), IntervalClass::Run(1)]
        );
        let l = f.derivative_side(0.25, false).unwrap();
        let r = f.derivative(0.25).unwrap();
        assert!((l[0] - r[0]).abs() < 1e-12);
        let mid = f.value(0.625).unwrap();
        assert!((mid[0] - 1.0).abs() < 1e-15 && (mid[1] - 0.9).abs() < 1e-15);
        f.check_monotone(50, false).unwrap();
    }

    #[test]
    fn orthogonal_runs_clamp_to_zero() {
        let u = vec![vec![1.0, 1.0, 1.0], vec![0.0, 1.0, 1.0], vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 0.0]];
        let f = InterpolatingFunction::from_points(InterpolatorKind::If3, dates(3), u).unwrap();
        for t in [0.25, 0.5] {
            assert!(f.derivative(t).unwrap().iter().all(|&x| x == 0.0));
            assert!(f.derivative_side(t, false).unwrap().iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn overshooting_spline_falls_back() {
        let u = vec![vec![1.0], vec![0.99], vec![0.98], vec![0.0]];
        let f = InterpolatingFunction::from_points(InterpolatorKind::If3, dates(3), u).unwrap();
        assert!(f.monotone_fallback());
        f.check_monotone(200, false).unwrap();
    }

    #[test]
    fn rejects_increasing_points() {
        assert!(InterpolatingFunction::from_points(InterpolatorKind::If2, dates(1), vec![vec![0.1], vec![0.2]]).is_err());
    }

    #[test]
    fn kind_parses() {
        assert_eq!("IF3".parse::<InterpolatorKind>().unwrap(), InterpolatorKind::If3);
        assert!("if4".parse::<InterpolatorKind>().is_err());
    }
}
