//! Curves in the nonnegative orthant along which the `u` and `v` sequences are fitted.
//!
//! Segments are stored outward from the origin. The public parameter `s`
//! runs the other way, `g(0)` being the far end and `g(s_max)` the origin, so
//! `g` is componentwise non-increasing in `s`.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Segment<T> {
    /// `start + τ·direction` for `τ ∈ [0, length]`; `direction` is nonnegative.
    Line { start: Vec<T>, direction: Vec<T>, length: T },
    /// Quarter ellipse `start + r_a sin θ e_a + r_b (1 − cos θ) e_b`,
    /// `θ ∈ [0, π/2]`, tangent to `e_a` at its start and to `e_b` at its end.
    Arc { start: Vec<T>, axis_a: usize, axis_b: usize, r_a: T, r_b: T },
}

impl<T: Scalar> Segment<T> {
    fn start(&self) -> &[T] {
        match self {
            Segment::Line { start, .. } | Segment::Arc { start, .. } => start,
        }
    }

    /// Parameter length; for arcs the mean radius times `π/2`.
    pub fn length(&self) -> T {
        match self {
            Segment::Line { length, .. } => *length,
            Segment::Arc { r_a, r_b, .. } => T::FRAC_PI_2() * T::c(0.5) * (*r_a + *r_b),
        }
    }

    /// Point and derivative with respect to the outward parameter `τ`.
    fn eval(&self, tau: T) -> (Vec<T>, Vec<T>) {
        match self {
            Segment::Line { start, direction, .. } => {
                let p = start.iter().zip(direction).map(|(&s, &d)| s + tau * d).collect();
                (p, direction.clone())
            }
            Segment::Arc { start, axis_a, axis_b, r_a, r_b } => {
                let len = self.length();
                let k = T::FRAC_PI_2() / len;
                let th = tau * k;
                let (sn, cs) = th.sin_cos();
                let mut p = start.clone();
                p[*axis_a] = p[*axis_a] + *r_a * sn;
                p[*axis_b] = p[*axis_b] + *r_b * (T::one() - cs);
                let mut dp = vec![T::zero(); start.len()];
                dp[*axis_a] = k * *r_a * cs;
                dp[*axis_b] = k * *r_b * sn;
                (p, dp)
            }
        }
    }

    fn end(&self) -> Vec<T> {
        self.eval(self.length()).0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifold<T> {
    segments: Vec<Segment<T>>,
    /// Cumulative outward parameter at each segment start, plus the total.
    offsets: Vec<T>,
}

impl<T: Scalar> Manifold<T> {
    pub fn new(segments: Vec<Segment<T>>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::invalid("manifold needs at least one segment"));
        }
        let d = segments[0].start().len();
        let tol = T::c(1e-9);
        if segments[0].start().iter().any(|&x| x.abs() > tol) {
            return Err(Error::invalid("manifold must end at the origin"));
        }
        for (j, seg) in segments.iter().enumerate() {
            check_dim(d, seg.start().len())?;
            match seg {
                Segment::Line { direction, length, .. } => {
                    check_dim(d, direction.len())?;
                    if direction.iter().any(|&x| x < T::zero()) || direction.iter().all(|&x| x == T::zero()) {
                        return Err(Error::invalid(format!("segment {j}: direction must be nonnegative and nonzero")));
                    }
                    if !(*length > T::zero()) {
                        return Err(Error::invalid(format!("segment {j}: length must be positive")));
                    }
                }
                Segment::Arc { axis_a, axis_b, r_a, r_b, .. } => {
                    if *axis_a >= d || *axis_b >= d || axis_a == axis_b {
                        return Err(Error::invalid(format!("segment {j}: bad arc axes")));
                    }
                    if !(*r_a > T::zero()) || !(*r_b > T::zero()) {
                        return Err(Error::invalid(format!("segment {j}: radii must be positive")));
                    }
                }
            }
            if j > 0 {
                let prev_end = segments[j - 1].end();
                let gap = prev_end.iter().zip(seg.start()).fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()));
                if gap > tol * (T::one() + prev_end.iter().fold(T::zero(), |m, &x| m.max(x.abs()))) {
                    return Err(Error::invalid(format!("segment {j} does not start where segment {} ends", j - 1)));
                }
            }
        }
        let mut offsets = Vec::with_capacity(segments.len() + 1);
        let mut acc = T::zero();
        offsets.push(acc);
        for seg in &segments {
            acc = acc + seg.length();
            offsets.push(acc);
        }
        Ok(Self { segments, offsets })
    }

    /// Straight line from the origin along `direction` (normalised).
    pub fn line(direction: Vec<T>, length: T) -> Result<Self> {
        let norm = direction.iter().fold(T::zero(), |a, &x| a + x * x).sqrt();
        if !(norm > T::zero()) {
            return Err(Error::invalid("direction must be nonzero"));
        }
        let d = direction.len();
        Self::new(vec![Segment::Line {
            start: vec![T::zero(); d],
            direction: direction.iter().map(|&x| x / norm).collect(),
            length,
        }])
    }

    pub fn segments(&self) -> &[Segment<T>] {
        &self.segments
    }

    pub fn dim(&self) -> usize {
        self.segments[0].start().len()
    }

    pub fn s_max(&self) -> T {
        *self.offsets.last().expect("nonempty")
    }

    fn locate(&self, s: T) -> (usize, T) {
        let sigma = (self.s_max() - s).max(T::zero()).min(self.s_max());
        let j = self.offsets[1..].partition_point(|&o| o < sigma).min(self.segments.len() - 1);
        (j, sigma - self.offsets[j])
    }

    pub fn point(&self, s: T) -> Vec<T> {
        let (j, tau) = self.locate(s);
        self.segments[j].eval(tau).0
    }

    /// `dg/ds`, componentwise nonpositive.
    pub fn tangent(&self, s: T) -> Vec<T> {
        let (j, tau) = self.locate(s);
        self.segments[j].eval(tau).1.into_iter().map(|x| -x).collect()
    }

    /// Parameters `s` of the junctions between consecutive segments, from the origin outward.
    pub fn junctions(&self) -> Vec<T> {
        self.offsets[1..self.offsets.len() - 1].iter().map(|&o| self.s_max() - o).collect()
    }

    /// Whether consecutive segments meet with parallel tangents.
    pub fn is_c1(&self) -> bool {
        self.segments.windows(2).all(|w| {
            let a = w[0].eval(w[0].length()).1;
            let b = w[1].eval(T::zero()).1;
            let na = a.iter().fold(T::zero(), |m, &x| m + x * x).sqrt();
            let nb = b.iter().fold(T::zero(), |m, &x| m + x * x).sqrt();
            let cos = crate::scalar::dot(&a, &b) / (na * nb);
            cos > T::one() - T::c(1e-9)
        })
    }
}
