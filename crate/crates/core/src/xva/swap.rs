use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::multicurve::{MulticurveModel, TenorStructure};
use crate::multicurve::rates::LogLinear;
use crate::scalar::{dot, Scalar};
use crate::tenor_extension::ContinuousTenorModel;

/// Basis swap paying the shorter tenor `x1` plus a fixed spread and receiving
/// the longer tenor `x2`, unit notional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisSwapSpec<T> {
    pub short_tenor: usize,
    pub long_tenor: usize,
    pub p1: usize,
    pub q1: usize,
    pub p2: usize,
    pub q2: usize,
    pub inception: T,
    pub spread: T,
}

impl<T: Scalar> BasisSwapSpec<T> {
    /// Swap over master dates `[T_start, T_end]`; both legs must reset on them.
    pub fn new(
        tenor: &TenorStructure<T>,
        short_tenor: usize,
        long_tenor: usize,
        start: usize,
        end: usize,
        inception: T,
        spread: T,
    ) -> Result<Self> {
        let m1 = tenor.tenors().get(short_tenor).ok_or(Error::IndexOutOfRange { index: short_tenor, len: tenor.tenors().len() })?.multiple;
        let m2 = tenor.tenors().get(long_tenor).ok_or(Error::IndexOutOfRange { index: long_tenor, len: tenor.tenors().len() })?.multiple;
        if m2 % m1 != 0 || m2 == m1 {
            return Err(Error::invalid("the long tenor grid must be a strict coarsening of the short one"));
        }
        if start >= end || end > tenor.n() || start % m2 != 0 || end % m2 != 0 {
            return Err(Error::invalid("swap start and end must be common reset dates"));
        }
        let spec = Self { short_tenor, long_tenor, p1: start / m1, q1: end / m1, p2: start / m2, q2: end / m2, inception, spread };
        spec.validate(tenor)?;
        Ok(spec)
    }

    pub fn validate(&self, tenor: &TenorStructure<T>) -> Result<()> {
        let t1 = tenor.tenor_date(self.short_tenor, self.p1)?;
        let t2 = tenor.tenor_date(self.long_tenor, self.p2)?;
        let e1 = tenor.tenor_date(self.short_tenor, self.q1)?;
        let e2 = tenor.tenor_date(self.long_tenor, self.q2)?;
        if t1 != t2 || e1 != e2 || self.p1 >= self.q1 {
            return Err(Error::invalid("basis swap legs must share start and end dates"));
        }
        if !(self.inception >= T::zero() && self.inception <= t1) {
            return Err(Error::invalid("inception must not be after the swap start"));
        }
        Ok(())
    }

    pub fn start(&self, tenor: &TenorStructure<T>) -> Result<T> {
        tenor.tenor_date(self.short_tenor, self.p1)
    }

    pub fn end(&self, tenor: &TenorStructure<T>) -> Result<T> {
        tenor.tenor_date(self.short_tenor, self.q1)
    }

    pub fn with_spread(&self, spread: T) -> Self {
        Self { spread, ..self.clone() }
    }
}

/// `⌈t⌉ = min{k : t < T_k^x}`, floored at the first payment `p + 1`.
pub fn next_payment<T: Scalar>(tenor: &TenorStructure<T>, x: usize, p: usize, t: T) -> Result<usize> {
    let nx = tenor.n_x(x)?;
    let mut k = p + 1;
    while k <= nx && tenor.tenor_date(x, k)? <= t {
        k += 1;
    }
    Ok(k)
}

/// Price of the swap as `Σ_j w_j M_t^{a_j} / M_t^{U(t)}` at one time.
#[derive(Debug, Clone)]
pub struct PriceLayer<T> {
    pub t: T,
    numeraire: LogLinear<T>,
    terms: Vec<(T, LogLinear<T>)>,
}

impl<T: Scalar> PriceLayer<T> {
    pub fn eval(&self, x: &[T]) -> T {
        let lead = self.numeraire.0 + dot(&self.numeraire.1, x);
        let mut acc = T::zero();
        for (w, (a, b)) in &self.terms {
            acc = acc + *w * (*a + dot(b, x) - lead).exp();
        }
        acc
    }
}

/// Clean price of a basis swap along the continuous-tenor extension.
#[derive(Debug, Clone)]
pub struct SwapPricer<'a, T> {
    pub mc: &'a MulticurveModel<T>,
    pub ct: &'a ContinuousTenorModel<T>,
    pub swap: BasisSwapSpec<T>,
}

impl<'a, T: Scalar> SwapPricer<'a, T> {
    pub fn new(mc: &'a MulticurveModel<T>, ct: &'a ContinuousTenorModel<T>, swap: BasisSwapSpec<T>) -> Result<Self> {
        swap.validate(mc.tenor())?;
        check_dim(mc.model().dim(), ct.model().dim())?;
        if mc.tenor().horizon() != ct.horizon() {
            return Err(Error::invalid("interpolator and LIBOR model disagree on T_N"));
        }
        Ok(Self { mc, ct, swap })
    }

    fn leg_terms(&self, t: T, x: usize, p: usize, q: usize, spread: Option<T>, sign: T, out: &mut Vec<(T, LogLinear<T>)>) -> Result<()> {
        let tenor = self.mc.tenor();
        let seq = self.mc.sequences();
        let from = next_payment(tenor, x, p, t)?;
        let fixed = match spread {
            Some(s) => T::one() - tenor.delta_x(x)? * s,
            None => T::one(),
        };
        for i in from..=q {
            let v = self.mc.martingale_coefficients(t, seq.v_x(x, i - 1)?)?;
            let u = self.mc.martingale_coefficients(t, seq.u_x(tenor, x, i)?)?;
            out.push((sign, v));
            out.push((-sign * fixed, u));
        }
        Ok(())
    }

    /// Coefficients of `P_t` for `t` in `[inception, T_end]`.
    pub fn layer(&self, t: T) -> Result<PriceLayer<T>> {
        let tenor = self.mc.tenor();
        let end = self.swap.end(tenor)?;
        if !(t >= self.swap.inception && t <= end) {
            return Err(Error::invalid(format!("time {} outside the swap life", t.to_f64_lossy())));
        }
        let (p_t, q_t) = self.ct.spot_exponents(t)?;
        let mut terms = Vec::new();
        let s = &self.swap;
        self.leg_terms(t, s.long_tenor, s.p2, s.q2, None, T::one(), &mut terms)?;
        self.leg_terms(t, s.short_tenor, s.p1, s.q1, Some(s.spread), -T::one(), &mut terms)?;
        Ok(PriceLayer { t, numeraire: (p_t, q_t), terms })
    }

    pub fn price(&self, t: T, x: &[T]) -> Result<T> {
        check_dim(self.mc.model().dim(), x.len())?;
        Ok(self.layer(t)?.eval(x))
    }

    pub fn fair_spread(&self, r: T, x: &[T]) -> Result<T> {
        fair_spread(self.mc, &self.swap, r, x)
    }
}

/// Fair spread at `r`: `(Σ δ₂ B L² − Σ δ₁ B L¹) / Σ δ₁ B`.
pub fn fair_spread<T: Scalar>(mc: &MulticurveModel<T>, s: &BasisSwapSpec<T>, r: T, x: &[T]) -> Result<T> {
    let tenor = mc.tenor();
    check_dim(mc.model().dim(), x.len())?;
    if r > s.start(tenor)? {
        return Err(Error::invalid("fair spread needs r before the swap start"));
    }
    let snap = mc.snapshot(r)?;
    let mut long = T::zero();
    let mut short = T::zero();
    let mut annuity = T::zero();
    // Discount ratios relative to T_N; the common factor cancels.
    let b = |l: usize| (snap.u[l].0 + dot(&snap.u[l].1, x)).exp();
    for i in s.p2 + 1..=s.q2 {
        let l = tenor.master_index(s.long_tenor, i)?;
        long = long + tenor.delta_x(s.long_tenor)? * b(l) * mc.libor_rate(&snap, s.long_tenor, i, x)?;
    }
    for i in s.p1 + 1..=s.q1 {
        let l = tenor.master_index(s.short_tenor, i)?;
        let w = tenor.delta_x(s.short_tenor)? * b(l);
        short = short + w * mc.libor_rate(&snap, s.short_tenor, i, x)?;
        annuity = annuity + w;
    }
    if !(annuity > T::zero()) || !annuity.is_finite() {
        return Err(Error::DegenerateContract("zero annuity".into()));
    }
    Ok((long - short) / annuity)
}
