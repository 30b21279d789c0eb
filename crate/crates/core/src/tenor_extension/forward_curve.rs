use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::multicurve::{InitialTermStructure, TenorStructure};
use crate::scalar::Scalar;

/// Initial instantaneous forward curve `f̃(0, ·)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ForwardCurve<T> {
    /// `β0 + β1 e^{−t/τ} + β2 (t/τ) e^{−t/τ}`.
    NelsonSiegel { beta0: T, beta1: T, beta2: T, tau: T },
    /// Piecewise linear through `(maturities[i], rates[i])`, flat outside.
    Table { maturities: Vec<T>, rates: Vec<T> },
}

impl<T: Scalar> ForwardCurve<T> {
    pub fn table(maturities: Vec<T>, rates: Vec<T>) -> Result<Self> {
        check_dim(maturities.len(), rates.len())?;
        if maturities.is_empty() {
            return Err(Error::invalid("forward table is empty"));
        }
        if maturities.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("forward table maturities must increase"));
        }
        Ok(Self::Table { maturities, rates })
    }

    pub fn value(&self, t: T) -> T {
        match self {
            Self::NelsonSiegel { beta0, beta1, beta2, tau } => {
                let e = (-t / *tau).exp();
                *beta0 + *beta1 * e + *beta2 * (t / *tau) * e
            }
            Self::Table { maturities, rates } => {
                let n = maturities.len();
                if t <= maturities[0] {
                    return rates[0];
                }
                if t >= maturities[n - 1] {
                    return rates[n - 1];
                }
                let j = maturities.partition_point(|&m| m <= t) - 1;
                let w = (t - maturities[j]) / (maturities[j + 1] - maturities[j]);
                rates[j] + w * (rates[j + 1] - rates[j])
            }
        }
    }

    /// `∫_0^t f̃(0, s) ds`.
    pub fn cumulative(&self, t: T) -> T {
        match self {
            Self::NelsonSiegel { beta0, beta1, beta2, tau } => {
                let e = (-t / *tau).exp();
                *beta0 * t + *beta1 * *tau * (T::one() - e) + *beta2 * (*tau * (T::one() - e) - t * e)
            }
            Self::Table { maturities, .. } => {
                let mut acc = T::zero();
                let mut a = T::zero();
                let half = T::c(0.5);
                for &m in maturities.iter().chain(std::iter::once(&t)) {
                    let b = m.min(t);
                    if b > a {
                        acc = acc + half * (b - a) * (self.value(a) + self.value(b));
                        a = b;
                    }
                }
                acc
            }
        }
    }

    /// `∫_a^b f̃(0, s) ds`.
    pub fn integral(&self, a: T, b: T) -> T {
        self.cumulative(b) - self.cumulative(a)
    }

    /// `exp(−∫_0^{T_l} f̃)` at every master date.
    pub fn discount_factors(&self, tenor: &TenorStructure<T>) -> Vec<T> {
        tenor.dates().into_iter().map(|t| (-self.cumulative(t)).exp()).collect()
    }

    /// Errors unless the curve is nonnegative on a fine grid and reprices the
    /// initial bonds to `tol` in log space.
    pub fn check(&self, tenor: &TenorStructure<T>, init: &InitialTermStructure<T>, tol: T) -> Result<()> {
        let n = 64 * tenor.n();
        let t_n = tenor.horizon();
        for i in 0..=n {
            let t = t_n * T::from_usize_lossy(i) / T::from_usize_lossy(n);
            if !(self.value(t) >= T::zero()) {
                return Err(Error::Fit { maturity: t.to_f64_lossy(), reason: "negative initial forward rate".into() });
            }
        }
        for (l, &b) in init.discount.iter().enumerate() {
            let gap = (b.ln() + self.cumulative(tenor.date(l))).abs();
            if gap > tol {
                return Err(Error::Fit {
                    maturity: tenor.date(l).to_f64_lossy(),
                    reason: format!("forward curve misprices the bond by {} in log", gap.to_f64_lossy()),
                });
            }
        }
        Ok(())
    }
}
