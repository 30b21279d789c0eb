use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::scalar::Scalar;

/// A tenor `x` whose accrual period is `multiple` master periods.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tenor {
    pub label: String,
    pub multiple: usize,
}

/// Equidistant master grid `T_l = lΔ`, `l = 0..=N`, and the tenor sub-grids.
#[derive(Debug, Clone, PartialEq)]
pub struct TenorStructure<T> {
    delta: T,
    n: usize,
    tenors: Vec<Tenor>,
}

impl<T: Scalar> TenorStructure<T> {
    pub fn new(delta: T, n: usize, tenors: Vec<Tenor>) -> Result<Self> {
        if !(delta > T::zero()) || n == 0 {
            return Err(Error::invalid("need a positive spacing and at least one period"));
        }
        for t in &tenors {
            if t.multiple == 0 || n % t.multiple != 0 {
                return Err(Error::invalid(format!(
                    "tenor {} does not divide the master grid of {n} periods",
                    t.label
                )));
            }
        }
        Ok(Self { delta, n, tenors })
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn horizon(&self) -> T {
        self.date(self.n)
    }

    pub fn date(&self, l: usize) -> T {
        self.delta * T::from_usize_lossy(l)
    }

    pub fn dates(&self) -> Vec<T> {
        (0..=self.n).map(|l| self.date(l)).collect()
    }

    pub fn tenors(&self) -> &[Tenor] {
        &self.tenors
    }

    pub fn tenor_index(&self, label: &str) -> Option<usize> {
        self.tenors.iter().position(|t| t.label == label)
    }

    fn tenor(&self, x: usize) -> Result<&Tenor> {
        self.tenors.get(x).ok_or(Error::IndexOutOfRange { index: x, len: self.tenors.len() })
    }

    /// `N^x`.
    pub fn n_x(&self, x: usize) -> Result<usize> {
        Ok(self.n / self.tenor(x)?.multiple)
    }

    /// `δ_x`.
    pub fn delta_x(&self, x: usize) -> Result<T> {
        Ok(self.delta * T::from_usize_lossy(self.tenor(x)?.multiple))
    }

    /// Master index of `T_k^x`.
    pub fn master_index(&self, x: usize, k: usize) -> Result<usize> {
        let t = self.tenor(x)?;
        let nx = self.n / t.multiple;
        if k > nx {
            return Err(Error::IndexOutOfRange { index: k, len: nx + 1 });
        }
        Ok(k * t.multiple)
    }

    pub fn tenor_date(&self, x: usize, k: usize) -> Result<T> {
        Ok(self.date(self.master_index(x, k)?))
    }

    /// `⌊t⌋`: index of the last master date not after `t`.
    pub fn floor_index(&self, t: T) -> usize {
        let k = (t / self.delta).floor().to_usize().unwrap_or(0).min(self.n);
        // Guard against rounding right at a grid date.
        if k < self.n && self.date(k + 1) <= t {
            k + 1
        } else if k > 0 && self.date(k) > t {
            k - 1
        } else {
            k
        }
    }
}

/// OIS discount factors `B(0, T_l)` for `l = 0..=N` and forward LIBOR rates
/// `L_k^x(0)` for `k = 1..=N^x`, stored at index `k − 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialTermStructure<T> {
    pub discount: Vec<T>,
    pub libor: Vec<Vec<T>>,
}

impl<T: Scalar> InitialTermStructure<T> {
    pub fn validate(&self, tenor: &TenorStructure<T>) -> Result<()> {
        check_dim(tenor.n() + 1, self.discount.len())?;
        check_dim(tenor.tenors().len(), self.libor.len())?;
        if (self.discount[0] - T::one()).abs() > T::c(1e-12) {
            return Err(Error::invalid("B(0, T_0) must equal 1"));
        }
        for (l, w) in self.discount.windows(2).enumerate() {
            if !(w[1] > T::zero()) || w[1] > w[0] {
                return Err(Error::invalid(format!(
                    "discount factors must be positive and non-increasing (index {})",
                    l + 1
                )));
            }
        }
        for x in 0..tenor.tenors().len() {
            let nx = tenor.n_x(x)?;
            check_dim(nx, self.libor[x].len())?;
            for k in 1..=nx {
                let f = self.ois_forward(tenor, x, k)?;
                let l = self.libor[x][k - 1];
                let slack = T::c(1e-12) * (T::one() + f.abs());
                if !(l + slack >= f) {
                    return Err(Error::invalid(format!(
                        "LIBOR below OIS forward for tenor {} period {k}",
                        tenor.tenors()[x].label
                    )));
                }
            }
        }
        Ok(())
    }

    /// `F_k^x(0) = (B(0,T_{k−1}^x)/B(0,T_k^x) − 1)/δ_x`.
    pub fn ois_forward(&self, tenor: &TenorStructure<T>, x: usize, k: usize) -> Result<T> {
        if k == 0 {
            return Err(Error::IndexOutOfRange { index: 0, len: tenor.n_x(x)? + 1 });
        }
        let a = tenor.master_index(x, k - 1)?;
        let b = tenor.master_index(x, k)?;
        Ok((self.discount[a] / self.discount[b] - T::one()) / tenor.delta_x(x)?)
    }

    /// Builds the LIBOR curve as the OIS forward plus a constant spread per tenor.
    pub fn with_spreads(tenor: &TenorStructure<T>, discount: Vec<T>, spreads: &[T]) -> Result<Self> {
        check_dim(tenor.tenors().len(), spreads.len())?;
        check_dim(tenor.n() + 1, discount.len())?;
        let mut its = Self { discount, libor: Vec::new() };
        for (x, &s) in spreads.iter().enumerate() {
            let nx = tenor.n_x(x)?;
            let mut row = Vec::with_capacity(nx);
            for k in 1..=nx {
                row.push(its.ois_forward(tenor, x, k)? + s);
            }
            its.libor.push(row);
        }
        Ok(its)
    }
}
