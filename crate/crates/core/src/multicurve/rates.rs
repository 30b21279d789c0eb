use crate::affine_core::{flow, AffineModelSpec};
use crate::error::{check_dim, Error, Result};
use crate::multicurve::fit::{calibrate, CalibratedSequences};
use crate::multicurve::manifold::Manifold;
use crate::multicurve::tenor::{InitialTermStructure, TenorStructure};
use crate::scalar::{dot, Scalar};

/// Fitted multi-curve model: driving process, tenor structure, initial curves
/// and the `u`/`v` sequences.
#[derive(Debug, Clone)]
pub struct MulticurveModel<T> {
    model: AffineModelSpec<T>,
    tenor: TenorStructure<T>,
    init: InitialTermStructure<T>,
    seq: CalibratedSequences<T>,
}

/// `(φ_{T_N−t}(u), ψ_{T_N−t}(u))`, so that `log M_t^u = φ + ⟨ψ, X_t⟩`.
pub type LogLinear<T> = (T, Vec<T>);

/// Martingale coefficients of every fitted parameter at one time.
#[derive(Debug, Clone)]
pub struct Snapshot<T> {
    pub t: T,
    pub u: Vec<LogLinear<T>>,
    pub v: Vec<Vec<LogLinear<T>>>,
}

fn eval<T: Scalar>(c: &LogLinear<T>, x: &[T]) -> T {
    (c.0 + dot(&c.1, x)).exp()
}

impl<T: Scalar> MulticurveModel<T> {
    /// Fits the sequences on `manifold`. The model horizon is set to `T_N`.
    pub fn fit(
        model: AffineModelSpec<T>,
        tenor: TenorStructure<T>,
        init: InitialTermStructure<T>,
        manifold: Manifold<T>,
    ) -> Result<Self> {
        let model = model.with_horizon(tenor.horizon())?;
        let seq = calibrate(&model, &tenor, &init, manifold)?;
        Ok(Self { model, tenor, init, seq })
    }

    /// Wraps sequences fitted elsewhere.
    pub fn from_parts(
        model: AffineModelSpec<T>,
        tenor: TenorStructure<T>,
        init: InitialTermStructure<T>,
        seq: CalibratedSequences<T>,
    ) -> Result<Self> {
        init.validate(&tenor)?;
        check_dim(tenor.n() + 1, seq.u.len())?;
        check_dim(tenor.tenors().len(), seq.v.len())?;
        let model = model.with_horizon(tenor.horizon())?;
        Ok(Self { model, tenor, init, seq })
    }

    pub fn model(&self) -> &AffineModelSpec<T> {
        &self.model
    }

    pub fn tenor(&self) -> &TenorStructure<T> {
        &self.tenor
    }

    pub fn initial(&self) -> &InitialTermStructure<T> {
        &self.init
    }

    pub fn sequences(&self) -> &CalibratedSequences<T> {
        &self.seq
    }

    /// The same model with `v^x_k = u^x_k`, i.e. zero spreads.
    pub fn single_curve(&self) -> Result<Self> {
        let seq = self.seq.single_curve(&self.tenor)?;
        let mut init = self.init.clone();
        for x in 0..self.tenor.tenors().len() {
            for k in 1..=self.tenor.n_x(x)? {
                init.libor[x][k - 1] = self.init.ois_forward(&self.tenor, x, k)?;
            }
        }
        Ok(Self { model: self.model.clone(), tenor: self.tenor.clone(), init, seq })
    }

    fn check_time(&self, t: T) -> Result<T> {
        let t_n = self.tenor.horizon();
        if !(t >= T::zero() && t <= t_n) {
            return Err(Error::invalid("time outside [0, T_N]"));
        }
        Ok(t_n - t)
    }

    pub fn martingale_coefficients(&self, t: T, u: &[T]) -> Result<LogLinear<T>> {
        let tau = self.check_time(t)?;
        flow(&self.model, tau, u)
    }

    /// `M_t^u` at state `x`.
    pub fn martingale_value(&self, t: T, u: &[T], x: &[T]) -> Result<T> {
        check_dim(self.model.dim(), x.len())?;
        Ok(eval(&self.martingale_coefficients(t, u)?, x))
    }

    pub fn snapshot(&self, t: T) -> Result<Snapshot<T>> {
        let u = self.seq.u.iter().map(|u| self.martingale_coefficients(t, u)).collect::<Result<Vec<_>>>()?;
        let v = self
            .seq
            .v
            .iter()
            .map(|row| row.iter().map(|v| self.martingale_coefficients(t, v)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Snapshot { t, u, v })
    }

    fn check_period(&self, x: usize, k: usize) -> Result<()> {
        let nx = self.tenor.n_x(x)?;
        if k == 0 || k > nx {
            return Err(Error::IndexOutOfRange { index: k, len: nx + 1 });
        }
        Ok(())
    }

    /// `F_k^x(t)` from `1 + δ_x F = M_t^{u_{k−1}} / M_t^{u_k}`.
    pub fn ois_forward_rate(&self, snap: &Snapshot<T>, x: usize, k: usize, state: &[T]) -> Result<T> {
        self.check_period(x, k)?;
        let a = self.tenor.master_index(x, k - 1)?;
        let b = self.tenor.master_index(x, k)?;
        let ratio = (snap.u[a].0 - snap.u[b].0 + dot(&snap.u[a].1, state) - dot(&snap.u[b].1, state)).exp();
        Ok((ratio - T::one()) / self.tenor.delta_x(x)?)
    }

    /// `L_k^x(t)` from `1 + δ_x L = M_t^{v_{k−1}} / M_t^{u_k}`.
    pub fn libor_rate(&self, snap: &Snapshot<T>, x: usize, k: usize, state: &[T]) -> Result<T> {
        self.check_period(x, k)?;
        let v = &snap.v[x][k - 1];
        let b = self.tenor.master_index(x, k)?;
        let ratio = (v.0 - snap.u[b].0 + dot(&v.1, state) - dot(&snap.u[b].1, state)).exp();
        Ok((ratio - T::one()) / self.tenor.delta_x(x)?)
    }

    /// `S_k^x(t) = L_k^x(t) − F_k^x(t)`.
    pub fn spread(&self, snap: &Snapshot<T>, x: usize, k: usize, state: &[T]) -> Result<T> {
        Ok(self.libor_rate(snap, x, k, state)? - self.ois_forward_rate(snap, x, k, state)?)
    }

    /// `B(t, T_l) / B(t, T_m) = M_t^{u_l} / M_t^{u_m}`.
    pub fn discount_ratio(&self, snap: &Snapshot<T>, l: usize, m: usize, state: &[T]) -> Result<T> {
        let n = self.seq.u.len();
        if l >= n || m >= n {
            return Err(Error::IndexOutOfRange { index: l.max(m), len: n });
        }
        Ok((snap.u[l].0 - snap.u[m].0 + dot(&snap.u[l].1, state) - dot(&snap.u[m].1, state)).exp())
    }

    /// Time-`t` characteristics of `X` under the `T_k^x`-forward measure:
    /// `φ^{x,k}_s(w) = φ_s(a + w) − φ_s(a)` and `ψ^{x,k}_s(w) = ψ_s(a + w) − ψ_s(a)`
    /// with `a = ψ_{T_N−t−s}(u_k^x)`, for the horizon `s` measured from `t`.
    pub fn forward_measure_characteristics(&self, x: usize, k: usize, t: T, s: T, w: &[T]) -> Result<LogLinear<T>> {
        check_dim(self.model.dim(), w.len())?;
        let t_n = self.tenor.horizon();
        if !(s >= T::zero() && t >= T::zero() && t + s <= t_n) {
            return Err(Error::invalid("forward-measure horizon outside [0, T_N]"));
        }
        let u = self.seq.u_x(&self.tenor, x, k)?;
        let (_, a) = flow(&self.model, t_n - t - s, u)?;
        let aw: Vec<T> = a.iter().zip(w).map(|(&p, &q)| p + q).collect();
        let (p1, q1) = flow(&self.model, s, &aw)?;
        let (p0, q0) = flow(&self.model, s, &a)?;
        Ok((p1 - p0, q1.iter().zip(&q0).map(|(&p, &q)| p - q).collect()))
    }
}
