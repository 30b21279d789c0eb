//! Bond prices for all maturities, forward and short rates, and the spot measure.

use std::ops::Range;

use crate::affine_core::{flow, solve_riccati, solve_riccati_inhomogeneous, AffineModelSpec, DriftModifier, RateIntegrand, TimeDependentCharacteristics};
use crate::error::{check_dim, Error, Result};
use crate::scalar::{dot, Scalar};
use crate::tenor_extension::interpolate::InterpolatingFunction;

/// `f(t, T) = p(t, T) + ⟨q(t, T), X_t⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShortRateCoefficients<T> {
    pub p: T,
    pub q: Vec<T>,
}

impl<T: Scalar> ShortRateCoefficients<T> {
    pub fn rate(&self, x: &[T]) -> T {
        self.p + dot(&self.q, x)
    }
}

/// Driver plus interpolating function: the continuous-tenor extension.
#[derive(Debug, Clone)]
pub struct ContinuousTenorModel<T> {
    model: AffineModelSpec<T>,
    interp: InterpolatingFunction<T>,
    log_m0: T,
}

impl<T: Scalar> ContinuousTenorModel<T> {
    /// The model horizon is set to the last date of the interpolator.
    pub fn new(model: AffineModelSpec<T>, interp: InterpolatingFunction<T>) -> Result<Self> {
        check_dim(model.dim(), interp.dim())?;
        let model = model.with_horizon(interp.horizon())?;
        let (p0, q0) = flow(&model, interp.horizon(), &interp.value(T::zero())?)?;
        let log_m0 = p0 + dot(&q0, model.x0());
        Ok(Self { model, interp, log_m0 })
    }

    pub fn model(&self) -> &AffineModelSpec<T> {
        &self.model
    }

    pub fn interpolator(&self) -> &InterpolatingFunction<T> {
        &self.interp
    }

    pub fn horizon(&self) -> T {
        self.interp.horizon()
    }

    /// `log M_0^{U(0)} = −log B(0, T_N)`.
    pub fn log_m0(&self) -> T {
        self.log_m0
    }

    fn tau(&self, t: T) -> Result<T> {
        let t_n = self.horizon();
        if !(t >= T::zero() && t <= t_n) {
            return Err(Error::invalid(format!("time {} outside [0, T_N]", t.to_f64_lossy())));
        }
        Ok(t_n - t)
    }

    /// `(α(t, T), β(t, T))` with `B(t, T) = exp(α + ⟨β, X_t⟩)`.
    pub fn bond_coefficients(&self, t: T, maturity: T) -> Result<(T, Vec<T>)> {
        if maturity < t {
            return Err(Error::invalid("maturity before valuation time"));
        }
        let tau = self.tau(t)?;
        self.tau(maturity)?;
        if maturity == t {
            return Ok((T::zero(), vec![T::zero(); self.model.dim()]));
        }
        let (pa, qa) = flow(&self.model, tau, &self.interp.value(maturity)?)?;
        let (pb, qb) = flow(&self.model, tau, &self.interp.value(t)?)?;
        Ok((pa - pb, qa.iter().zip(&qb).map(|(&a, &b)| a - b).collect()))
    }

    pub fn bond_price(&self, t: T, maturity: T, x: &[T]) -> Result<T> {
        check_dim(self.model.dim(), x.len())?;
        let (a, b) = self.bond_coefficients(t, maturity)?;
        Ok((a + dot(&b, x)).exp())
    }

    /// `p(t, T) = −⟨∇φ_{T_N−t}(U(T)), U'(T)⟩` and `q(t, T) = −∇ψ_{T_N−t}(U(T)) U'(T)`,
    /// with the right derivative of `U` unless `right` is false.
    pub fn short_rate_coefficients_side(&self, t: T, maturity: T, right: bool) -> Result<ShortRateCoefficients<T>> {
        if maturity < t {
            return Err(Error::invalid("maturity before valuation time"));
        }
        let tau = self.tau(t)?;
        self.tau(maturity)?;
        let du = self.interp.derivative_side(maturity, right)?;
        if du.iter().all(|&x| x == T::zero()) {
            return Ok(ShortRateCoefficients { p: T::zero(), q: vec![T::zero(); du.len()] });
        }
        let sol = solve_riccati(&self.model, tau, &self.interp.value(maturity)?)?;
        let p = -dot(&sol.grad_phi, &du);
        let q = sol.jac_psi_times(&du).into_iter().map(|x| -x).collect();
        Ok(ShortRateCoefficients { p, q })
    }

    pub fn short_rate_coefficients(&self, t: T, maturity: T) -> Result<ShortRateCoefficients<T>> {
        self.short_rate_coefficients_side(t, maturity, true)
    }

    pub fn forward_rate(&self, t: T, maturity: T, x: &[T]) -> Result<T> {
        check_dim(self.model.dim(), x.len())?;
        Ok(self.short_rate_coefficients(t, maturity)?.rate(x))
    }

    pub fn short_rate(&self, t: T, x: &[T]) -> Result<T> {
        self.forward_rate(t, t, x)
    }

    /// `(P_t, Q_t) = (φ_{T_N−t}(U(t)), ψ_{T_N−t}(U(t)))`.
    pub fn spot_exponents(&self, t: T) -> Result<(T, Vec<T>)> {
        let tau = self.tau(t)?;
        flow(&self.model, tau, &self.interp.value(t)?)
    }

    /// Density of the spot measure against the terminal measure on `F_t`.
    pub fn spot_density(&self, t: T, x: &[T], integrated_rate: T) -> Result<T> {
        check_dim(self.model.dim(), x.len())?;
        let (p, q) = self.spot_exponents(t)?;
        Ok((p + dot(&q, x) + integrated_rate - self.log_m0).exp())
    }

    /// `(F*(t, w), R*(t, w)) = (F(w + Q_t) − F(Q_t), R(w + Q_t) − R(Q_t))`.
    pub fn spot_characteristics(&self, t: T, w: &[T]) -> Result<(T, Vec<T>)> {
        check_dim(self.model.dim(), w.len())?;
        let (_, q) = self.spot_exponents(t)?;
        Ok(spot_difference(&self.model, &q, w))
    }

    /// `dQ/dt = −R(Q_t) + ∇ψ_{T_N−t}(U(t)) U'(t)` from the given side.
    fn spot_node(&self, t: T, right: bool) -> Result<(Vec<T>, Vec<T>)> {
        let tau = self.tau(t)?;
        let sol = solve_riccati(&self.model, tau, &self.interp.value(t)?)?;
        let du = self.interp.derivative_side(t, right)?;
        let mut rq = vec![T::zero(); self.model.dim()];
        self.model.r_into(&sol.psi, &mut rq);
        let jd = sol.jac_psi_times(&du);
        let dq = rq.iter().zip(&jd).map(|(&r, &j)| j - r).collect();
        Ok((sol.psi, dq))
    }

    /// Tabulates `Q_t` with `n_sub` Hermite pieces per master interval.
    pub fn spot_table(&self, n_sub: usize) -> Result<SpotTable<T>> {
        let dates = self.interp.dates();
        let n_sub = n_sub.max(1);
        let mut pieces = Vec::with_capacity(dates.len() - 1);
        for l in 0..dates.len() - 1 {
            let (a, b) = (dates[l], dates[l + 1]);
            let mut nodes = Vec::with_capacity(n_sub + 1);
            for j in 0..=n_sub {
                let t = if j == n_sub { b } else { a + (b - a) * T::from_usize_lossy(j) / T::from_usize_lossy(n_sub) };
                let (q, dq) = self.spot_node(t, j < n_sub)?;
                nodes.push((t, q, dq));
            }
            pieces.push(nodes);
        }
        Ok(SpotTable { model: self.model.clone(), dates: dates.to_vec(), pieces })
    }

    /// `E*[exp(w r_t) | X_s = x] = exp(w p_t + φ*_{s,t}(w q_t) + ⟨ψ*_{s,t}(w q_t), x⟩)`.
    pub fn short_rate_mgf(&self, table: &SpotTable<T>, s: T, t: T, w: T, x: &[T]) -> Result<T> {
        check_dim(self.model.dim(), x.len())?;
        let c = self.short_rate_coefficients(t, t)?;
        let wq: Vec<T> = c.q.iter().map(|&q| w * q).collect();
        let (phi, psi) = solve_riccati_inhomogeneous(table, s, t, &wq, self.model.ode_config())?;
        Ok((w * c.p + phi + dot(&psi, x)).exp())
    }

    /// `E*[exp⟨w, X_t⟩ | X_s = x]`.
    pub fn spot_mgf(&self, table: &SpotTable<T>, s: T, t: T, w: &[T], x: &[T]) -> Result<T> {
        check_dim(self.model.dim(), x.len())?;
        let (phi, psi) = solve_riccati_inhomogeneous(table, s, t, w, self.model.ode_config())?;
        Ok((phi + dot(&psi, x)).exp())
    }
}

fn spot_difference<T: Scalar>(model: &AffineModelSpec<T>, q: &[T], w: &[T]) -> (T, Vec<T>) {
    let wq: Vec<T> = w.iter().zip(q).map(|(&a, &b)| a + b).collect();
    let d = model.dim();
    let mut r1 = vec![T::zero(); d];
    let mut r0 = vec![T::zero(); d];
    model.r_into(&wq, &mut r1);
    model.r_into(q, &mut r0);
    (model.f_value(&wq) - model.f_value(q), r1.iter().zip(&r0).map(|(&a, &b)| a - b).collect())
}

impl<T: Scalar> RateIntegrand<T> for ContinuousTenorModel<T> {
    fn coefficients(&self, t: T, right: bool, q: &mut [T]) -> Result<T> {
        let c = self.short_rate_coefficients_side(t, t, right)?;
        q.copy_from_slice(&c.q);
        Ok(c.p)
    }
}

/// Piecewise-cubic table of `Q_t`, giving the spot-measure characteristics
/// and drift shift at any time.
#[derive(Debug, Clone)]
pub struct SpotTable<T> {
    model: AffineModelSpec<T>,
    dates: Vec<T>,
    /// Per master interval, nodes `(t, Q_t, dQ/dt)` with one-sided derivatives at the ends.
    pieces: Vec<Vec<(T, Vec<T>, Vec<T>)>>,
}

impl<T: Scalar> SpotTable<T> {
    pub fn q(&self, t: T) -> Vec<T> {
        let n = self.dates.len() - 1;
        let t = t.max(self.dates[0]).min(self.dates[n]);
        let l = self.dates.partition_point(|&d| d <= t).saturating_sub(1).min(n - 1);
        let nodes = &self.pieces[l];
        let j = nodes.partition_point(|nd| nd.0 <= t).clamp(1, nodes.len() - 1);
        let (a, b) = (&nodes[j - 1], &nodes[j]);
        let h = b.0 - a.0;
        let s = (t - a.0) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let two = T::c(2.0);
        let three = T::c(3.0);
        let h00 = two * s3 - three * s2 + T::one();
        let h10 = s3 - two * s2 + s;
        let h01 = -two * s3 + three * s2;
        let h11 = s3 - s2;
        (0..a.1.len()).map(|i| h00 * a.1[i] + h10 * h * a.2[i] + h01 * b.1[i] + h11 * h * b.2[i]).collect()
    }
}

impl<T: Scalar> TimeDependentCharacteristics<T> for SpotTable<T> {
    fn dim(&self) -> usize {
        self.model.dim()
    }

    fn f(&self, t: T, u: &[T]) -> T {
        spot_difference(&self.model, &self.q(t), u).0
    }

    fn r(&self, t: T, u: &[T], out: &mut [T]) {
        let (_, r) = spot_difference(&self.model, &self.q(t), u);
        out.copy_from_slice(&r);
    }

    fn breakpoints(&self) -> Vec<T> {
        self.dates.clone()
    }

    fn monitored(&self) -> Range<usize> {
        0..self.model.dim()
    }
}

impl<T: Scalar> DriftModifier<T> for SpotTable<T> {
    fn shift(&self, t: T, out: &mut [T]) {
        out.copy_from_slice(&self.q(t));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine_core::CirComponent;
    use crate::tenor_extension::interpolate::InterpolatorKind;

    fn setup(kind: InterpolatorKind) -> ContinuousTenorModel<f64> {
        let model = AffineModelSpec::cir(
            vec![CirComponent { lambda: 0.5, theta: 1.0, eta: 0.4 }, CirComponent { lambda: 0.3, theta: 1.0, eta: 0.3 }],
            2.0,
        )
        .unwrap();
        let dates: Vec<f64> = (0..=8).map(|l| 0.25 * l as f64).collect();
        let u: Vec<Vec<f64>> = (0..=8).map(|l| vec![0.02 * (8 - l) as f64, 0.01 * (8 - l) as f64 * (8 - l) as f64 / 8.0]).collect();
        let f = InterpolatingFunction::from_points(kind, dates, u).unwrap();
        ContinuousTenorModel::new(model, f).unwrap()
    }

    #[test]
    fn bond_edge_cases() {
        let m = setup(InterpolatorKind::If2);
        let x = [1.2, 0.7];
        assert_eq!(m.bond_price(0.6, 0.6, &x).unwrap(), 1.0);
        let (p, q) = m.spot_exponents(0.6).unwrap();
        let expect = (-(p + dot(&q, &x))).exp();
        assert!((m.bond_price(0.6, 2.0, &x).unwrap() - expect).abs() < 1e-14);
        assert!(m.bond_price(0.7, 0.6, &x).is_err());
    }

    #[test]
    fn forward_rate_matches_difference_quotient() {
        let m = setup(InterpolatorKind::If3);
        let x = [0.8, 1.3];
        for &(t, tt) in &[(0.1, 0.9), (0.5, 1.3), (0.0, 0.3)] {
            let h = 1e-5;
            let fd = -(m.bond_price(t, tt + h, &x).unwrap().ln() - m.bond_price(t, tt - h, &x).unwrap().ln()) / (2.0 * h);
            let f = m.forward_rate(t, tt, &x).unwrap();
            assert!((f - fd).abs() < 1e-6, "{f} vs {fd}");
        }
    }

    #[test]
    fn density_is_one_at_zero() {
        let m = setup(InterpolatorKind::If2);
        let x0 = m.model().x0().to_vec();
        assert!((m.spot_density(0.0, &x0, 0.0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn spot_characteristics_cancel_at_zero() {
        let m = setup(InterpolatorKind::If2);
        let (f, r) = m.spot_characteristics(0.4, &[0.0, 0.0]).unwrap();
        assert_eq!(f, 0.0);
        assert!(r.iter().all(|&v| v == 0.0));
        let (f, r) = m.spot_characteristics(2.0, &[0.1, 0.2]).unwrap();
        let (f0, r0) = m.model().functional_characteristics(&[0.1, 0.2]).unwrap();
        assert!((f - f0).abs() < 1e-15 && (r[0] - r0[0]).abs() < 1e-15);
    }

    #[test]
    fn table_matches_exact_q() {
        let m = setup(InterpolatorKind::If3);
        let tab = m.spot_table(8).unwrap();
        for &t in &[0.0, 0.13, 0.5, 1.01, 1.999] {
            let (_, q) = m.spot_exponents(t).unwrap();
            let qt = tab.q(t);
            for i in 0..2 {
                assert!((q[i] - qt[i]).abs() < 1e-9, "t={t}");
            }
        }
    }

    #[test]
    fn short_rate_mgf_terminal_condition() {
        let m = setup(InterpolatorKind::If2);
        let tab = m.spot_table(4).unwrap();
        let x = [0.9, 1.1];
        let v = m.short_rate_mgf(&tab, 0.7, 0.7, -0.5, &x).unwrap();
        let r = m.short_rate(0.7, &x).unwrap();
        assert!((v - (-0.5 * r).exp()).abs() < 1e-14);
        assert_eq!(m.short_rate_mgf(&tab, 0.2, 0.7, 0.0, &x).unwrap(), 1.0);
    }
}
