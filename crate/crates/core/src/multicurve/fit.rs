//! Fitting the `u` and `v` sequences to an initial term structure along a manifold.

use crate::affine_core::{solve_riccati, AffineModelSpec};
use crate::error::{Error, Result};
use crate::multicurve::manifold::{Manifold, Segment};
use crate::multicurve::tenor::{InitialTermStructure, TenorStructure};
use crate::roots::{decreasing_root, Eval};
use crate::scalar::{dot, Scalar};

/// Fitted parameter sequences and the manifold carrying them.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibratedSequences<T> {
    /// `u_0, …, u_N` on the master grid.
    pub u: Vec<Vec<T>>,
    /// Manifold parameter of each `u_l`.
    pub u_params: Vec<T>,
    /// Per tenor, `v_0^x, …, v_{N^x}^x`.
    pub v: Vec<Vec<Vec<T>>>,
    pub v_params: Vec<Vec<T>>,
    pub manifold: Manifold<T>,
}

impl<T: Scalar> CalibratedSequences<T> {
    /// `u_k^x = u_{k·m_x}`.
    pub fn u_x(&self, tenor: &TenorStructure<T>, x: usize, k: usize) -> Result<&[T]> {
        Ok(&self.u[tenor.master_index(x, k)?])
    }

    pub fn v_x(&self, x: usize, k: usize) -> Result<&[T]> {
        let row = self.v.get(x).ok_or(Error::IndexOutOfRange { index: x, len: self.v.len() })?;
        row.get(k).map(|v| v.as_slice()).ok_or(Error::IndexOutOfRange { index: k, len: row.len() })
    }

    /// The single-curve degeneration `v^x_k = u^x_k`.
    pub fn single_curve(&self, tenor: &TenorStructure<T>) -> Result<Self> {
        let mut out = self.clone();
        for x in 0..tenor.tenors().len() {
            let nx = tenor.n_x(x)?;
            out.v[x] = (0..=nx).map(|k| self.u_x(tenor, x, k).map(|u| u.to_vec())).collect::<Result<_>>()?;
            out.v_params[x] = (0..=nx).map(|k| Ok(self.u_params[tenor.master_index(x, k)?])).collect::<Result<_>>()?;
        }
        Ok(out)
    }
}

/// `log M_0^u = φ_{T_N}(u) + ⟨ψ_{T_N}(u), X_0⟩` and its gradient in `u`.
pub fn log_m0<T: Scalar>(model: &AffineModelSpec<T>, t_n: T, u: &[T]) -> Result<(T, Vec<T>)> {
    let sol = solve_riccati(model, t_n, u)?;
    let val = sol.phi + dot(&sol.psi, model.x0());
    Ok((val, sol.log_mgf_gradient(model.x0())))
}

fn eval_or_overflow<T: Scalar>(r: Result<(T, Vec<T>)>) -> Result<Option<(T, Vec<T>)>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::DomainViolation { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

const PARAM_TOL: f64 = 1e-14;

/// Manifold parameter in `[s_far, s_near]` with `log M_0^{g(s)} = target`.
/// `s_near` must already satisfy `log M_0^{g(s_near)} <= target`.
fn fit_on_manifold<T: Scalar>(
    model: &AffineModelSpec<T>,
    manifold: &Manifold<T>,
    t_n: T,
    target: T,
    s_far: T,
    s_near: T,
    maturity: T,
) -> Result<T> {
    let eval = |s: T| -> Result<Eval<T>> {
        let p = manifold.point(s);
        Ok(match eval_or_overflow(log_m0(model, t_n, &p))? {
            None => Eval::Overflow,
            Some((v, g)) => Eval::Value(v - target, dot(&g, &manifold.tangent(s))),
        })
    };
    if let Eval::Value(v, _) = eval(s_far)? {
        if v < T::zero() {
            return Err(Error::Fit {
                maturity: maturity.to_f64_lossy(),
                reason: "target lies beyond the end of the manifold".into(),
            });
        }
        if v == T::zero() {
            return Ok(s_far);
        }
    }
    decreasing_root(eval, s_far, s_near, None, T::c(PARAM_TOL))
}

fn same_target<T: Scalar>(a: T, b: T) -> bool {
    (a - b).abs() <= T::c(1e-15) * (T::one() + a.abs())
}

/// `ln(B(0,T_l)/B(0,T_N))` for every master date.
pub fn u_targets<T: Scalar>(init: &InitialTermStructure<T>) -> Vec<T> {
    let last = *init.discount.last().expect("nonempty curve");
    init.discount.iter().map(|&b| (b / last).ln()).collect()
}

/// Log targets for `v_0^x, …, v_{N^x}^x`.
///
/// For `k < N^x`, `M_0^{v_k} = (1 + δ_x L_{k+1}(0)) M_0^{u_{k+1}}`. The last
/// element carries the final LIBOR-to-OIS ratio over to `u_{N^x} = 0`.
pub fn v_targets<T: Scalar>(tenor: &TenorStructure<T>, init: &InitialTermStructure<T>, x: usize) -> Result<Vec<T>> {
    let yu = u_targets(init);
    let nx = tenor.n_x(x)?;
    let dx = tenor.delta_x(x)?;
    let mut out = Vec::with_capacity(nx + 1);
    for k in 0..nx {
        let l = init.libor[x][k];
        out.push((T::one() + dx * l).ln() + yu[tenor.master_index(x, k + 1)?]);
    }
    let l = init.libor[x][nx - 1];
    let f = init.ois_forward(tenor, x, nx)?;
    out.push(((T::one() + dx * l) / (T::one() + dx * f)).ln());
    Ok(out)
}

/// Fits `u_0, …, u_N` so that `M_0^{u_l} = B(0,T_l)/B(0,T_N)`, walking outward from `u_N = 0`.
pub fn fit_u_sequence<T: Scalar>(
    model: &AffineModelSpec<T>,
    tenor: &TenorStructure<T>,
    init: &InitialTermStructure<T>,
    manifold: &Manifold<T>,
) -> Result<(Vec<Vec<T>>, Vec<T>)> {
    init.validate(tenor)?;
    crate::error::check_dim(model.dim(), manifold.dim())?;
    let t_n = tenor.horizon();
    let y = u_targets(init);
    let n = tenor.n();
    let mut params = vec![T::zero(); n + 1];
    let mut u = vec![vec![T::zero(); model.dim()]; n + 1];
    params[n] = manifold.s_max();
    for l in (0..n).rev() {
        if same_target(y[l], y[l + 1]) {
            params[l] = params[l + 1];
            u[l] = u[l + 1].clone();
            continue;
        }
        params[l] = fit_on_manifold(model, manifold, t_n, y[l], T::zero(), params[l + 1], tenor.date(l))?;
        u[l] = manifold.point(params[l]);
    }
    Ok((u, params))
}

/// Fits every `v^x` along the manifold beyond the matching `u^x_k`.
pub fn fit_v_sequences<T: Scalar>(
    model: &AffineModelSpec<T>,
    tenor: &TenorStructure<T>,
    init: &InitialTermStructure<T>,
    u_params: &[T],
    manifold: &Manifold<T>,
) -> Result<(Vec<Vec<Vec<T>>>, Vec<Vec<T>>)> {
    init.validate(tenor)?;
    let t_n = tenor.horizon();
    let yu = u_targets(init);
    let mut v_all = Vec::new();
    let mut p_all = Vec::new();
    for x in 0..tenor.tenors().len() {
        let targets = v_targets(tenor, init, x)?;
        let nx = tenor.n_x(x)?;
        let mut v = Vec::with_capacity(nx + 1);
        let mut p = Vec::with_capacity(nx + 1);
        for (k, &y) in targets.iter().enumerate() {
            let l = tenor.master_index(x, k)?;
            let s = if same_target(y, yu[l]) {
                u_params[l]
            } else {
                let maturity = tenor.tenor_date(x, (k + 1).min(nx))?;
                fit_on_manifold(model, manifold, t_n, y, T::zero(), u_params[l], maturity)?
            };
            p.push(s);
            v.push(manifold.point(s));
        }
        v_all.push(v);
        p_all.push(p);
    }
    Ok((v_all, p_all))
}

/// Fits both sequences on a given manifold.
pub fn calibrate<T: Scalar>(
    model: &AffineModelSpec<T>,
    tenor: &TenorStructure<T>,
    init: &InitialTermStructure<T>,
    manifold: Manifold<T>,
) -> Result<CalibratedSequences<T>> {
    let (u, u_params) = fit_u_sequence(model, tenor, init, &manifold)?;
    let (v, v_params) = fit_v_sequences(model, tenor, init, &u_params, &manifold)?;
    Ok(CalibratedSequences { u, u_params, v, v_params, manifold })
}

/// Outward parameter `τ >= 0` along `curve` where `log M_0` reaches `target`.
fn reach_along<T, C>(model: &AffineModelSpec<T>, t_n: T, target: T, curve: C, maturity: T) -> Result<T>
where
    T: Scalar,
    C: Fn(T) -> (Vec<T>, Vec<T>),
{
    let f = |tau: T| -> Result<Option<(T, T)>> {
        let (p, dp) = curve(tau);
        Ok(eval_or_overflow(log_m0(model, t_n, &p))?.map(|(v, g)| (v - target, dot(&g, &dp))))
    };
    let mut hi = T::one();
    let mut found = false;
    for _ in 0..200 {
        match f(hi)? {
            None => {
                found = true;
                break;
            }
            Some((v, _)) if v >= T::zero() => {
                found = true;
                break;
            }
            _ => hi = hi * T::c(2.0),
        }
    }
    if !found {
        return Err(Error::Fit { maturity: maturity.to_f64_lossy(), reason: "target not reachable along the manifold".into() });
    }
    // Root in x = −τ, where the residual decreases.
    let x = decreasing_root(
        |x: T| {
            Ok(match f(-x)? {
                None => Eval::Overflow,
                Some((v, dv)) => Eval::Value(v, -dv),
            })
        },
        -hi,
        T::zero(),
        None,
        T::c(PARAM_TOL),
    )?;
    Ok(-x)
}

fn unit<T: Scalar>(d: usize, i: usize) -> Vec<T> {
    let mut e = vec![T::zero(); d];
    e[i] = T::one();
    e
}

fn axpy<T: Scalar>(p: &[T], a: T, e: &[T]) -> Vec<T> {
    p.iter().zip(e).map(|(&x, &y)| x + a * y).collect()
}

/// Knotted manifold for three components: outward from the origin a line
/// along `e3`, an arc turning to `e2`, a line along `e2`, an arc turning to
/// `e1`, and a line along `e1`. Segment sizes are chosen so that the junctions
/// are exactly `u_{k4}`, `u_{k3}`, `u_{k2}`, `u_{k1}`; `aspect` holds the ratio
/// of the outgoing to the incoming radius of each arc.
pub fn knotted_manifold<T: Scalar>(
    model: &AffineModelSpec<T>,
    tenor: &TenorStructure<T>,
    init: &InitialTermStructure<T>,
    knots: [usize; 4],
    aspect: [T; 2],
) -> Result<Manifold<T>> {
    init.validate(tenor)?;
    if model.dim() != 3 {
        return Err(Error::invalid("the knotted manifold needs exactly three components"));
    }
    let [k1, k2, k3, k4] = knots;
    let n = tenor.n();
    if !(0 < k1 && k1 < k2 && k2 < k3 && k3 < k4 && k4 < n) {
        return Err(Error::invalid("knots must satisfy 0 < k1 < k2 < k3 < k4 < N"));
    }
    if aspect.iter().any(|&a| !(a > T::zero())) {
        return Err(Error::invalid("arc aspect ratios must be positive"));
    }
    let y = u_targets(init);
    for w in [n, k4, k3, k2, k1].windows(2) {
        if !(y[w[1]] > y[w[0]]) {
            return Err(Error::Fit {
                maturity: tenor.date(w[1]).to_f64_lossy(),
                reason: "knotted manifold needs strictly positive rates between knots".into(),
            });
        }
    }
    let t_n = tenor.horizon();
    let d = 3;
    let (e1, e2, e3) = (unit::<T>(d, 0), unit::<T>(d, 1), unit::<T>(d, 2));
    let origin = vec![T::zero(); d];

    let z4 = reach_along(model, t_n, y[k4], |t| (axpy(&origin, t, &e3), e3.clone()), tenor.date(k4))?;
    let p4 = axpy(&origin, z4, &e3);

    let dir1 = axpy(&e3, aspect[0], &e2);
    let r1 = reach_along(model, t_n, y[k3], |r| (axpy(&p4, r, &dir1), dir1.clone()), tenor.date(k3))?;
    let p3 = axpy(&p4, r1, &dir1);

    let z2 = reach_along(model, t_n, y[k2], |t| (axpy(&p3, t, &e2), e2.clone()), tenor.date(k2))?;
    let p2 = axpy(&p3, z2, &e2);

    let dir2 = axpy(&e2, aspect[1], &e1);
    let r2 = reach_along(model, t_n, y[k1], |r| (axpy(&p2, r, &dir2), dir2.clone()), tenor.date(k1))?;
    let p1 = axpy(&p2, r2, &dir2);

    let mut y_max = y[0];
    for x in 0..tenor.tenors().len() {
        for v in v_targets(tenor, init, x)? {
            y_max = y_max.max(v);
        }
    }
    let y_far = y_max + (T::c(0.25) * y_max).max(T::c(0.01));
    let z0 = reach_along(model, t_n, y_far, |t| (axpy(&p1, t, &e1), e1.clone()), T::zero())?;

    Manifold::new(vec![
        Segment::Line { start: origin, direction: e3, length: z4 },
        Segment::Arc { start: p4, axis_a: 2, axis_b: 1, r_a: r1, r_b: aspect[0] * r1 },
        Segment::Line { start: p3, direction: e2, length: z2 },
        Segment::Arc { start: p2, axis_a: 1, axis_b: 0, r_a: r2, r_b: aspect[1] * r2 },
        Segment::Line { start: p1, direction: e1, length: z0 },
    ])
}

/// Straight-line manifold from the origin along `direction`, long enough for every target.
pub fn line_manifold<T: Scalar>(
    model: &AffineModelSpec<T>,
    tenor: &TenorStructure<T>,
    init: &InitialTermStructure<T>,
    direction: Vec<T>,
) -> Result<Manifold<T>> {
    init.validate(tenor)?;
    crate::error::check_dim(model.dim(), direction.len())?;
    let norm = dot(&direction, &direction).sqrt();
    if !(norm > T::zero()) || direction.iter().any(|&x| x < T::zero()) {
        return Err(Error::invalid("direction must be nonnegative and nonzero"));
    }
    let dir: Vec<T> = direction.iter().map(|&x| x / norm).collect();
    let mut y_max = u_targets(init)[0];
    for x in 0..tenor.tenors().len() {
        for v in v_targets(tenor, init, x)? {
            y_max = y_max.max(v);
        }
    }
    let y_far = y_max + (T::c(0.25) * y_max).max(T::c(0.01));
    let origin = vec![T::zero(); model.dim()];
    let len = reach_along(model, tenor.horizon(), y_far, |t| (axpy(&origin, t, &dir), dir.clone()), T::zero())?;
    Manifold::line(dir, len)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine_core::CirComponent;
    use crate::multicurve::tenor::Tenor;

    fn setup(d: usize) -> (AffineModelSpec<f64>, TenorStructure<f64>, InitialTermStructure<f64>) {
        let comps: Vec<_> = [(0.8, 0.3), (0.5, 0.4), (0.3, 0.5)]
            .iter()
            .take(d)
            .map(|&(l, e)| CirComponent { lambda: l, theta: 1.0, eta: e })
            .collect();
        let model = AffineModelSpec::cir(comps, 10.0).unwrap();
        let tenor = TenorStructure::new(
            0.25,
            40,
            vec![Tenor { label: "3M".into(), multiple: 1 }, Tenor { label: "6M".into(), multiple: 2 }],
        )
        .unwrap();
        let disc: Vec<f64> = (0..=40)
            .map(|l| {
                let t = 0.25 * l as f64;
                (-(0.01 * t + 0.001 * t * t)).exp()
            })
            .collect();
        let init = InitialTermStructure::with_spreads(&tenor, disc, &[0.001, 0.0025]).unwrap();
        (model, tenor, init)
    }

    #[test]
    fn flat_curve_gives_zero_sequence() {
        let (model, tenor, _) = setup(1);
        let init = InitialTermStructure::with_spreads(&tenor, vec![1.0; 41], &[0.0, 0.0]).unwrap();
        let m = Manifold::line(vec![1.0], 5.0).unwrap();
        let (u, _) = fit_u_sequence(&model, &tenor, &init, &m).unwrap();
        assert!(u.iter().all(|v| v[0] == 0.0));
    }

    #[test]
    fn knotted_junctions_land_on_knots() {
        let (model, tenor, init) = setup(3);
        let m = knotted_manifold(&model, &tenor, &init, [9, 16, 21, 28], [1.0, 1.0]).unwrap();
        assert!(m.is_c1());
        let seq = calibrate(&model, &tenor, &init, m).unwrap();
        let j = seq.manifold.junctions();
        for (&k, &s) in [28usize, 21, 16, 9].iter().zip(&j) {
            assert!((seq.u_params[k] - s).abs() < 1e-10, "knot {k}: {} vs {s}", seq.u_params[k]);
        }
        // Long rates load on the last component only.
        assert!(seq.u[30][0].abs() < 1e-12 && seq.u[30][1].abs() < 1e-12);
        // Short rates move the first component only.
        assert!((seq.u[3][1] - seq.u[5][1]).abs() < 1e-12);
        assert!(seq.u[3][0] > seq.u[5][0]);
    }

    #[test]
    fn zero_spreads_give_identical_sequences() {
        let (model, tenor, init) = setup(2);
        let init0 = InitialTermStructure::with_spreads(&tenor, init.discount.clone(), &[0.0, 0.0]).unwrap();
        let m = line_manifold(&model, &tenor, &init0, vec![1.0, 0.5]).unwrap();
        let seq = calibrate(&model, &tenor, &init0, m).unwrap();
        for x in 0..2 {
            for k in 0..=tenor.n_x(x).unwrap() {
                assert_eq!(seq.v_x(x, k).unwrap(), seq.u_x(&tenor, x, k).unwrap());
            }
        }
    }

    #[test]
    fn short_manifold_names_maturity() {
        let (model, tenor, init) = setup(1);
        let m = Manifold::line(vec![1.0], 0.05).unwrap();
        match fit_u_sequence(&model, &tenor, &init, &m) {
            Err(Error::Fit { maturity, .. }) => assert!(maturity < 10.0),
            other => panic!("unexpected {other:?}"),
        }
    }
}
