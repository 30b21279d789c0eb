use std::ops::Range;

use crate::affine_core::model::AffineModelSpec;
use crate::error::{check_dim, Error, Result};
use crate::ode::{integrate, OdeSystem};
use crate::scalar::Scalar;

/// `φ_t(u)`, `ψ_t(u)` and their derivatives in `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSolution<T> {
    pub t: T,
    pub u: Vec<T>,
    pub phi: T,
    pub psi: Vec<T>,
    pub grad_phi: Vec<T>,
    /// `jac_psi[i][k] = ∂ψ_i/∂u_k`.
    pub jac_psi: Vec<Vec<T>>,
}

impl<T: Scalar> FlowSolution<T> {
    /// `∇φ + (∇ψ)ᵀ x`, the gradient of `φ + ⟨ψ, x⟩` in `u`.
    pub fn log_mgf_gradient(&self, x: &[T]) -> Vec<T> {
        let d = self.psi.len();
        (0..d)
            .map(|k| self.grad_phi[k] + (0..d).fold(T::zero(), |acc, i| acc + self.jac_psi[i][k] * x[i]))
            .collect()
    }

    /// `(∇ψ) v`.
    pub fn jac_psi_times(&self, v: &[T]) -> Vec<T> {
        self.jac_psi.iter().map(|row| crate::scalar::dot(row, v)).collect()
    }
}

struct RiccatiSystem<'a, T> {
    spec: &'a AffineModelSpec<T>,
    gradients: bool,
}

impl<T: Scalar> OdeSystem<T> for RiccatiSystem<'_, T> {
    fn dim(&self) -> usize {
        let d = self.spec.dim();
        if self.gradients {
            1 + 2 * d + d * d
        } else {
            1 + d
        }
    }

    fn rhs(&self, _t: T, y: &[T], dy: &mut [T]) {
        let d = self.spec.dim();
        let psi = &y[1..1 + d];
        dy[0] = self.spec.f_value(psi);
        self.spec.r_into(psi, &mut dy[1..1 + d]);
        if !self.gradients {
            return;
        }
        let b = self.spec.b();
        let jac = &y[1 + 2 * d..];
        for k in 0..d {
            let mut acc = T::zero();
            for i in 0..d {
                acc = acc + b[i] * jac[i * d + k];
            }
            dy[1 + d + k] = acc;
        }
        let out = &mut dy[1 + 2 * d..];
        for i in 0..d {
            let beta = self.spec.beta(i);
            let diag = self.spec.alpha(i) * psi[i];
            for k in 0..d {
                let mut acc = diag * jac[i * d + k];
                for j in 0..d {
                    if beta[j] != T::zero() {
                        acc = acc + beta[j] * jac[j * d + k];
                    }
                }
                out[i * d + k] = acc;
            }
        }
    }

    fn monitored(&self) -> Range<usize> {
        1..1 + self.spec.dim()
    }
}

fn check_times<T: Scalar>(times: &[T]) -> Result<()> {
    let mut prev = T::zero();
    for &t in times {
        if !(t >= prev) || !t.is_finite() {
            return Err(Error::invalid("flow times must be finite, nonnegative and ascending"));
        }
        prev = t;
    }
    Ok(())
}

/// Solves the Riccati system with variational equations once and reports the
/// flow at every requested (ascending) time.
pub fn solve_riccati_at<T: Scalar>(spec: &AffineModelSpec<T>, u: &[T], times: &[T]) -> Result<Vec<FlowSolution<T>>> {
    let d = spec.dim();
    check_dim(d, u.len())?;
    check_times(times)?;
    let sys = RiccatiSystem { spec, gradients: true };
    let mut y0 = vec![T::zero(); sys.dim()];
    y0[1..1 + d].copy_from_slice(u);
    for i in 0..d {
        y0[1 + 2 * d + i * d + i] = T::one();
    }
    let mut out = Vec::with_capacity(times.len());
    integrate(&sys, T::zero(), &y0, times, spec.ode_config(), |idx, y| {
        out.push(FlowSolution {
            t: times[idx],
            u: u.to_vec(),
            phi: y[0],
            psi: y[1..1 + d].to_vec(),
            grad_phi: y[1 + d..1 + 2 * d].to_vec(),
            jac_psi: (0..d).map(|i| y[1 + 2 * d + i * d..1 + 2 * d + (i + 1) * d].to_vec()).collect(),
        })
    })?;
    Ok(out)
}

pub fn solve_riccati<T: Scalar>(spec: &AffineModelSpec<T>, t: T, u: &[T]) -> Result<FlowSolution<T>> {
    Ok(solve_riccati_at(spec, u, &[t])?.pop().expect("one output per time"))
}

/// `(φ_t(u), ψ_t(u))` without the variational equations.
pub fn flow<T: Scalar>(spec: &AffineModelSpec<T>, t: T, u: &[T]) -> Result<(T, Vec<T>)> {
    let mut v = flow_at(spec, u, &[t])?;
    Ok(v.pop().expect("one output per time"))
}

pub fn flow_at<T: Scalar>(spec: &AffineModelSpec<T>, u: &[T], times: &[T]) -> Result<Vec<(T, Vec<T>)>> {
    let d = spec.dim();
    check_dim(d, u.len())?;
    check_times(times)?;
    let sys = RiccatiSystem { spec, gradients: false };
    let mut y0 = vec![T::zero(); 1 + d];
    y0[1..].copy_from_slice(u);
    let mut out = Vec::with_capacity(times.len());
    integrate(&sys, T::zero(), &y0, times, spec.ode_config(), |_, y| out.push((y[0], y[1..].to_vec())))?;
    Ok(out)
}

/// `E_x[exp⟨u, X_t⟩] = exp(φ_t(u) + ⟨ψ_t(u), x⟩)`.
pub fn mgf<T: Scalar>(spec: &AffineModelSpec<T>, t: T, u: &[T], x: &[T]) -> Result<T> {
    check_dim(spec.dim(), x.len())?;
    let (phi, psi) = flow(spec, t, u)?;
    Ok((phi + crate::scalar::dot(&psi, x)).exp())
}
