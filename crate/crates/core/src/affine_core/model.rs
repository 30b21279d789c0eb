use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::ode::OdeConfig;
use crate::scalar::Scalar;

/// One square-root diffusion `dX = λ(θ − X)dt + η√X dW`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CirComponent<T> {
    pub lambda: T,
    pub theta: T,
    pub eta: T,
}

/// Lévy measure given by finitely many atoms `(jump size, weight)`.
///
/// Only the empty measure is accepted by the shipped catalog; the field exists
/// so that the admissible tuple is represented in full.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct JumpMeasure<T> {
    pub atoms: Vec<(Vec<T>, T)>,
}

impl<T> JumpMeasure<T> {
    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty()
    }
}

/// Admissible parameters of an affine process on the nonnegative orthant.
///
/// On the canonical state space every diffusion matrix `α_i` is supported on
/// the single entry `(i, i)`, so only its diagonal value is stored.
#[derive(Debug, Clone)]
pub struct AffineModelSpec<T> {
    b: Vec<T>,
    /// `beta[i]` is the vector `β_i` paired with the state coordinate `x_i`.
    beta: Vec<Vec<T>>,
    alpha: Vec<T>,
    m: JumpMeasure<T>,
    mu: Vec<JumpMeasure<T>>,
    components: Option<Vec<CirComponent<T>>>,
    horizon: T,
    x0: Vec<T>,
    ode: OdeConfig<T>,
}

impl<T: Scalar> AffineModelSpec<T> {
    /// Independent square-root diffusions started at one.
    pub fn cir(components: Vec<CirComponent<T>>, horizon: T) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("model needs at least one component"));
        }
        let d = components.len();
        let mut b = Vec::with_capacity(d);
        let mut beta = vec![vec![T::zero(); d]; d];
        let mut alpha = Vec::with_capacity(d);
        for (i, c) in components.iter().enumerate() {
            if !(c.lambda > T::zero()) || !(c.theta >= T::zero()) || !(c.eta > T::zero()) {
                return Err(Error::invalid(format!(
                    "component {i}: need lambda > 0, theta >= 0, eta > 0"
                )));
            }
            b.push(c.lambda * c.theta);
            beta[i][i] = -c.lambda;
            alpha.push(c.eta * c.eta);
        }
        let mut spec = Self::from_admissible(b, beta, alpha, horizon)?;
        spec.components = Some(components);
        Ok(spec)
    }

    /// General diffusion-only parameters. `alpha[i]` is the `(i, i)` entry of `α_i`.
    pub fn from_admissible(b: Vec<T>, beta: Vec<Vec<T>>, alpha: Vec<T>, horizon: T) -> Result<Self> {
        let d = b.len();
        if d == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        check_dim(d, beta.len())?;
        check_dim(d, alpha.len())?;
        for row in &beta {
            check_dim(d, row.len())?;
        }
        if !(horizon > T::zero()) {
            return Err(Error::invalid("horizon must be positive"));
        }
        let spec = Self {
            b,
            beta,
            alpha,
            m: JumpMeasure::default(),
            mu: (0..d).map(|_| JumpMeasure::default()).collect(),
            components: None,
            horizon,
            x0: vec![T::one(); d],
            ode: OdeConfig::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Attaches jump measures. Anything nonzero is rejected.
    pub fn with_jumps(mut self, m: JumpMeasure<T>, mu: Vec<JumpMeasure<T>>) -> Result<Self> {
        check_dim(self.dim(), mu.len())?;
        self.m = m;
        self.mu = mu;
        self.validate()?;
        Ok(self)
    }

    pub fn with_ode_config(mut self, ode: OdeConfig<T>) -> Self {
        self.ode = ode;
        self
    }

    pub fn with_horizon(mut self, horizon: T) -> Result<Self> {
        if !(horizon > T::zero()) {
            return Err(Error::invalid("horizon must be positive"));
        }
        self.horizon = horizon;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let d = self.dim();
        for (k, &bk) in self.b.iter().enumerate() {
            if !(bk >= T::zero()) || !bk.is_finite() {
                return Err(Error::invalid(format!("drift b[{k}] must be finite and >= 0")));
            }
        }
        for i in 0..d {
            if !(self.alpha[i] >= T::zero()) || !self.alpha[i].is_finite() {
                return Err(Error::invalid(format!("alpha[{i}] must be finite and >= 0")));
            }
            for k in 0..d {
                let v = self.beta[i][k];
                if !v.is_finite() {
                    return Err(Error::invalid(format!("beta[{i}][{k}] is not finite")));
                }
                if k != i && v < T::zero() {
                    return Err(Error::invalid(format!(
                        "beta[{i}][{k}] must be >= 0 off the diagonal"
                    )));
                }
            }
        }
        if !self.m.is_zero() || self.mu.iter().any(|m| !m.is_zero()) {
            return Err(Error::Unsupported("jump measures must be zero".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    pub fn x0(&self) -> &[T] {
        &self.x0
    }

    pub fn b(&self) -> &[T] {
        &self.b
    }

    pub fn beta(&self, i: usize) -> &[T] {
        &self.beta[i]
    }

    /// The `(i, i)` entry of `α_i`.
    pub fn alpha(&self, i: usize) -> T {
        self.alpha[i]
    }

    pub fn components(&self) -> Option<&[CirComponent<T>]> {
        self.components.as_deref()
    }

    pub fn ode_config(&self) -> &OdeConfig<T> {
        &self.ode
    }

    /// True when no coordinate feeds into the drift of another.
    pub fn is_decoupled(&self) -> bool {
        (0..self.dim()).all(|i| (0..self.dim()).all(|k| k == i || self.beta[i][k] == T::zero()))
    }

    #[inline]
    pub(crate) fn f_value(&self, u: &[T]) -> T {
        crate::scalar::dot(&self.b, u)
    }

    #[inline]
    pub(crate) fn r_into(&self, u: &[T], out: &mut [T]) {
        let half = T::c(0.5);
        for i in 0..self.dim() {
            out[i] = crate::scalar::dot(&self.beta[i], u) + half * self.alpha[i] * u[i] * u[i];
        }
    }

    /// `F(u)` and `R(u)`.
    pub fn functional_characteristics(&self, u: &[T]) -> Result<(T, Vec<T>)> {
        check_dim(self.dim(), u.len())?;
        let mut r = vec![T::zero(); self.dim()];
        self.r_into(u, &mut r);
        Ok((self.f_value(u), r))
    }

    /// Drift `b + Σ_i x_i β_i` with an optional shift of the diagonal by `α_i s_i`.
    #[inline]
    pub(crate) fn drift_into(&self, x: &[T], shift: Option<&[T]>, out: &mut [T]) {
        let d = self.dim();
        out.copy_from_slice(&self.b);
        for i in 0..d {
            let xi = x[i];
            if xi == T::zero() {
                continue;
            }
            for k in 0..d {
                out[k] = out[k] + xi * self.beta[i][k];
            }
            if let Some(s) = shift {
                out[i] = out[i] + xi * self.alpha[i] * s[i];
            }
        }
    }
}
