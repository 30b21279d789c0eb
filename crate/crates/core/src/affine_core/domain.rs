use crate::affine_core::flow::flow;
use crate::affine_core::model::AffineModelSpec;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Per-component upper bounds of the exponential-moment box at a horizon.
///
/// `None` means the flow stayed finite up to the search cap.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentDomain<T> {
    pub horizon: T,
    pub upper: Vec<Option<T>>,
}

impl<T: Scalar> MomentDomain<T> {
    /// Whether `u` lies strictly inside the box (upper bounds only; the box is
    /// unbounded below on the orthant).
    pub fn contains(&self, u: &[T]) -> bool {
        u.iter().zip(&self.upper).all(|(&ui, b)| match b {
            Some(b) => ui < *b,
            None => true,
        })
    }
}

const SEARCH_CAP: f64 = 1e7;
const RESOLUTION: f64 = 1e-6;

fn blows_up<T: Scalar>(spec: &AffineModelSpec<T>, horizon: T, u: &[T]) -> Result<bool> {
    match flow(spec, horizon, u) {
        Ok(_) => Ok(false),
        Err(Error::DomainViolation { .. }) => Ok(true),
        Err(e) => Err(e),
    }
}

/// Bisection on the blow-up indicator along each coordinate axis.
pub fn moment_domain<T: Scalar>(spec: &AffineModelSpec<T>, horizon: T) -> Result<MomentDomain<T>> {
    if !(horizon > T::zero()) {
        return Err(Error::invalid("horizon must be positive"));
    }
    let d = spec.dim();
    let mut upper = Vec::with_capacity(d);
    for i in 0..d {
        let probe = |x: T| -> Result<bool> {
            let mut u = vec![T::zero(); d];
            u[i] = x;
            blows_up(spec, horizon, &u)
        };
        let mut lo = T::zero();
        let mut hi = T::one();
        let cap = T::c(SEARCH_CAP);
        let mut found = false;
        while hi <= cap {
            if probe(hi)? {
                found = true;
                break;
            }
            lo = hi;
            hi = hi * T::c(2.0);
        }
        if !found {
            upper.push(None);
            continue;
        }
        let res = T::c(RESOLUTION);
        while hi - lo > res * hi.max(T::one()) {
            let mid = T::c(0.5) * (lo + hi);
            if probe(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        upper.push(Some(T::c(0.5) * (lo + hi)));
    }
    Ok(MomentDomain { horizon, upper })
}
