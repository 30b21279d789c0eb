//! Path simulation of the driver on a reporting grid.
//!
//! Each path owns a ChaCha8 stream selected by its index, so results do not
//! depend on how paths are spread over worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::affine_core::model::AffineModelSpec;
use crate::error::{Error, Result};
use crate::scalar::{dot, pos, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Exact,
    EulerFullTruncation,
}

/// Time-dependent shift `s_t` turning the drift of coordinate `i` into
/// `b_i + Σ_k x_k β_{k,i} + α_i s_{t,i} x_i`, i.e. `R(w + s) − R(s)` dynamics.
pub trait DriftModifier<T: Scalar>: Sync {
    fn shift(&self, t: T, out: &mut [T]);
}

/// Affine rate `p_t + ⟨q_t, x⟩` accumulated along each path.
pub trait RateIntegrand<T: Scalar>: Sync {
    /// Writes `q` and returns `p` at `t`, taking the right limit when `right`
    /// is set and the left limit otherwise.
    fn coefficients(&self, t: T, right: bool, q: &mut [T]) -> Result<T>;
}

#[derive(Clone, Copy)]
pub struct SimulationConfig<'a, T: Scalar> {
    pub n_paths: usize,
    pub seed: u64,
    pub scheme: Scheme,
    /// Fine steps per reporting step; `None` picks 4 for Euler and 1 for exact.
    pub substeps: Option<usize>,
    pub drift: Option<&'a dyn DriftModifier<T>>,
    pub rate: Option<&'a dyn RateIntegrand<T>>,
}

impl<'a, T: Scalar> SimulationConfig<'a, T> {
    pub fn new(n_paths: usize, seed: u64, scheme: Scheme) -> Self {
        Self { n_paths, seed, scheme, substeps: None, drift: None, rate: None }
    }
}

/// Simulated states on a fixed grid, stored `[time][path][dim]`, with optional
/// pathwise short rate and its running integral stored `[time][path]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathGrid<T> {
    pub times: Vec<T>,
    pub n_paths: usize,
    pub dim: usize,
    pub seed: u64,
    pub states: Vec<T>,
    pub short_rate: Option<Vec<T>>,
    pub integrated_rate: Option<Vec<T>>,
    /// Spot-density exponents `(P_t, Q_t)` per reporting time, when attached.
    pub density_exponents: Option<(Vec<T>, Vec<Vec<T>>)>,
}

impl<T: Scalar> PathGrid<T> {
    pub fn n_times(&self) -> usize {
        self.times.len()
    }

    pub fn slice(&self, l: usize) -> &[T] {
        let w = self.n_paths * self.dim;
        &self.states[l * w..(l + 1) * w]
    }

    pub fn state(&self, l: usize, path: usize) -> &[T] {
        let base = (l * self.n_paths + path) * self.dim;
        &self.states[base..base + self.dim]
    }

    pub fn short_rate(&self, l: usize) -> Option<&[T]> {
        self.short_rate.as_ref().map(|r| &r[l * self.n_paths..(l + 1) * self.n_paths])
    }

    pub fn integrated_rate(&self, l: usize) -> Option<&[T]> {
        self.integrated_rate.as_ref().map(|r| &r[l * self.n_paths..(l + 1) * self.n_paths])
    }
}

pub fn validate_grid<T: Scalar>(grid: &[T]) -> Result<()> {
    if grid.is_empty() || grid[0] != T::zero() {
        return Err(Error::invalid("time grid must start at 0"));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid("time grid must be strictly increasing"));
    }
    Ok(())
}

/// Convenience form of [`simulate_paths_with`].
pub fn simulate_paths<T: Scalar>(
    spec: &AffineModelSpec<T>,
    grid: &[T],
    n_paths: usize,
    seed: u64,
    scheme: Scheme,
    drift: Option<&dyn DriftModifier<T>>,
) -> Result<PathGrid<T>> {
    let mut cfg = SimulationConfig::new(n_paths, seed, scheme);
    cfg.drift = drift;
    simulate_paths_with(spec, grid, &cfg)
}

struct FinePoint<T> {
    h: T,
    shift: Option<Vec<T>>,
    // (p, q) just after the start and just before the end of the fine step.
    rate_left_end: Option<(T, Vec<T>)>,
    rate_right_end: Option<(T, Vec<T>)>,
}

const CHUNK: usize = 512;

pub fn simulate_paths_with<T: Scalar>(spec: &AffineModelSpec<T>, grid: &[T], cfg: &SimulationConfig<'_, T>) -> Result<PathGrid<T>> {
    validate_grid(grid)?;
    if cfg.n_paths == 0 {
        return Err(Error::invalid("need at least one path"));
    }
    if cfg.scheme == Scheme::Exact {
        if cfg.drift.is_some() {
            return Err(Error::Unsupported(
                "exact sampling cannot be combined with a drift modifier".into(),
            ));
        }
        if !spec.is_decoupled() {
            return Err(Error::Unsupported("exact sampling needs decoupled components".into()));
        }
    }
    let substeps = cfg.substeps.unwrap_or(match cfg.scheme {
        Scheme::Exact => 1,
        Scheme::EulerFullTruncation => 4,
    });
    if substeps == 0 {
        return Err(Error::invalid("substeps must be positive"));
    }
    let d = spec.dim();
    let n = cfg.n_paths;
    let nt = grid.len();

    // Per-fine-step coefficient tables, shared by all paths.
    let mut steps: Vec<Vec<FinePoint<T>>> = Vec::with_capacity(nt.saturating_sub(1));
    for l in 0..nt.saturating_sub(1) {
        let (a, b) = (grid[l], grid[l + 1]);
        let h = (b - a) / T::from_usize_lossy(substeps);
        let mut fine = Vec::with_capacity(substeps);
        for s in 0..substeps {
            let t = a + h * T::from_usize_lossy(s);
            let t_next = if s + 1 == substeps { b } else { t + h };
            let shift = cfg.drift.map(|dm| {
                let mut v = vec![T::zero(); d];
                dm.shift(t, &mut v);
                v
            });
            let (rl, rr) = match cfg.rate {
                Some(rate) => {
                    let mut ql = vec![T::zero(); d];
                    let pl = rate.coefficients(t, true, &mut ql)?;
                    let mut qr = vec![T::zero(); d];
                    let pr = rate.coefficients(t_next, false, &mut qr)?;
                    (Some((pl, ql)), Some((pr, qr)))
                }
                None => (None, None),
            };
            fine.push(FinePoint { h: t_next - t, shift, rate_left_end: rl, rate_right_end: rr });
        }
        steps.push(fine);
    }
    let report_rate: Option<Vec<(T, Vec<T>)>> = match cfg.rate {
        Some(rate) => Some(
            grid.iter()
                .map(|&t| {
                    let mut q = vec![T::zero(); d];
                    let p = rate.coefficients(t, true, &mut q)?;
                    Ok((p, q))
                })
                .collect::<Result<_>>()?,
        ),
        None => None,
    };

    let mut raw: Vec<T> = vec![T::one(); n * d];
    raw.chunks_mut(d).for_each(|x| x.copy_from_slice(spec.x0()));
    let mut rngs: Vec<ChaCha8Rng> = (0..n)
        .map(|j| {
            let mut r = ChaCha8Rng::seed_from_u64(cfg.seed);
            r.set_stream(j as u64);
            r
        })
        .collect();
    let mut integral = vec![T::zero(); if cfg.rate.is_some() { n } else { 0 }];

    let mut states = Vec::with_capacity(nt * n * d);
    let mut short_rate = report_rate.as_ref().map(|_| Vec::with_capacity(nt * n));
    let mut integrated = cfg.rate.map(|_| Vec::with_capacity(nt * n));

    let record = |raw: &[T], integral: &[T], l: usize, states: &mut Vec<T>, sr: &mut Option<Vec<T>>, ir: &mut Option<Vec<T>>| {
        states.extend(raw.iter().map(|&x| pos(x)));
        if let (Some(sr), Some(table)) = (sr.as_mut(), report_rate.as_ref()) {
            let (p, q) = &table[l];
            sr.extend(raw.chunks(d).map(|x| {
                let mut r = *p;
                for i in 0..d {
                    r = r + q[i] * pos(x[i]);
                }
                r
            }));
        }
        if let Some(ir) = ir.as_mut() {
            ir.extend_from_slice(integral);
        }
    };
    record(&raw, &integral, 0, &mut states, &mut short_rate, &mut integrated);

    for (l, fine) in steps.iter().enumerate() {
        let has_rate = cfg.rate.is_some();
        let scheme = cfg.scheme;
        let work = |(x_chunk, rng_chunk, int_chunk): (&mut [T], &mut [ChaCha8Rng], &mut [T])| {
            let mut drift = vec![T::zero(); d];
            let mut xp = vec![T::zero(); d];
            for (j, rng) in rng_chunk.iter_mut().enumerate() {
                let x = &mut x_chunk[j * d..(j + 1) * d];
                for fp in fine {
                    for i in 0..d {
                        xp[i] = pos(x[i]);
                    }
                    let r_start = fp.rate_left_end.as_ref().map(|(p, q)| *p + dot(q, &xp));
                    match scheme {
                        Scheme::EulerFullTruncation => {
                            spec.drift_into(&xp, fp.shift.as_deref(), &mut drift);
                            let sq = fp.h.sqrt();
                            for i in 0..d {
                                let z = T::sample_standard_normal(rng);
                                x[i] = x[i] + drift[i] * fp.h + (spec.alpha(i) * xp[i]).sqrt() * sq * z;
                            }
                        }
                        Scheme::Exact => {
                            for i in 0..d {
                                x[i] = exact_cir_step(spec, i, xp[i], fp.h, rng);
                            }
                        }
                    }
                    if has_rate {
                        for i in 0..d {
                            xp[i] = pos(x[i]);
                        }
                        let (p, q) = fp.rate_right_end.as_ref().expect("rate table present");
                        let r_end = *p + dot(q, &xp);
                        int_chunk[j] = int_chunk[j] + T::c(0.5) * fp.h * (r_start.expect("rate table present") + r_end);
                    }
                }
            }
        };
        if has_rate {
            raw.par_chunks_mut(CHUNK * d)
                .zip(rngs.par_chunks_mut(CHUNK))
                .zip(integral.par_chunks_mut(CHUNK))
                .for_each(|((a, b), c)| work((a, b, c)));
        } else {
            raw.par_chunks_mut(CHUNK * d)
                .zip(rngs.par_chunks_mut(CHUNK))
                .for_each(|(a, b)| work((a, b, &mut [])));
        }
        record(&raw, &integral, l + 1, &mut states, &mut short_rate, &mut integrated);
    }

    Ok(PathGrid {
        times: grid.to_vec(),
        n_paths: n,
        dim: d,
        seed: cfg.seed,
        states,
        short_rate,
        integrated_rate: integrated,
        density_exponents: None,
    })
}

/// One exact transition of a decoupled square-root coordinate over `h`.
fn exact_cir_step<T: Scalar, R: rand::Rng + ?Sized>(spec: &AffineModelSpec<T>, i: usize, x: T, h: T, rng: &mut R) -> T {
    let lambda = -spec.beta(i)[i];
    let b = spec.b()[i];
    let a = spec.alpha(i);
    let small = T::c(1e-12);
    let (decay, growth) = if lambda.abs() < small {
        (T::one(), h)
    } else {
        let e = (-lambda * h).exp();
        (e, (T::one() - e) / lambda)
    };
    if a == T::zero() {
        return x * decay + b * growth;
    }
    // X_{t+h} = c · χ'²_δ(κ) with the noncentral chi-square as a Poisson mixture of gammas.
    let c = a * growth / T::c(4.0);
    let delta = T::c(4.0) * b / a;
    let kappa = x * decay / c;
    let n = T::sample_poisson(kappa * T::c(0.5), rng);
    let shape = delta * T::c(0.5) + T::from_usize_lossy(n as usize);
    if shape <= T::zero() {
        return T::zero();
    }
    c * T::c(2.0) * T::sample_gamma(shape, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine_core::model::CirComponent;

    fn grid(n: usize, t: f64) -> Vec<f64> {
        (0..=n).map(|i| t * i as f64 / n as f64).collect()
    }

    #[test]
    fn zero_diffusion_is_deterministic() {
        let m = AffineModelSpec::from_admissible(vec![0.5, 0.2], vec![vec![-0.5, 0.0], vec![0.0, -0.4]], vec![0.0, 0.0], 5.0).unwrap();
        let g = grid(10, 2.0);
        for scheme in [Scheme::Exact, Scheme::EulerFullTruncation] {
            let pg = simulate_paths(&m, &g, 3, 7, scheme, None).unwrap();
            for (l, &t) in g.iter().enumerate() {
                for j in 0..3 {
                    let x = pg.state(l, j);
                    let e0 = 1.0 + (1.0 - 1.0) * (-0.5 * t).exp();
                    let e1 = 0.5 + 0.5 * (-0.4 * t).exp();
                    let tol = if scheme == Scheme::Exact { 1e-12 } else { 5e-3 };
                    assert!((x[0] - e0).abs() < tol);
                    assert!((x[1] - e1).abs() < tol, "{} {}", x[1], e1);
                }
            }
        }
    }

    #[test]
    fn exact_mean_matches() {
        let (l, th, eta) = (0.5, 1.3, 0.4);
        let m = AffineModelSpec::cir(vec![CirComponent { lambda: l, theta: th, eta }], 5.0).unwrap();
        let pg = simulate_paths(&m, &[0.0, 1.0], 50_000, 11, Scheme::Exact, None).unwrap();
        let xs: Vec<f64> = (0..pg.n_paths).map(|j| pg.state(1, j)[0]).collect();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let expect = th + (1.0 - th) * (-l as f64).exp();
        assert!((mean - expect).abs() < 3.0 * (var / n).sqrt());
    }

    #[test]
    fn reproducible_and_nonnegative() {
        let m = AffineModelSpec::cir(vec![CirComponent { lambda: 0.3, theta: 0.2, eta: 0.9 }], 5.0).unwrap();
        let g = grid(20, 2.0);
        let a = simulate_paths(&m, &g, 1000, 5, Scheme::EulerFullTruncation, None).unwrap();
        let b = simulate_paths(&m, &g, 1000, 5, Scheme::EulerFullTruncation, None).unwrap();
        assert_eq!(a, b);
        assert!(a.states.iter().all(|&x| x >= 0.0));
        assert!(a.slice(0).iter().all(|&x| x == 1.0));
    }

    struct Shift;
    impl DriftModifier<f64> for Shift {
        fn shift(&self, _t: f64, out: &mut [f64]) {
            out.fill(0.1);
        }
    }

    #[test]
    fn exact_with_drift_is_rejected() {
        let m = AffineModelSpec::cir(vec![CirComponent { lambda: 0.3, theta: 0.2, eta: 0.9 }], 5.0).unwrap();
        assert!(matches!(
            simulate_paths(&m, &[0.0, 1.0], 10, 1, Scheme::Exact, Some(&Shift)),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn bad_grid_rejected() {
        let m = AffineModelSpec::cir(vec![CirComponent { lambda: 0.3, theta: 0.2, eta: 0.9 }], 5.0).unwrap();
        assert!(simulate_paths(&m, &[0.5, 1.0], 10, 1, Scheme::Exact, None).is_err());
        assert!(simulate_paths(&m, &[0.0, 1.0, 1.0], 10, 1, Scheme::Exact, None).is_err());
    }
}
