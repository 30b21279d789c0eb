use rayon::prelude::*;

use crate::affine_core::{simulate_paths_with, PathGrid, Scheme, SimulationConfig};
use crate::error::{check_dim, Error, Result};
use crate::scalar::Scalar;
use crate::tenor_extension::ContinuousTenorModel;
use crate::xva::csa::CsaSpec;
use crate::xva::knn::{average, knn_indices};
use crate::xva::swap::SwapPricer;

/// Hermite sub-nodes per tenor interval in the spot-drift table.
pub const SPOT_TABLE_NODES: usize = 8;
/// Euler sub-steps per reporting step.
pub const SPOT_SUBSTEPS: usize = 4;

/// Driver paths under the spot measure with pathwise `r_t`, `∫_0^t r` and the
/// density exponents `(P_t, Q_t)` on `grid`.
pub fn generate_spot_paths<T: Scalar>(ct: &ContinuousTenorModel<T>, grid: &[T], n_paths: usize, seed: u64) -> Result<PathGrid<T>> {
    if let Some(&last) = grid.last() {
        if last > ct.horizon() {
            return Err(Error::invalid("simulation grid extends past T_N"));
        }
    }
    let table = ct.spot_table(SPOT_TABLE_NODES)?;
    let mut cfg = SimulationConfig::new(n_paths, seed, Scheme::EulerFullTruncation);
    cfg.substeps = Some(SPOT_SUBSTEPS);
    cfg.drift = Some(&table);
    cfg.rate = Some(ct);
    let mut paths = simulate_paths_with(ct.model(), grid, &cfg)?;
    let mut ps = Vec::with_capacity(grid.len());
    let mut qs = Vec::with_capacity(grid.len());
    for &t in grid {
        let (p, q) = ct.spot_exponents(t)?;
        ps.push(p);
        qs.push(q);
    }
    paths.density_exponents = Some((ps, qs));
    Ok(paths)
}

/// Uniform grid `0, T/n, …, T`.
pub fn uniform_grid<T: Scalar>(horizon: T, n_steps: usize) -> Vec<T> {
    (0..=n_steps).map(|i| horizon * T::from_usize_lossy(i) / T::from_usize_lossy(n_steps)).collect()
}

/// Clean swap prices `[time][path]`; zero after the final payment date.
pub fn price_paths<T: Scalar>(pricer: &SwapPricer<'_, T>, paths: &PathGrid<T>) -> Result<Vec<T>> {
    let end = pricer.swap.end(pricer.mc.tenor())?;
    let d = paths.dim;
    let mut out = Vec::with_capacity(paths.n_times() * paths.n_paths);
    for (l, &t) in paths.times.iter().enumerate() {
        if t > end {
            out.extend(std::iter::repeat_n(T::zero(), paths.n_paths));
            continue;
        }
        let layer = pricer.layer(t)?;
        let slice = paths.slice(l);
        let mut vals = vec![T::zero(); paths.n_paths];
        vals.par_iter_mut().enumerate().for_each(|(j, v)| *v = layer.eval(&slice[j * d..(j + 1) * d]));
        out.extend(vals);
    }
    Ok(out)
}

/// Mean, 2.5/97.5 percentiles and standard error of one slice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceStats<T> {
    pub mean: T,
    pub p025: T,
    pub p975: T,
    pub se: T,
}

pub fn slice_stats<T: Scalar>(v: &[T]) -> SliceStats<T> {
    let n = v.len();
    let nf = T::from_usize_lossy(n);
    let mean = v.iter().copied().sum::<T>() / nf;
    let var = if n > 1 {
        v.iter().map(|&x| (x - mean) * (x - mean)).sum::<T>() / T::from_usize_lossy(n - 1)
    } else {
        T::zero()
    };
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    SliceStats { mean, p025: percentile(&s, T::c(0.025)), p975: percentile(&s, T::c(0.975)), se: (var / nf).sqrt() }
}

/// Linear interpolation between order statistics of sorted data.
fn percentile<T: Scalar>(sorted: &[T], p: T) -> T {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = p * T::from_usize_lossy(n - 1);
    let lo = h.floor().to_usize().unwrap_or(0).min(n - 1);
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - T::from_usize_lossy(lo)) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq)]
pub struct TvaResult<T> {
    pub csa: String,
    pub times: Vec<T>,
    pub n_paths: usize,
    /// `Θ` stored `[time][path]`.
    pub theta: Vec<T>,
    pub theta0: T,
    pub theta0_se: T,
    pub stats: Vec<SliceStats<T>>,
}

impl<T: Scalar> TvaResult<T> {
    pub fn slice(&self, l: usize) -> &[T] {
        &self.theta[l * self.n_paths..(l + 1) * self.n_paths]
    }
}

fn check_surface<T: Scalar>(paths: &PathGrid<T>, prices: &[T]) -> Result<()> {
    check_dim(paths.n_times() * paths.n_paths, prices.len())?;
    if paths.short_rate.is_none() {
        return Err(Error::invalid("paths carry no short rate"));
    }
    if paths.n_times() < 2 {
        return Err(Error::invalid("need at least one time step"));
    }
    Ok(())
}

/// Backward regression `Θ_l = E[Θ_{l+1} + h g(t_{l+1}, X_{t_{l+1}}, Θ_{l+1}) | X_{t_l}]`
/// with `Θ_n = 0` and an `m`-nearest-neighbour estimator, for several CSAs
/// sharing the neighbour search.
///
/// The first slice is degenerate (every path starts at `x_0`), so `Θ_0` is
/// the cross-path mean of the regressand.
pub fn solve_tva_backward_many<T: Scalar>(csas: &[CsaSpec<T>], paths: &PathGrid<T>, prices: &[T], m: usize) -> Result<Vec<TvaResult<T>>> {
    check_surface(paths, prices)?;
    for c in csas {
        c.validate()?;
    }
    let n = paths.n_paths;
    let nt = paths.n_times();
    let mut theta: Vec<Vec<T>> = csas.iter().map(|_| vec![T::zero(); nt * n]).collect();
    let mut se0 = vec![T::zero(); csas.len()];
    let mut resp = vec![T::zero(); n];
    for l in (0..nt - 1).rev() {
        let h = paths.times[l + 1] - paths.times[l];
        let r = paths.short_rate(l + 1).expect("checked");
        let p = &prices[(l + 1) * n..(l + 2) * n];
        let idx = if l > 0 { Some(knn_indices(paths.slice(l), paths.slice(l), paths.dim, m)?) } else { None };
        for (ci, (c, th)) in csas.iter().zip(theta.iter_mut()).enumerate() {
            let (head, tail) = th.split_at_mut((l + 1) * n);
            let next = &tail[..n];
            resp.par_iter_mut().enumerate().for_each(|(j, v)| {
                *v = next[j] + h * c.tva_coefficient(r[j], p[j], next[j]);
            });
            let cur = &mut head[l * n..];
            match &idx {
                Some(idx) => cur.copy_from_slice(&average(idx, &resp, m)),
                None => {
                    let st = slice_stats(&resp);
                    se0[ci] = st.se;
                    cur.iter_mut().for_each(|v| *v = st.mean);
                }
            }
        }
    }
    let out = csas
        .iter()
        .zip(theta)
        .zip(se0)
        .map(|((c, th), se)| TvaResult {
            csa: c.name.clone(),
            times: paths.times.clone(),
            n_paths: n,
            theta0: th[0],
            theta0_se: se,
            stats: (0..nt).map(|l| slice_stats(&th[l * n..(l + 1) * n])).collect(),
            theta: th,
        })
        .collect();
    Ok(out)
}

pub fn solve_tva_backward<T: Scalar>(csa: &CsaSpec<T>, paths: &PathGrid<T>, prices: &[T], m: usize) -> Result<TvaResult<T>> {
    Ok(solve_tva_backward_many(std::slice::from_ref(csa), paths, prices, m)?.pop().expect("one result per CSA"))
}

/// Forward representation of a linear TVA,
/// `Θ_0 = E[Σ_{l≥1} h D_{t_l} g̃(t_l)]` with `D_t = exp(−∫_0^t r − c t)` and
/// `g = g̃ − (r + c)Θ`. Returns the estimate and its standard error.
pub fn tva_forward_mc<T: Scalar>(csa: &CsaSpec<T>, paths: &PathGrid<T>, prices: &[T]) -> Result<(T, T)> {
    let c = csa.linear_theta_rate()?;
    check_surface(paths, prices)?;
    let integral = paths.integrated_rate.as_ref().ok_or_else(|| Error::invalid("paths carry no integrated rate"))?;
    let n = paths.n_paths;
    let nt = paths.n_times();
    let per_path: Vec<T> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut acc = T::zero();
            for l in 1..nt {
                let h = paths.times[l] - paths.times[l - 1];
                let t = paths.times[l];
                let disc = (-integral[l * n + j] - c * t).exp();
                acc = acc + h * disc * csa.tva_coefficient(T::zero(), prices[l * n + j], T::zero());
            }
            acc
        })
        .collect();
    let st = slice_stats(&per_path);
    Ok((st.mean, st.se))
}
