//! Acceptance suite. Every test prints one `PASS`/`FAIL` line per criterion
//! straight to stderr, so the lines show up without `--nocapture`.

use std::io::Write;
use std::time::Instant;

use affine_libor::affine_core::{
    extended_characteristics, flow, simulate_paths_with, solve_riccati_inhomogeneous, AffineModelSpec, CirComponent,
    PiecewiseConstant, Scheme, SimulationConfig,
};
use affine_libor::multicurve::log_m0;
use affine_libor::ode::OdeConfig;
use affine_libor::pipeline::{build_extension, calibrate_scenario, run_scenario, Calibration, Scenario, Stage, PRICE_ZERO_TOL};
use affine_libor::tenor_extension::{ContinuousTenorModel, InterpolatingFunction, InterpolatorKind};
use affine_libor::xva::{
    fair_spread, generate_spot_paths, next_payment, reference_csas, price_paths, solve_tva_backward, tva_forward_mc, uniform_grid,
    SwapPricer,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(n: u32, ok: bool, detail: impl AsRef<str>) -> bool {
    let line = format!("{} criterion {n}: {}\n", if ok { "PASS" } else { "FAIL" }, detail.as_ref());
    let mut err = std::io::stderr().lock();
    let _ = err.write_all(line.as_bytes());
    let _ = err.flush();
    ok
}

fn synthetic() -> (Scenario, Calibration) {
    let s = Scenario::synthetic();
    let cal = calibrate_scenario(&s).unwrap();
    (s, cal)
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

fn random_state(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(0.0..3.0)).collect()
}

/// Closed-form CIR flow for `dX = λ(θ − X)dt + η√X dW`.
fn cir_closed_form(lambda: f64, theta: f64, eta: f64, t: f64, u: f64) -> (f64, f64) {
    let e = (-lambda * t).exp();
    let den = 1.0 - eta * eta * u * (1.0 - e) / (2.0 * lambda);
    (-(2.0 * lambda * theta / (eta * eta)) * den.ln(), u * e / den)
}

#[test]
fn criterion_01_riccati_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let tight = OdeConfig { abs_tol: 1e-12, rel_tol: 1e-12, ..OdeConfig::default() };
    let mut worst = 0.0f64;
    let mut worst_default = 0.0f64;
    for _ in 0..20 {
        let c = CirComponent::<f64> { lambda: rng.random_range(0.1..2.0), theta: rng.random_range(0.1..2.0), eta: rng.random_range(0.1..1.0) };
        let default = AffineModelSpec::cir(vec![c], 10.0).unwrap();
        let spec = default.clone().with_ode_config(tight);
        for _ in 0..20 {
            let t = rng.random_range(0.05..10.0);
            let bound = 2.0 * c.lambda / (c.eta * c.eta * (1.0 - (-c.lambda * t).exp()));
            let u = rng.random_range(-2.0..0.8 * bound);
            let (phi_cf, psi_cf) = cir_closed_form(c.lambda, c.theta, c.eta, t, u);
            let (phi, psi) = flow(&spec, t, &[u]).unwrap();
            worst = worst.max((phi - phi_cf).abs()).max((psi[0] - psi_cf).abs());
            let (phi, psi) = flow(&default, t, &[u]).unwrap();
            worst_default = worst_default.max((phi - phi_cf).abs()).max((psi[0] - psi_cf).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = worst < 1e-8 && secs < 10.0;
    assert!(verdict(
        1,
        ok,
        format!("max |error| {worst:.2e} at tolerance 1e-12 ({worst_default:.2e} at the default 1e-10) over 400 (t,u) points, {secs:.2} s")
    ));
}

#[test]
fn criterion_02_semi_flow() {
    let (_, cal) = synthetic();
    let spec = cal.mc.model();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let t = rng.random_range(0.0..5.0);
        let s = rng.random_range(0.0..5.0);
        let u: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..0.3)).collect();
        let (p_ts, q_ts) = flow(spec, t + s, &u).unwrap();
        let (p_t, q_t) = flow(spec, t, &u).unwrap();
        let (p_s, q_s) = flow(spec, s, &q_t).unwrap();
        worst = worst.max((p_ts - p_t - p_s).abs());
        for i in 0..3 {
            worst = worst.max((q_ts[i] - q_s[i]).abs());
        }
    }
    assert!(verdict(2, worst < 1e-7, format!("max residual {worst:.2e} over 100 (t,s,u) triples")));
}

#[test]
fn criterion_03_martingales() {
    let (_, cal) = synthetic();
    let ct = build_extension(&cal, InterpolatorKind::If2).unwrap();
    let mc = &cal.mc;
    let seq = mc.sequences();
    let grid = uniform_grid(10.0, 40);
    let mut cfg = SimulationConfig::new(100_000, 303, Scheme::Exact);
    cfg.substeps = Some(8);
    cfg.rate = Some(&ct);
    let paths = simulate_paths_with(mc.model(), &grid, &cfg).unwrap();
    let n = paths.n_paths;
    let checks: [(&str, &[f64]); 3] = [("M^u_0", &seq.u[0]), ("M^u_20", &seq.u[20]), ("M^v_0(6M)", &seq.v[1][0])];
    let mut worst_z = 0.0f64;
    let mut lines = Vec::new();
    for l in [10, 20, 30, 40] {
        let t = grid[l];
        for (name, u) in &checks {
            let m0 = mc.martingale_value(0.0, u, mc.model().x0()).unwrap();
            let (a, b) = mc.martingale_coefficients(t, u).unwrap();
            let vals: Vec<f64> = (0..n).map(|j| (a + b.iter().zip(paths.state(l, j)).map(|(p, q)| p * q).sum::<f64>()).exp()).collect();
            let (m, se) = mean_se(&vals);
            let z = (m - m0) / se;
            worst_z = worst_z.max(z.abs());
            lines.push(format!("{name}@{t}: z={z:.2}"));
        }
        let ir = paths.integrated_rate(l).unwrap();
        let dens: Vec<f64> = (0..n).map(|j| ct.spot_density(t, paths.state(l, j), ir[j]).unwrap()).collect();
        let (m, se) = mean_se(&dens);
        let z = (m - 1.0) / se;
        worst_z = worst_z.max(z.abs());
        lines.push(format!("density@{t}: z={z:.2}"));
    }
    assert!(verdict(3, worst_z < 3.0, format!("max |z| {worst_z:.2} at 1e5 paths [{}]", lines.join(", "))));
}

#[test]
fn criterion_04_fit_reproduction() {
    let (_, cal) = synthetic();
    let mc = &cal.mc;
    let tenor = mc.tenor();
    let init = mc.initial();
    let seq = mc.sequences();
    let t_n = tenor.horizon();
    let last = init.discount[tenor.n()];
    let mut worst = 0.0f64;
    for (l, u) in seq.u.iter().enumerate() {
        let (lm, _) = log_m0(mc.model(), t_n, u).unwrap();
        let target = init.discount[l] / last;
        worst = worst.max((lm.exp() - target).abs() / target);
    }
    let x0 = mc.model().x0().to_vec();
    let snap = mc.snapshot(0.0).unwrap();
    for x in 0..tenor.tenors().len() {
        for k in 1..=tenor.n_x(x).unwrap() {
            let l = mc.libor_rate(&snap, x, k, &x0).unwrap();
            let target = init.libor[x][k - 1];
            worst = worst.max((l - target).abs() / target);
        }
    }
    // The manifold parameter runs from the far end towards the origin.
    let strictly_decreasing = seq.u_params.windows(2).all(|w| w[0] < w[1])
        && seq.u.windows(2).all(|w| w[0].iter().zip(&w[1]).all(|(a, b)| a >= b) && w[0] != w[1]);
    let mut v_above = true;
    for x in 0..tenor.tenors().len() {
        for k in 0..=tenor.n_x(x).unwrap() {
            let l = tenor.master_index(x, k).unwrap();
            v_above &= seq.v_params[x][k] < seq.u_params[l];
            v_above &= seq.v[x][k].iter().zip(&seq.u[l]).all(|(v, u)| v >= u);
        }
    }
    let discount_ok = init.discount.windows(2).all(|w| w[1] < w[0]);
    let spreads_ok = (0..tenor.tenors().len())
        .all(|x| (1..=tenor.n_x(x).unwrap()).all(|k| init.libor[x][k - 1] > init.ois_forward(tenor, x, k).unwrap()));
    let ok = worst < 1e-9 && strictly_decreasing && v_above && discount_ok && spreads_ok;
    assert!(verdict(
        4,
        ok,
        format!("max relative error {worst:.2e}; u decreasing {strictly_decreasing}; v beyond u {v_above}; inputs decreasing/positive-spread {}", discount_ok && spreads_ok)
    ));
}

#[test]
fn criterion_05_continuous_tenor_consistency() {
    let (_, cal) = synthetic();
    let mc = &cal.mc;
    let tenor = mc.tenor();
    let seq = mc.sequences();
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut worst = 0.0f64;
    let mut monotone = true;
    for kind in InterpolatorKind::ALL {
        let ct = build_extension(&cal, kind).unwrap();
        let x = random_state(&mut rng, 3);
        for l in 0..=tenor.n() {
            let t = tenor.date(l);
            let (al, bl) = mc.martingale_coefficients(t, &seq.u[l]).unwrap();
            for k in l..=tenor.n() {
                let (ak, bk) = mc.martingale_coefficients(t, &seq.u[k]).unwrap();
                let discrete: f64 = ak - al + bk.iter().zip(&bl).zip(&x).map(|((p, q), s)| (p - q) * s).sum::<f64>();
                let (a, b) = ct.bond_coefficients(t, tenor.date(k)).unwrap();
                let cont: f64 = a + b.iter().zip(&x).map(|(p, s)| p * s).sum::<f64>();
                worst = worst.max((cont - discrete).abs());
            }
        }
        for _ in 0..1000 {
            let t = rng.random_range(0.0..10.0);
            let mut s = rng.random_range(t..=10.0);
            let mut u = rng.random_range(t..=10.0);
            if s > u {
                std::mem::swap(&mut s, &mut u);
            }
            let x = random_state(&mut rng, 3);
            monotone &= ct.bond_price(t, s, &x).unwrap() >= ct.bond_price(t, u, &x).unwrap();
        }
    }
    let ok = worst < 1e-12 && monotone;
    assert!(verdict(
        5,
        ok,
        format!("max log-space gap at tenor dates {worst:.2e}; monotone in maturity on 3x1000 pairs: {monotone}")
    ));
}

#[test]
fn criterion_06_forward_rate_difference_quotient() {
    let (_, cal) = synthetic();
    let dates = cal.mc.tenor().dates();
    let h = 1e-5;
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut worst = 0.0f64;
    let mut count = 0;
    for kind in InterpolatorKind::ALL {
        let ct = build_extension(&cal, kind).unwrap();
        let mut taken = 0;
        while taken < 1000 {
            let t = rng.random_range(0.0..9.9);
            let m = rng.random_range(t + 2.0 * h..10.0 - 2.0 * h);
            if dates.iter().any(|&d| (d - m).abs() <= 2.0 * h) {
                continue;
            }
            let x = random_state(&mut rng, 3);
            let f = ct.forward_rate(t, m, &x).unwrap();
            let up = ct.bond_price(t, m + h, &x).unwrap().ln();
            let dn = ct.bond_price(t, m - h, &x).unwrap().ln();
            worst = worst.max((f + (up - dn) / (2.0 * h)).abs());
            taken += 1;
        }
        count += taken;
    }
    assert!(verdict(6, worst < 1e-4, format!("max |f + d/dT log B| {worst:.2e} on {count} points")));
}

#[test]
fn criterion_07_if1_curve_fit() {
    let (_, cal) = synthetic();
    let ct = build_extension(&cal, InterpolatorKind::If1).unwrap();
    let interp = ct.interpolator();
    let grid = interp.fitting_grid().unwrap();
    let resid = grid.iter().map(|&t| interp.curve_residual(t).unwrap().unwrap().abs()).fold(0.0f64, f64::max);
    let curve = cal.market.forward_curve.as_ref().unwrap();
    let x0 = ct.model().x0().to_vec();
    let mut worst = 0.0f64;
    for i in 0..=1000 {
        let m = 10.0 * i as f64 / 1000.0;
        worst = worst.max((ct.forward_rate(0.0, m, &x0).unwrap() - curve.value(m)).abs());
    }
    let ok = resid < 1e-9 && worst < 1e-7;
    assert!(verdict(
        7,
        ok,
        format!("sup residual {resid:.2e} on {} grid nodes; max |f(0,T) - f~(0,T)| {worst:.2e} on 1001 maturities", grid.len())
    ));
}

#[test]
fn criterion_08_pathologies() {
    let (_, cal) = synthetic();
    let tenor = cal.mc.tenor();
    let dates = tenor.dates();
    let ct = build_extension(&cal, InterpolatorKind::If2).unwrap();
    let interp = ct.interpolator();
    let u = interp.knot_values();
    // U' constant on each interval, so q can only jump at dates.
    let mut slope_gap = 0.0f64;
    let mut interior_jump = 0.0f64;
    let mut date_jump = 0.0f64;
    let mut missing_jump = false;
    for l in 0..tenor.n() {
        let h = dates[l + 1] - dates[l];
        for frac in [0.1, 0.37, 0.5, 0.83] {
            let t = dates[l] + frac * h;
            let du = interp.derivative(t).unwrap();
            for c in 0..3 {
                let chord = (u[l + 1][c] - u[l][c]) / h;
                slope_gap = slope_gap.max((du[c] - chord).abs() / (1.0 + chord.abs()));
            }
            let qr = ct.short_rate_coefficients_side(t, t, true).unwrap();
            let ql = ct.short_rate_coefficients_side(t, t, false).unwrap();
            for c in 0..3 {
                interior_jump = interior_jump.max((qr.q[c] - ql.q[c]).abs());
            }
        }
        if l > 0 {
            let t = dates[l];
            let qr = ct.short_rate_coefficients_side(t, t, true).unwrap();
            let ql = ct.short_rate_coefficients_side(t, t, false).unwrap();
            let jump = (0..3).map(|c| (qr.q[c] - ql.q[c]).abs()).fold(0.0f64, f64::max);
            let slopes_differ = (0..3).any(|c| ((u[l + 1][c] - u[l][c]) - (u[l][c] - u[l - 1][c])).abs() > 1e-9);
            if slopes_differ && jump == 0.0 {
                missing_jump = true;
            }
            date_jump = date_jump.max(jump);
        }
    }
    let linear_ok = slope_gap < 1e-12 && interior_jump == 0.0 && date_jump > 0.0 && !missing_jump;

    // Staircase u: every interval moves a single, different component.
    let n = 12;
    let stair_dates: Vec<f64> = (0..=n).map(|l| 0.25 * l as f64).collect();
    let mut level = vec![0.4, 0.4, 0.4];
    let mut staircase = vec![level.clone()];
    for l in 0..n {
        level[l % 3] = (level[l % 3] - 0.1f64).max(0.0);
        staircase.push(level.clone());
    }
    let model = AffineModelSpec::cir(cal.mc.model().components().unwrap().to_vec(), 3.0).unwrap();
    let mut worst_q = 0.0f64;
    let mut if2_min = f64::INFINITY;
    let f3 = InterpolatingFunction::from_points(InterpolatorKind::If3, stair_dates.clone(), staircase.clone()).unwrap();
    let f2 = InterpolatingFunction::from_points(InterpolatorKind::If2, stair_dates.clone(), staircase).unwrap();
    let c3 = ContinuousTenorModel::new(model.clone(), f3).unwrap();
    let c2 = ContinuousTenorModel::new(model, f2).unwrap();
    for &t in &stair_dates[1..n] {
        for right in [true, false] {
            let s = c3.short_rate_coefficients_side(t, t, right).unwrap();
            worst_q = worst_q.max(s.p.abs()).max(s.q.iter().fold(0.0f64, |a, b| a.max(b.abs())));
        }
        let s = c2.short_rate_coefficients(t, t).unwrap();
        if2_min = if2_min.min(s.q.iter().fold(0.0f64, |a, b| a.max(b.abs())));
    }
    let c1_ok = worst_q == 0.0 && if2_min > 0.0;
    assert!(verdict(
        8,
        linear_ok && c1_ok,
        format!(
            "linear: U' off chord {slope_gap:.1e}, q jump off dates {interior_jump:.1e}, max jump at dates {date_jump:.2e}; \
             C1 staircase: max |p|,|q| at interior dates {worst_q:.1e} (linear min {if2_min:.2e})"
        )
    ));
}

#[test]
fn criteria_09_and_12_spot_measure() {
    let (s, cal) = synthetic();
    let ct = build_extension(&cal, InterpolatorKind::If2).unwrap();
    let grid = uniform_grid(10.0, 200);
    let start = Instant::now();
    let paths = generate_spot_paths(&ct, &grid, 100_000, s.simulation.seed).unwrap();
    let n = paths.n_paths;
    let x0 = ct.model().x0().to_vec();
    let mut worst_z = 0.0f64;
    let mut lines = Vec::new();
    for (l, &t) in grid.iter().enumerate() {
        if ![2.5, 5.0, 7.5, 10.0].contains(&t) {
            continue;
        }
        let disc: Vec<f64> = paths.integrated_rate(l).unwrap().iter().map(|i| (-i).exp()).collect();
        let (m, se) = mean_se(&disc);
        let z = (m - ct.bond_price(0.0, t, &x0).unwrap()) / se;
        worst_z = worst_z.max(z.abs());
        lines.push(format!("T={t}: z={z:.2}"));
    }
    let secs9 = start.elapsed().as_secs_f64();
    let ok9 = verdict(9, worst_z < 3.0 && lines.len() == 4 && secs9 < 120.0, format!("{}; {secs9:.1} s", lines.join(", ")));

    let start = Instant::now();
    let pricer = SwapPricer::new(&cal.mc, &ct, cal.swap.clone()).unwrap();
    let prices = price_paths(&pricer, &paths).unwrap();
    let csa1 = reference_csas().into_iter().next().unwrap();
    let back = solve_tva_backward(&csa1, &paths, &prices, 3).unwrap();
    let (fwd, fwd_se) = tva_forward_mc(&csa1, &paths, &prices).unwrap();
    let secs12 = start.elapsed().as_secs_f64() + secs9;
    let diff = (back.theta0 - fwd).abs();
    let combined = (back.theta0_se.powi(2) + fwd_se.powi(2)).sqrt();
    let tol = (0.05 * fwd.abs()).max(3.0 * combined);
    let ok12 = verdict(
        12,
        diff <= tol && secs12 < 600.0,
        format!(
            "backward {:.6e} (se {:.1e}) vs forward {fwd:.6e} (se {fwd_se:.1e}), relative gap {:.2}%, tolerance {tol:.2e}; {secs12:.0} s, {n} paths",
            back.theta0,
            back.theta0_se,
            100.0 * diff / fwd.abs()
        ),
    );
    assert!(ok9 && ok12);
}

#[test]
fn criterion_10_extended_mgf() {
    let spec = AffineModelSpec::cir(
        vec![CirComponent { lambda: 0.6, theta: 1.0, eta: 0.4 }, CirComponent { lambda: 0.3, theta: 0.8, eta: 0.5 }],
        2.0,
    )
    .unwrap();
    let t_end = 2.0;
    let steps = 400;
    let grid = uniform_grid(t_end, steps);
    let paths = simulate_paths_with(&spec, &grid, &SimulationConfig::new(20_000, 1010, Scheme::Exact)).unwrap();
    let n = paths.n_paths;
    let mut rng = ChaCha8Rng::seed_from_u64(1011);
    let mut worst_z = 0.0f64;
    let mut lines = Vec::new();
    for _ in 0..5 {
        let ux: Vec<f64> = (0..2).map(|_| rng.random_range(-0.5..0.3)).collect();
        let uy: Vec<f64> = (0..2).map(|_| rng.random_range(-1.0..0.0)).collect();
        let theta = PiecewiseConstant::new(
            vec![0.0, 1.0],
            vec![(0..2).map(|_| rng.random_range(0.0..1.5)).collect(), (0..2).map(|_| rng.random_range(0.0..1.5)).collect()],
        )
        .unwrap();
        let ext = extended_characteristics(&spec, theta.clone()).unwrap();
        let mut u = ux.clone();
        u.extend_from_slice(&uy);
        let (phi, psi) = solve_riccati_inhomogeneous(&ext, 0.0, t_end, &u, spec.ode_config()).unwrap();
        let exact = (phi + psi[0] * spec.x0()[0] + psi[1] * spec.x0()[1]).exp();
        let vals: Vec<f64> = (0..n)
            .map(|j| {
                let mut y = [0.0; 2];
                for l in 0..steps {
                    let h = grid[l + 1] - grid[l];
                    let w = theta.at(grid[l]);
                    let (a, b) = (paths.state(l, j), paths.state(l + 1, j));
                    for i in 0..2 {
                        y[i] += w[i] * 0.5 * h * (a[i] + b[i]);
                    }
                }
                let x = paths.state(steps, j);
                (ux[0] * x[0] + ux[1] * x[1] + uy[0] * y[0] + uy[1] * y[1]).exp()
            })
            .collect();
        let (m, se) = mean_se(&vals);
        let z = (m - exact) / se;
        worst_z = worst_z.max(z.abs());
        lines.push(format!("z={z:.2}"));
    }
    assert!(verdict(10, worst_z < 3.0, format!("{} over 5 configurations, 2e4 paths", lines.join(", "))));
}

#[test]
fn criterion_11_single_curve_degeneracy() {
    let (s, cal) = synthetic();
    let ct = build_extension(&cal, InterpolatorKind::If2).unwrap();
    let single = cal.mc.single_curve().unwrap();
    let tenor = single.tenor();
    let swap = cal.swap.with_spread(0.0);
    let pricer = SwapPricer::new(&single, &ct, swap.clone()).unwrap();
    let grid = uniform_grid(10.0, 200);
    let paths = generate_spot_paths(&ct, &grid, 2_000, s.simulation.seed).unwrap();
    let prices = price_paths(&pricer, &paths).unwrap();
    let n = paths.n_paths;
    let end = swap.end(tenor).unwrap();
    let seq = single.sequences();
    let mut aligned_worst = 0.0f64;
    let mut identity_worst = 0.0f64;
    let mut aligned_times = 0;
    for (l, &t) in grid.iter().enumerate() {
        if t > end {
            continue;
        }
        let i2 = next_payment(tenor, swap.long_tenor, swap.p2, t).unwrap();
        let i1 = next_payment(tenor, swap.short_tenor, swap.p1, t).unwrap();
        let a = tenor.master_index(swap.long_tenor, i2 - 1).unwrap();
        let b = tenor.master_index(swap.short_tenor, i1 - 1).unwrap();
        let (ca, cb) = (single.martingale_coefficients(t, &seq.u[a]).unwrap(), single.martingale_coefficients(t, &seq.u[b]).unwrap());
        let (pt, qt) = ct.spot_exponents(t).unwrap();
        if a == b {
            aligned_times += 1;
        }
        for j in 0..n {
            let x = paths.state(l, j);
            let lin = |c: &(f64, Vec<f64>)| c.0 + c.1.iter().zip(x).map(|(p, q)| p * q).sum::<f64>();
            let lead = pt + qt.iter().zip(x).map(|(p, q)| p * q).sum::<f64>();
            let expected = (lin(&ca) - lead).exp() - (lin(&cb) - lead).exp();
            let p = prices[l * n + j];
            identity_worst = identity_worst.max((p - expected).abs());
            if a == b {
                aligned_worst = aligned_worst.max(p.abs());
            }
        }
    }
    let x0 = cal.mc.model().x0().to_vec();
    let single_spread = fair_spread(&single, &swap, swap.inception, &x0).unwrap();
    let multi = SwapPricer::new(&cal.mc, &ct, cal.swap.clone()).unwrap();
    let p_incep = multi.price(cal.swap.inception, &x0).unwrap();
    let ok = aligned_worst < 1e-12 && identity_worst < 1e-12 && p_incep.abs() < 1e-12 && single_spread.abs() < 1e-12;
    assert!(verdict(
        11,
        ok,
        format!(
            "v=u, S=0: max |P_t| {aligned_worst:.1e} at {aligned_times} reset-aligned times, telescoped identity {identity_worst:.1e} elsewhere; \
             fair spread {:.6e}: |P_r| {:.1e}; single-curve fair spread {single_spread:.1e}",
            cal.swap.spread,
            p_incep.abs()
        )
    ));
}

#[test]
fn criterion_13_model_risk_pattern() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = Scenario::synthetic();
    s.simulation.n_paths = 4_000;
    s.simulation.compare_paths = 4_000;
    s.output_dir = dir.path().to_path_buf();
    let rep = run_scenario(&s, Stage::Compare).unwrap();
    let cmp = rep.comparison.unwrap();
    let pair = |a, b| cmp.pairs.iter().find(|p| p.a == a && p.b == b).unwrap();
    let p23 = pair(InterpolatorKind::If2, InterpolatorKind::If3);
    let price_curved = p23.segment_mean(&p23.price, "curved");
    let tva_curved: Vec<f64> = p23.tva.iter().map(|(_, v)| p23.segment_mean(v, "curved")).collect();
    let ok_a = price_curved < PRICE_ZERO_TOL && !tva_curved.is_empty() && tva_curved.iter().all(|&v| v > PRICE_ZERO_TOL);
    let mut ok_b = true;
    let mut lines = Vec::new();
    for other in [InterpolatorKind::If2, InterpolatorKind::If3] {
        let p = pair(InterpolatorKind::If1, other);
        let c = p.segment_mean(&p.price, "curved");
        let st = p.segment_mean(&p.price, "straight");
        ok_b &= c > st;
        lines.push(format!("if1-{other} curved {c:.2e} > straight {st:.2e}"));
    }
    assert!(verdict(
        13,
        ok_a && ok_b,
        format!(
            "(a) if2-if3 curved price diff {price_curved:.1e}, TVA diffs [{}]; (b) {}; 4000 paths",
            tva_curved.iter().map(|v| format!("{v:.2e}")).collect::<Vec<_>>().join(", "),
            lines.join(", ")
        )
    ));
}
