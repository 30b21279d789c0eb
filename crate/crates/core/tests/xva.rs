use affine_libor::pipeline::{build_extension, calibrate_scenario, Scenario};
use affine_libor::tenor_extension::InterpolatorKind;
use affine_libor::xva::{
    generate_spot_paths, knn_conditional_expectation, reference_csas, price_paths, solve_tva_backward, solve_tva_backward_many,
    uniform_grid, CsaSpec, SwapPricer,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[test]
fn swap_price_matches_discounted_cashflows() {
    let s = Scenario::synthetic();
    let cal = calibrate_scenario(&s).unwrap();
    let ct = build_extension(&cal, InterpolatorKind::If2).unwrap();
    let swap = cal.swap.with_spread(0.0);
    let tenor = cal.mc.tenor();
    let pricer = SwapPricer::new(&cal.mc, &ct, swap.clone()).unwrap();
    let x0 = cal.mc.model().x0().to_vec();
    let model_price = pricer.price(0.0, &x0).unwrap();

    let steps = 200;
    let h = tenor.horizon() / steps as f64;
    let grid = uniform_grid(tenor.horizon(), steps);
    let paths = generate_spot_paths(&ct, &grid, 20_000, 11).unwrap();
    let n = paths.n_paths;
    let idx = |t: f64| (t / h).round() as usize;
    let mut payoff = vec![0.0; n];
    for (x, p, q, sign) in [(swap.long_tenor, swap.p2, swap.q2, 1.0), (swap.short_tenor, swap.p1, swap.q1, -1.0)] {
        let delta = tenor.delta_x(x).unwrap();
        for k in p + 1..=q {
            let fix = tenor.tenor_date(x, k - 1).unwrap();
            let pay = tenor.tenor_date(x, k).unwrap();
            let snap = cal.mc.snapshot(fix).unwrap();
            let (lf, lp) = (idx(fix), idx(pay));
            let disc = paths.integrated_rate(lp).unwrap();
            for (j, acc) in payoff.iter_mut().enumerate() {
                let l = cal.mc.libor_rate(&snap, x, k, paths.state(lf, j)).unwrap();
                *acc += sign * delta * l * (-disc[j]).exp();
            }
        }
    }
    let mean = payoff.iter().sum::<f64>() / n as f64;
    let var = payoff.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let se = (var / n as f64).sqrt();
    assert!(model_price.abs() > 5.0 * se, "price {model_price} too small to test against se {se}");
    assert!((mean - model_price).abs() < 4.0 * se, "mc {mean} vs model {model_price} (se {se})");
}

#[test]
fn fair_spread_zeroes_price_and_spread_enters_linearly() {
    let s = Scenario::synthetic();
    let cal = calibrate_scenario(&s).unwrap();
    let ct = build_extension(&cal, InterpolatorKind::If3).unwrap();
    let x0 = cal.mc.model().x0().to_vec();
    let tenor = cal.mc.tenor();
    let price = |spread: f64, t: f64| SwapPricer::new(&cal.mc, &ct, cal.swap.with_spread(spread)).unwrap().price(t, &x0).unwrap();
    assert!(price(cal.swap.spread, 0.0).abs() < 1e-12);
    assert!(cal.swap.spread > 0.0);
    let t = 1.3;
    let (a, b, c) = (price(0.0, t), price(0.01, t), price(0.02, t));
    assert!(b < a);
    assert!(((a - b) - (b - c)).abs() < 1e-14);
    let end = cal.swap.end(tenor).unwrap();
    assert!(SwapPricer::new(&cal.mc, &ct, cal.swap.clone()).unwrap().price(end + 0.1, &x0).is_err());
}

#[test]
fn neighbour_regression_recovers_a_smooth_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 40_000;
    let xs: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let ys: Vec<f64> = xs.iter().map(|x| x * x + 0.3 * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)).collect();
    let queries: Vec<f64> = (0..21).map(|i| -1.0 + 0.1 * i as f64).collect();
    let est = knn_conditional_expectation(&queries, &xs, 1, &ys, 200).unwrap();
    for (q, e) in queries.iter().zip(&est) {
        assert!((e - q * q).abs() < 0.08, "E[Y | X = {q}] = {e}");
    }
    assert!(knn_conditional_expectation(&queries, &xs, 1, &ys, n + 1).is_err());
}

#[test]
fn spot_paths_depend_only_on_the_seed() {
    let s = Scenario::synthetic();
    let cal = calibrate_scenario(&s).unwrap();
    let ct = build_extension(&cal, InterpolatorKind::If2).unwrap();
    let grid = uniform_grid(5.0, 20);
    let a = generate_spot_paths(&ct, &grid, 500, 9).unwrap();
    let b = generate_spot_paths(&ct, &grid, 500, 9).unwrap();
    let c = generate_spot_paths(&ct, &grid, 500, 10).unwrap();
    assert_eq!(a.states, b.states);
    assert_eq!(a.integrated_rate, b.integrated_rate);
    assert_ne!(a.states, c.states);
    assert!(a.states.iter().all(|&x| x >= 0.0));
    assert!(generate_spot_paths(&ct, &uniform_grid(11.0, 10), 10, 0).is_err());
}

#[test]
fn batched_tva_matches_single_solves() {
    let s = Scenario::synthetic();
    let cal = calibrate_scenario(&s).unwrap();
    let ct = build_extension(&cal, InterpolatorKind::If2).unwrap();
    let pricer = SwapPricer::new(&cal.mc, &ct, cal.swap.clone()).unwrap();
    let paths = generate_spot_paths(&ct, &uniform_grid(10.0, 40), 800, 5).unwrap();
    let prices = price_paths(&pricer, &paths).unwrap();
    let csas = reference_csas::<f64>();
    let many = solve_tva_backward_many(&csas, &paths, &prices, 3).unwrap();
    for (c, r) in csas.iter().zip(&many) {
        let one = solve_tva_backward(c, &paths, &prices, 3).unwrap();
        assert_eq!(one.theta0, r.theta0, "{}", c.name);
        assert!(r.theta0.is_finite());
    }
    let idle = CsaSpec::zero("idle");
    let r = solve_tva_backward(&idle, &paths, &prices, 3).unwrap();
    assert_eq!(r.theta0, 0.0);
}
