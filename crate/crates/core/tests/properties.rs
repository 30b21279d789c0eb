use affine_libor::affine_core::{flow, AffineModelSpec, CirComponent, PathGrid};
use affine_libor::pipeline::io::fmt;
use affine_libor::tenor_extension::{InterpolatingFunction, InterpolatorKind};
use affine_libor::xva::knn::{knn_conditional_expectation, knn_conditional_expectation_brute, nearest_brute_force};
use affine_libor::xva::{reference_csas, solve_tva_backward, uniform_grid, KdTree};
use proptest::prelude::*;

fn cloud(dim: usize, max_n: usize) -> impl Strategy<Value = (usize, Vec<f64>)> {
    (1..max_n).prop_flat_map(move |n| (Just(dim), prop::collection::vec(-5.0f64..5.0, n * dim)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kd_tree_agrees_with_brute_force(dim in 1usize..5, seed_pts in prop::collection::vec(-3i32..3, 1..400), m in 1usize..12) {
        // Integer-valued coordinates make ties common.
        let n = seed_pts.len() / dim;
        prop_assume!(n > 0);
        let pts: Vec<f64> = seed_pts[..n * dim].iter().map(|&v| v as f64).collect();
        let tree = KdTree::new(&pts, dim).unwrap();
        for q in pts.chunks(dim).take(20) {
            prop_assert_eq!(tree.nearest(q, m), nearest_brute_force(&pts, dim, q, m));
        }
        let shifted: Vec<f64> = pts.iter().map(|v| v + 0.5).collect();
        for q in shifted.chunks(dim).take(20) {
            prop_assert_eq!(tree.nearest(q, m), nearest_brute_force(&pts, dim, q, m));
        }
    }

    #[test]
    fn regression_matches_brute_force((dim, pts) in cloud(3, 300), m in 1usize..6) {
        let n = pts.len() / dim;
        prop_assume!(m <= n);
        let resp: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let a = knn_conditional_expectation(&pts, &pts, dim, &resp, m).unwrap();
        let b = knn_conditional_expectation_brute(&pts, &pts, dim, &resp, m).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn regression_ignores_sample_order((dim, pts) in cloud(2, 200), m in 1usize..5, rot in 0usize..200) {
        let n = pts.len() / dim;
        prop_assume!(m <= n);
        let resp: Vec<f64> = pts.chunks(dim).map(|p| p[0] * p[0] - p[1]).collect();
        let k = rot % n;
        let perm: Vec<usize> = (0..n).map(|i| (i * 7 + k) % n).collect();
        prop_assume!({
            let mut s = perm.clone();
            s.sort();
            s.dedup();
            s.len() == n
        });
        let pts2: Vec<f64> = perm.iter().flat_map(|&i| pts[i * dim..(i + 1) * dim].iter().copied()).collect();
        let resp2: Vec<f64> = perm.iter().map(|&i| resp[i]).collect();
        let queries: Vec<f64> = pts.iter().map(|v| v * 0.9 + 0.01).collect();
        let a = knn_conditional_expectation(&queries, &pts, dim, &resp, m).unwrap();
        let b = knn_conditional_expectation(&queries, &pts2, dim, &resp2, m).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn coefficient_is_monotone_in_bank_intensity(p in -0.1f64..0.1, theta in -0.05f64..0.05, r in -0.02f64..0.1, g1 in 0.0f64..0.3, dg in 0.0f64..0.3) {
        for mut c in reference_csas::<f64>() {
            c.gamma_bank = g1;
            let lo = c.tva_coefficient(r, p, theta);
            c.gamma_bank = g1 + dg;
            let hi = c.tva_coefficient(r, p, theta);
            prop_assert!(hi >= lo - 1e-15, "{}: {} < {}", c.name, hi, lo);
        }
    }

    #[test]
    fn fifth_csa_has_no_default_terms(p in -1.0f64..1.0, theta in -1.0f64..1.0) {
        let c = reference_csas::<f64>().pop().unwrap();
        let comp = c.components(p, theta);
        prop_assert_eq!(comp.cva, 0.0);
        prop_assert_eq!(comp.dva, 0.0);
    }

    #[test]
    fn numbers_survive_formatting(x in prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO) {
        prop_assert_eq!(fmt(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn semi_flow_holds(t in 0.0f64..4.0, s in 0.0f64..4.0, u in prop::collection::vec(-1.0f64..0.3, 2)) {
        let spec = AffineModelSpec::cir(
            vec![CirComponent { lambda: 0.7, theta: 1.1, eta: 0.3 }, CirComponent { lambda: 0.2, theta: 0.6, eta: 0.6 }],
            10.0,
        ).unwrap();
        let (p_ts, q_ts) = flow(&spec, t + s, &u).unwrap();
        let (p_t, q_t) = flow(&spec, t, &u).unwrap();
        let (p_s, q_s) = flow(&spec, s, &q_t).unwrap();
        prop_assert!((p_ts - p_t - p_s).abs() < 1e-8);
        for i in 0..2 {
            prop_assert!((q_ts[i] - q_s[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn interpolators_stay_monotone(steps in prop::collection::vec(prop::collection::vec(0.0f64..0.05, 3), 2..12), mask in prop::collection::vec(any::<bool>(), 36)) {
        let n = steps.len();
        let mut u = vec![vec![0.0; 3]; n + 1];
        for l in (0..n).rev() {
            for c in 0..3 {
                let step = if mask[(l * 3 + c) % mask.len()] { steps[l][c] } else { 0.0 };
                u[l][c] = u[l + 1][c] + step;
            }
        }
        let dates: Vec<f64> = (0..=n).map(|l| 0.5 * l as f64).collect();
        for kind in [InterpolatorKind::If2, InterpolatorKind::If3] {
            let f = InterpolatingFunction::from_points(kind, dates.clone(), u.clone()).unwrap();
            f.check_monotone(25, false).unwrap();
            for (l, &d) in dates.iter().enumerate() {
                prop_assert_eq!(f.value(d).unwrap(), u[l].clone());
            }
        }
    }
}

fn toy_paths(prices: &[f64], n: usize, nt: usize) -> PathGrid<f64> {
    let times = uniform_grid(1.0, nt - 1);
    let states: Vec<f64> = (0..nt * n).map(|k| if k < n { 0.0 } else { prices[k] * 10.0 + (k % 13) as f64 * 0.01 }).collect();
    PathGrid {
        integrated_rate: Some(times.iter().flat_map(|&t| std::iter::repeat_n(0.02 * t, n)).collect()),
        short_rate: Some(vec![0.02; nt * n]),
        times,
        n_paths: n,
        dim: 1,
        seed: 0,
        states,
        density_exponents: None,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tva_is_monotone_in_bank_intensity(raw in prop::collection::vec(-0.05f64..0.05, 60 * 11), g1 in 0.0f64..0.2, dg in 0.01f64..0.2) {
        let (n, nt) = (60, 11);
        let paths = toy_paths(&raw, n, nt);
        for mut c in reference_csas::<f64>() {
            c.gamma_bank = g1;
            let lo = solve_tva_backward(&c, &paths, &raw, 3).unwrap().theta0;
            c.gamma_bank = g1 + dg;
            let hi = solve_tva_backward(&c, &paths, &raw, 3).unwrap().theta0;
            prop_assert!(hi >= lo - 1e-14, "{}: {} < {}", c.name, hi, lo);
        }
    }
}
