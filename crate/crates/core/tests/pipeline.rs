use std::path::Path;

use affine_libor::pipeline::io::{fmt, Table};
use affine_libor::pipeline::{calibrate_scenario, run_scenario, validate_outputs, InitialSource, ManifoldBlock, Scenario, Stage};
use affine_libor::tenor_extension::InterpolatorKind;

fn small(out: &Path) -> Scenario {
    let mut s = Scenario::synthetic();
    s.simulation.n_paths = 200;
    s.simulation.n_steps = 20;
    s.simulation.compare_paths = 100;
    s.output_dir = out.to_path_buf();
    s
}

/// Writes the synthetic curves as CSV inputs and points a scenario at them.
fn file_scenario(dir: &Path) -> Scenario {
    let s = Scenario::synthetic();
    let market = s.market().unwrap();
    let tenor = &market.tenor;
    let mut disc = Table::new(&["maturity_years", "discount_factor"]);
    for (l, b) in market.init.discount.iter().enumerate().skip(1) {
        disc.push(vec![fmt(tenor.date(l)), fmt(*b)]);
    }
    disc.write(&dir.join("discount.csv")).unwrap();
    let mut lib = Table::new(&["tenor", "maturity_years", "libor_rate"]);
    for (x, info) in tenor.tenors().iter().enumerate() {
        for (k, r) in market.init.libor[x].iter().enumerate() {
            lib.push(vec![info.label.clone(), fmt(tenor.tenor_date(x, k + 1).unwrap()), fmt(*r)]);
        }
    }
    lib.write(&dir.join("libor.csv")).unwrap();
    let mut f = s.clone();
    f.initial = InitialSource::Files { discount: "discount.csv".into(), libor: "libor.csv".into(), forward_curve: None };
    let path = dir.join("scenario.json");
    std::fs::write(&path, f.to_json().unwrap()).unwrap();
    Scenario::load(&path).unwrap()
}

#[test]
fn curve_files_reproduce_the_synthetic_fit() {
    let dir = tempfile::tempdir().unwrap();
    let from_files = calibrate_scenario(&file_scenario(dir.path())).unwrap();
    let builtin = calibrate_scenario(&Scenario::synthetic()).unwrap();
    assert_eq!(from_files.mc.sequences().u, builtin.mc.sequences().u);
    assert_eq!(from_files.mc.sequences().v, builtin.mc.sequences().v);
    assert_eq!(from_files.swap, builtin.swap);
    assert!(from_files.market.forward_curve.is_none());
}

#[test]
fn failed_run_removes_its_files_only() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = file_scenario(dir.path());
    s.interpolators = vec![InterpolatorKind::If1];
    s.simulation.n_paths = 100;
    let out = dir.path().join("out");
    std::fs::create_dir(&out).unwrap();
    std::fs::write(out.join("keep.txt"), "mine").unwrap();
    s.output_dir = out.clone();
    let err = run_scenario(&s, Stage::Compare).unwrap_err().to_string();
    assert!(err.contains("interpolate:if1"), "{err}");
    let left: Vec<_> = std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(left, vec![std::ffi::OsString::from("keep.txt")]);

    s.interpolators = vec![InterpolatorKind::If2];
    s.output_dir = dir.path().join("fresh");
    run_scenario(&s, Stage::Price).unwrap();
    assert!(s.output_dir.join("if2/price.csv").is_file());
}

#[test]
fn validation_catches_edited_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let s = small(dir.path());
    let rep = run_scenario(&s, Stage::Tva).unwrap();
    assert!(rep.comparison.is_none());
    assert_eq!(rep.theta0.len(), 3);
    assert_eq!(validate_outputs(dir.path()).unwrap(), rep.files.iter().filter(|p| p.extension().is_some_and(|e| e == "csv")).count());

    let target = dir.path().join("if3/price.csv");
    let text = std::fs::read_to_string(&target).unwrap();
    std::fs::write(&target, format!("{text}0,1,2,3,4\n")).unwrap();
    assert!(validate_outputs(dir.path()).is_err());
    std::fs::write(&target, text.replacen("time,", "t,", 1)).unwrap();
    assert!(validate_outputs(dir.path()).is_err());
}

#[test]
fn straight_manifold_runs_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = small(dir.path());
    s.manifold = ManifoldBlock::Line { direction: vec![1.0, 1.0, 1.0] };
    let rep = run_scenario(&s, Stage::Compare).unwrap();
    let cmp = rep.comparison.unwrap();
    assert!(!cmp.pairs.is_empty());
    for rows in rep.theta0.values() {
        assert_eq!(rows.len(), 5);
        assert!(rows.iter().all(|(_, v, se)| v.is_finite() && se.is_finite()));
    }
    validate_outputs(dir.path()).unwrap();
}
