use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::affine_core::PathGrid;
use crate::error::{Error, Result};
use crate::multicurve::MulticurveModel;
use crate::pipeline::io::{fmt, Table};
use crate::pipeline::scenario::{Market, Scenario};
use crate::tenor_extension::{ContinuousTenorModel, InterpolatingFunction, InterpolatorKind, IntervalClass};
use crate::xva::bsde::{slice_stats, SliceStats};
use crate::xva::{fair_spread, generate_spot_paths, price_paths, solve_tva_backward_many, uniform_grid, BasisSwapSpec, SwapPricer};

/// How far a run goes. Each stage includes the ones before it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Fit,
    Interpolate,
    Simulate,
    Price,
    Tva,
    Compare,
}

impl Stage {
    pub fn label(self) -> &'static str {
        match self {
            Stage::Fit => "fit",
            Stage::Interpolate => "interpolate",
            Stage::Simulate => "simulate",
            Stage::Price => "price",
            Stage::Tva => "tva",
            Stage::Compare => "compare",
        }
    }
}

pub const SUMMARY_HEADER: [&str; 5] = ["time", "mean", "p2.5", "p97.5", "se"];

/// Calibrated model and swap shared by every interpolator.
#[derive(Debug, Clone)]
pub struct Calibration {
    pub market: Market,
    pub mc: MulticurveModel<f64>,
    pub swap: BasisSwapSpec<f64>,
}

pub fn calibrate_scenario(s: &Scenario) -> Result<Calibration> {
    let market = s.market()?;
    let manifold = s.build_manifold(&market)?;
    let mc = MulticurveModel::fit(market.model.clone(), market.tenor.clone(), market.init.clone(), manifold)?;
    let mut swap = s.swap_spec(&market.tenor)?;
    if s.swap.spread.is_none() {
        let x_r = mc.model().x0().to_vec();
        swap = swap.with_spread(fair_spread(&mc, &swap, swap.inception, &x_r)?);
    }
    Ok(Calibration { market, mc, swap })
}

pub fn build_extension(cal: &Calibration, kind: InterpolatorKind) -> Result<ContinuousTenorModel<f64>> {
    let interp = InterpolatingFunction::build(kind, &cal.mc, cal.market.forward_curve.as_ref())?;
    ContinuousTenorModel::new(cal.mc.model().clone(), interp)
}

/// `"curved"` on master intervals where more than one component of `u` moves.
pub fn segment_labels(mc: &MulticurveModel<f64>, times: &[f64]) -> Result<Vec<&'static str>> {
    let tenor = mc.tenor();
    let probe = InterpolatingFunction::from_points(InterpolatorKind::If3, tenor.dates(), mc.sequences().u.clone())?;
    let classes = probe.interval_classes();
    Ok(times
        .iter()
        .map(|&t| {
            let l = tenor.floor_index(t).min(classes.len() - 1);
            if classes[l] == IntervalClass::Curved {
                "curved"
            } else {
                "straight"
            }
        })
        .collect())
}

/// What one interpolator contributes to the comparison.
#[derive(Debug, Clone)]
pub struct InterpolatorRun {
    pub kind: InterpolatorKind,
    pub ct: ContinuousTenorModel<f64>,
    pub times: Vec<f64>,
    /// Leading paths kept for pathwise differences.
    pub kept: Option<PathGrid<f64>>,
    /// Kept TVA paths per CSA, `[time][path]`.
    pub tva_kept: Vec<(String, Vec<f64>)>,
    pub theta0: Vec<(String, f64, f64)>,
}

fn keep_leading(paths: &PathGrid<f64>, k: usize) -> PathGrid<f64> {
    let k = k.min(paths.n_paths);
    let n = paths.n_paths;
    let d = paths.dim;
    let mut states = Vec::with_capacity(paths.n_times() * k * d);
    for l in 0..paths.n_times() {
        states.extend_from_slice(&paths.slice(l)[..k * d]);
    }
    let cut = |v: &Option<Vec<f64>>| {
        v.as_ref().map(|v| (0..paths.n_times()).flat_map(|l| v[l * n..l * n + k].iter().copied()).collect())
    };
    PathGrid {
        times: paths.times.clone(),
        n_paths: k,
        dim: d,
        seed: paths.seed,
        states,
        short_rate: cut(&paths.short_rate),
        integrated_rate: cut(&paths.integrated_rate),
        density_exponents: paths.density_exponents.clone(),
    }
}

fn take_leading(surface: &[f64], n: usize, nt: usize, k: usize) -> Vec<f64> {
    (0..nt).flat_map(|l| surface[l * n..l * n + k.min(n)].iter().copied()).collect()
}

fn summary_table(times: &[f64], surface: &[f64], n: usize) -> Table {
    let mut t = Table::new(&SUMMARY_HEADER);
    for (l, &time) in times.iter().enumerate() {
        let s = slice_stats(&surface[l * n..(l + 1) * n]);
        t.push_numbers(&[time, s.mean, s.p025, s.p975, s.se]);
    }
    t
}

fn stats_table(times: &[f64], stats: &[SliceStats<f64>]) -> Table {
    let mut t = Table::new(&SUMMARY_HEADER);
    for (&time, s) in times.iter().zip(stats) {
        t.push_numbers(&[time, s.mean, s.p025, s.p975, s.se]);
    }
    t
}

fn paths_table(times: &[f64], surface: &[f64], n: usize, k: usize) -> Table {
    let k = k.min(n);
    let mut header = vec!["time".to_string()];
    header.extend((0..k).map(|j| format!("path_{j}")));
    let mut t = Table::new(&header);
    for (l, &time) in times.iter().enumerate() {
        let mut row = vec![time];
        row.extend_from_slice(&surface[l * n..l * n + k]);
        t.push_numbers(&row);
    }
    t
}

#[derive(Debug, Serialize)]
struct FileEntry {
    path: String,
    rows: usize,
}

/// Collects output files so that a failed run can remove what it wrote.
struct Outputs {
    root: PathBuf,
    files: Vec<(PathBuf, usize)>,
    created_dirs: Vec<PathBuf>,
}

impl Outputs {
    fn new(root: PathBuf) -> Self {
        Self { root, files: Vec::new(), created_dirs: Vec::new() }
    }

    fn ensure_dir(&mut self, dir: &Path) -> Result<()> {
        let mut missing = Vec::new();
        let mut cur = Some(dir);
        while let Some(d) = cur {
            if d.as_os_str().is_empty() || d.exists() {
                break;
            }
            missing.push(d.to_path_buf());
            cur = d.parent();
        }
        std::fs::create_dir_all(dir)?;
        missing.reverse();
        self.created_dirs.extend(missing);
        Ok(())
    }

    fn table(&mut self, rel: &str, t: &Table) -> Result<()> {
        let p = self.root.join(rel);
        if let Some(dir) = p.parent() {
            self.ensure_dir(dir)?;
        }
        t.write(&p)?;
        self.files.push((PathBuf::from(rel), t.rows.len()));
        Ok(())
    }

    fn text(&mut self, rel: &str, body: &str) -> Result<()> {
        let p = self.root.join(rel);
        if let Some(dir) = p.parent() {
            self.ensure_dir(dir)?;
        }
        std::fs::write(&p, body)?;
        self.files.push((PathBuf::from(rel), 0));
        Ok(())
    }

    fn cleanup(&self) {
        for (rel, _) in &self.files {
            let _ = std::fs::remove_file(self.root.join(rel));
        }
        for d in self.created_dirs.iter().rev() {
            let _ = std::fs::remove_dir(d);
        }
    }
}

/// Where a run put its files, plus the headline numbers.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub output_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub spread: f64,
    pub theta0: BTreeMap<String, Vec<(String, f64, f64)>>,
    pub comparison: Option<Comparison>,
}

pub fn run_scenario(s: &Scenario, until: Stage) -> Result<RunReport> {
    let root = s.output_path();
    let mut out = Outputs::new(root.clone());
    match run_inner(s, until, &mut out) {
        Ok(mut rep) => {
            rep.files = out.files.iter().map(|(p, _)| p.clone()).collect();
            Ok(rep)
        }
        Err(e) => {
            out.cleanup();
            Err(e)
        }
    }
}

fn staged<T>(stage: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| e.in_stage(stage))
}

fn run_inner(s: &Scenario, until: Stage, out: &mut Outputs) -> Result<RunReport> {
    staged("scenario", s.validate())?;
    let cal = staged("fit", calibrate_scenario(s))?;
    staged("fit", write_fit(&cal, out))?;
    let sim = &s.simulation;
    let mut runs = Vec::new();
    let mut theta0 = BTreeMap::new();
    if until >= Stage::Interpolate {
        let horizon = cal.mc.tenor().horizon();
        let grid = uniform_grid(horizon, sim.n_steps);
        for &kind in &s.interpolators {
            let name = kind.label();
            let ct = staged(&format!("interpolate:{name}"), build_extension(&cal, kind))?;
            staged(&format!("interpolate:{name}"), write_interpolator(&ct, &grid, name, out))?;
            let mut run = InterpolatorRun { kind, ct, times: grid.clone(), kept: None, tva_kept: Vec::new(), theta0: Vec::new() };
            if until >= Stage::Simulate {
                let stage = format!("simulate:{name}");
                let paths = staged(&stage, generate_spot_paths(&run.ct, &grid, sim.n_paths, sim.seed))?;
                let n = paths.n_paths;
                let rates = paths.short_rate.as_ref().expect("spot paths carry the short rate");
                staged(&stage, out.table(&format!("{name}/short_rate.csv"), &summary_table(&grid, rates, n)))?;
                staged(&stage, out.table(&format!("{name}/short_rate_paths.csv"), &paths_table(&grid, rates, n, sim.sample_paths)))?;
                staged(&stage, out.table(&format!("{name}/discount.csv"), &discount_table(&run.ct, &paths)?))?;
                if until >= Stage::Price {
                    let stage = format!("price:{name}");
                    let pricer = staged(&stage, SwapPricer::new(&cal.mc, &run.ct, cal.swap.clone()))?;
                    let prices = staged(&stage, price_paths(&pricer, &paths))?;
                    staged(&stage, out.table(&format!("{name}/price.csv"), &summary_table(&grid, &prices, n)))?;
                    staged(&stage, out.table(&format!("{name}/price_paths.csv"), &paths_table(&grid, &prices, n, sim.sample_paths)))?;
                    if until >= Stage::Tva && !s.csas.is_empty() {
                        let stage = format!("tva:{name}");
                        let res = staged(&stage, solve_tva_backward_many(&s.csas, &paths, &prices, sim.neighbours))?;
                        for r in res {
                            staged(&stage, out.table(&format!("{name}/tva_{}.csv", r.csa), &stats_table(&grid, &r.stats)))?;
                            staged(&stage, out.table(&format!("{name}/tva_{}_paths.csv", r.csa), &paths_table(&grid, &r.theta, n, sim.sample_paths)))?;
                            run.theta0.push((r.csa.clone(), r.theta0, r.theta0_se));
                            run.tva_kept.push((r.csa.clone(), take_leading(&r.theta, n, grid.len(), sim.compare_paths)));
                        }
                    }
                }
                run.kept = Some(keep_leading(&paths, sim.compare_paths));
            }
            theta0.insert(name.to_string(), run.theta0.clone());
            runs.push(run);
        }
    }
    let comparison = if until >= Stage::Compare && runs.len() >= 2 && runs.iter().all(|r| r.kept.is_some()) {
        let cmp = staged("compare", compare_interpolators(&cal, &runs))?;
        staged("compare", write_comparison(&cmp, out))?;
        Some(cmp)
    } else {
        None
    };
    staged("manifest", write_manifest(s, &cal, &theta0, out))?;
    Ok(RunReport { output_dir: out.root.clone(), files: Vec::new(), spread: cal.swap.spread, theta0, comparison })
}

fn write_fit(cal: &Calibration, out: &mut Outputs) -> Result<()> {
    let tenor = cal.mc.tenor();
    let seq = cal.mc.sequences();
    let d = cal.mc.model().dim();
    let comp = |p: &'static str| (1..=d).map(move |i| format!("{p}_{i}"));
    let mut header = vec!["index".to_string(), "maturity".to_string(), "parameter".to_string()];
    header.extend(comp("u"));
    let mut t = Table::new(&header);
    for (l, u) in seq.u.iter().enumerate() {
        let mut row = vec![l as f64, tenor.date(l), seq.u_params[l]];
        row.extend_from_slice(u);
        t.push_numbers(&row);
    }
    out.table("fit_u.csv", &t)?;
    for (x, info) in tenor.tenors().iter().enumerate() {
        let mut header = vec!["index".to_string(), "maturity".to_string(), "parameter".to_string()];
        header.extend(comp("v"));
        let mut t = Table::new(&header);
        for (k, v) in seq.v[x].iter().enumerate() {
            let mut row = vec![k as f64, tenor.tenor_date(x, k)?, seq.v_params[x][k]];
            row.extend_from_slice(v);
            t.push_numbers(&row);
        }
        out.table(&format!("fit_v_{}.csv", info.label), &t)?;
    }
    Ok(())
}

fn write_interpolator(ct: &ContinuousTenorModel<f64>, grid: &[f64], name: &str, out: &mut Outputs) -> Result<()> {
    let d = ct.model().dim();
    let mut header = vec!["time".to_string()];
    header.extend((1..=d).map(|i| format!("U_{i}")));
    header.extend((1..=d).map(|i| format!("dU_{i}")));
    header.push("p".into());
    header.extend((1..=d).map(|i| format!("q_{i}")));
    let mut t = Table::new(&header);
    for &time in grid {
        let mut row = vec![time];
        row.extend(ct.interpolator().value(time)?);
        row.extend(ct.interpolator().derivative(time)?);
        let c = ct.short_rate_coefficients(time, time)?;
        row.push(c.p);
        row.extend(c.q);
        t.push_numbers(&row);
    }
    out.table(&format!("{name}/interpolator.csv"), &t)
}

/// Monte Carlo `E*[exp(−∫_0^t r)]` next to the model bond `B(0, t)`.
fn discount_table(ct: &ContinuousTenorModel<f64>, paths: &PathGrid<f64>) -> Result<Table> {
    let ir = paths.integrated_rate.as_ref().ok_or_else(|| Error::invalid("paths carry no integrated rate"))?;
    let n = paths.n_paths;
    let x0 = ct.model().x0().to_vec();
    let mut t = Table::new(&["time", "mc_discount", "se", "model_bond"]);
    for (l, &time) in paths.times.iter().enumerate() {
        let d: Vec<f64> = ir[l * n..(l + 1) * n].iter().map(|&v| (-v).exp()).collect();
        let s = slice_stats(&d);
        t.push_numbers(&[time, s.mean, s.se, ct.bond_price(0.0, time, &x0)?]);
    }
    Ok(t)
}

fn write_manifest(s: &Scenario, cal: &Calibration, theta0: &BTreeMap<String, Vec<(String, f64, f64)>>, out: &mut Outputs) -> Result<()> {
    #[derive(Serialize)]
    struct Theta0 {
        csa: String,
        theta0: String,
        se: String,
    }
    #[derive(Serialize)]
    struct Manifest<'a> {
        engine: &'static str,
        version: &'static str,
        seed: u64,
        n_paths: usize,
        n_steps: usize,
        neighbours: usize,
        spread: String,
        riccati_rtol: f64,
        riccati_atol: f64,
        scenario: &'a Scenario,
        theta0: BTreeMap<String, Vec<Theta0>>,
        files: Vec<FileEntry>,
    }
    let ode = cal.mc.model().ode_config();
    let m = Manifest {
        engine: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        seed: s.simulation.seed,
        n_paths: s.simulation.n_paths,
        n_steps: s.simulation.n_steps,
        neighbours: s.simulation.neighbours,
        spread: fmt(cal.swap.spread),
        riccati_rtol: ode.rel_tol,
        riccati_atol: ode.abs_tol,
        scenario: s,
        theta0: theta0
            .iter()
            .map(|(k, v)| (k.clone(), v.iter().map(|(c, a, b)| Theta0 { csa: c.clone(), theta0: fmt(*a), se: fmt(*b) }).collect()))
            .collect(),
        files: out.files.iter().map(|(p, rows)| FileEntry { path: p.display().to_string(), rows: *rows }).collect(),
    };
    let body = serde_json::to_string_pretty(&m)?;
    out.text("manifest.json", &body)
}

/// Mean absolute differences for one pair of interpolators.
#[derive(Debug, Clone)]
pub struct PairComparison {
    pub a: InterpolatorKind,
    pub b: InterpolatorKind,
    pub times: Vec<f64>,
    pub segments: Vec<&'static str>,
    /// On the states simulated under `a`.
    pub price: Vec<f64>,
    pub short_rate: Vec<f64>,
    /// Pathwise under common random numbers, per CSA.
    pub tva: Vec<(String, Vec<f64>)>,
}

impl PairComparison {
    /// Mean of a difference series over the times labelled `segment`, skipping the endpoints.
    pub fn segment_mean(&self, series: &[f64], segment: &str) -> f64 {
        let nt = self.times.len();
        let picked: Vec<f64> = (1..nt - 1).filter(|&l| self.segments[l] == segment).map(|l| series[l]).collect();
        if picked.is_empty() {
            0.0
        } else {
            picked.iter().sum::<f64>() / picked.len() as f64
        }
    }
}

/// A segment type where prices agree but the adjustments do not.
#[derive(Debug, Clone, PartialEq)]
pub struct Flag {
    pub a: InterpolatorKind,
    pub b: InterpolatorKind,
    pub csa: String,
    pub segment: &'static str,
    pub price_diff: f64,
    pub tva_diff: f64,
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub pairs: Vec<PairComparison>,
    pub flags: Vec<Flag>,
}

/// Price differences below this count as zero.
pub const PRICE_ZERO_TOL: f64 = 1e-10;

pub fn compare_interpolators(cal: &Calibration, runs: &[InterpolatorRun]) -> Result<Comparison> {
    if runs.len() < 2 {
        return Err(Error::Comparison("need at least two interpolators".into()));
    }
    let times = &runs[0].times;
    for r in runs {
        if &r.times != times || r.kept.as_ref().is_none_or(|k| &k.times != times) {
            return Err(Error::Comparison(format!("{} was run on a different grid", r.kind)));
        }
    }
    let segments = segment_labels(&cal.mc, times)?;
    let end = cal.swap.end(cal.mc.tenor())?;
    let mut pairs = Vec::new();
    let mut flags = Vec::new();
    for i in 0..runs.len() {
        for j in i + 1..runs.len() {
            let (ra, rb) = (&runs[i], &runs[j]);
            let kept = ra.kept.as_ref().expect("checked");
            let pa = SwapPricer::new(&cal.mc, &ra.ct, cal.swap.clone())?;
            let pb = SwapPricer::new(&cal.mc, &rb.ct, cal.swap.clone())?;
            let k = kept.n_paths;
            let d = kept.dim;
            let mut price = Vec::with_capacity(times.len());
            let mut rate = Vec::with_capacity(times.len());
            for (l, &t) in times.iter().enumerate() {
                let slice = kept.slice(l);
                let ca = ra.ct.short_rate_coefficients(t, t)?;
                let cb = rb.ct.short_rate_coefficients(t, t)?;
                let mut acc_r = 0.0;
                for x in slice.chunks(d) {
                    acc_r += (ca.rate(x) - cb.rate(x)).abs();
                }
                rate.push(acc_r / k as f64);
                if t > end {
                    price.push(0.0);
                    continue;
                }
                let la = pa.layer(t)?;
                let lb = pb.layer(t)?;
                let acc: f64 = slice.chunks(d).map(|x| (la.eval(x) - lb.eval(x)).abs()).sum();
                price.push(acc / k as f64);
            }
            let mut tva = Vec::new();
            for (name, ta) in &ra.tva_kept {
                let Some((_, tb)) = rb.tva_kept.iter().find(|(n, _)| n == name) else { continue };
                let kk = ta.len() / times.len();
                if kk * times.len() != tb.len() {
                    return Err(Error::Comparison(format!("TVA path counts differ for {name}")));
                }
                let series = (0..times.len())
                    .map(|l| (0..kk).map(|p| (ta[l * kk + p] - tb[l * kk + p]).abs()).sum::<f64>() / kk as f64)
                    .collect();
                tva.push((name.clone(), series));
            }
            let pc = PairComparison { a: ra.kind, b: rb.kind, times: times.clone(), segments: segments.clone(), price, short_rate: rate, tva };
            for seg in ["curved", "straight"] {
                let p = pc.segment_mean(&pc.price, seg);
                for (name, series) in &pc.tva {
                    let v = pc.segment_mean(series, seg);
                    if p < PRICE_ZERO_TOL && v > PRICE_ZERO_TOL {
                        flags.push(Flag { a: pc.a, b: pc.b, csa: name.clone(), segment: seg, price_diff: p, tva_diff: v });
                    }
                }
            }
            pairs.push(pc);
        }
    }
    Ok(Comparison { pairs, flags })
}

fn write_comparison(c: &Comparison, out: &mut Outputs) -> Result<()> {
    let mut summary = Table::new(&["pair", "quantity", "segment", "mean_abs_diff", "flag"]);
    for pc in &c.pairs {
        let pair = format!("{}_{}", pc.a, pc.b);
        let mut series: Vec<(String, &Vec<f64>)> = vec![("price".into(), &pc.price), ("short_rate".into(), &pc.short_rate)];
        series.extend(pc.tva.iter().map(|(n, s)| (format!("tva_{n}"), s)));
        for (q, s) in &series {
            let mut t = Table::new(&["time", "segment", "mean_abs_diff"]);
            for (l, &time) in pc.times.iter().enumerate() {
                t.push(vec![fmt(time), pc.segments[l].to_string(), fmt(s[l])]);
            }
            out.table(&format!("compare/{pair}_{q}.csv"), &t)?;
            for seg in ["curved", "straight"] {
                let flagged = c.flags.iter().any(|f| f.a == pc.a && f.b == pc.b && format!("tva_{}", f.csa) == *q && f.segment == seg);
                summary.push(vec![pair.clone(), q.clone(), seg.to_string(), fmt(pc.segment_mean(s, seg)), (flagged as u8).to_string()]);
            }
        }
    }
    out.table("compare/summary.csv", &summary)
}

/// Expected leading columns and text columns of an emitted CSV, by file name.
pub fn schema_for(rel: &Path) -> (Vec<&'static str>, Vec<&'static str>) {
    let name = rel.file_name().and_then(|n| n.to_str()).unwrap_or("");
    let in_compare = rel.parent().and_then(|p| p.file_name()).is_some_and(|p| p == "compare");
    if in_compare && name == "summary.csv" {
        (vec!["pair", "quantity", "segment", "mean_abs_diff", "flag"], vec!["pair", "quantity", "segment"])
    } else if in_compare {
        (vec!["time", "segment", "mean_abs_diff"], vec!["segment"])
    } else if name.starts_with("fit_") {
        (vec!["index", "maturity", "parameter"], vec![])
    } else if name == "discount.csv" {
        (vec!["time", "mc_discount", "se", "model_bond"], vec![])
    } else if name.ends_with("_paths.csv") || name == "interpolator.csv" {
        (vec!["time"], vec![])
    } else {
        (SUMMARY_HEADER.to_vec(), vec![])
    }
}

/// Checks every CSV listed in the manifest of `dir` against its schema and
/// that it reads back and rewrites byte-identically. Returns the number of files checked.
pub fn validate_outputs(dir: &Path) -> Result<usize> {
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json"))?)?;
    let files = manifest["files"].as_array().ok_or_else(|| Error::invalid("manifest lists no files"))?;
    let mut n = 0;
    for f in files {
        let rel = PathBuf::from(f["path"].as_str().unwrap_or_default());
        if rel.extension().is_none_or(|e| e != "csv") {
            continue;
        }
        let full = dir.join(&rel);
        let t = Table::read(&full)?;
        let (prefix, text) = schema_for(&rel);
        crate::pipeline::io::validate_table(&t, &prefix, &text).map_err(|e| Error::invalid(format!("{}: {e}", rel.display())))?;
        if f["rows"].as_u64() != Some(t.rows.len() as u64) {
            return Err(Error::invalid(format!("{}: row count differs from the manifest", rel.display())));
        }
        let tmp = dir.join(format!(".roundtrip-{n}.csv"));
        t.write(&tmp)?;
        let same = std::fs::read(&tmp)? == std::fs::read(&full)?;
        std::fs::remove_file(&tmp)?;
        if !same {
            return Err(Error::invalid(format!("{} does not round-trip", rel.display())));
        }
        n += 1;
    }
    Ok(n)
}
