use std::path::PathBuf;
use std::process::ExitCode;

use affine_libor::pipeline::{run_scenario, RunReport, Scenario, Stage};
use affine_libor::tenor_extension::InterpolatorKind;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "affine-libor", version, about = "Multi-curve affine LIBOR models, implied short rates and basis-swap TVA")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the u and v sequences to the initial curves.
    Fit(Common),
    /// Build the interpolating functions and tabulate U, U' and the short-rate coefficients.
    Interpolate(Common),
    /// Simulate driver paths under the spot measure.
    Simulate(Common),
    /// Price the basis swap along the simulated paths.
    Price(Common),
    /// Compute the TVA for every CSA.
    Tva(Common),
    /// Full run plus pairwise interpolator differences.
    Compare(Common),
    /// Full pipeline.
    Run(Common),
    /// Print the built-in synthetic scenario as JSON.
    Scenario,
}

#[derive(Args)]
struct Common {
    /// Scenario JSON; the built-in synthetic scenario when absent.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    /// Restrict to these interpolators; repeat or comma-separate.
    #[arg(long, value_delimiter = ',')]
    interp: Vec<InterpolatorKind>,
}

impl Common {
    fn scenario(&self) -> affine_libor::Result<Scenario> {
        let mut s = match &self.scenario {
            Some(p) => Scenario::load(p)?,
            None => Scenario::synthetic(),
        };
        if let Some(seed) = self.seed {
            s.simulation.seed = seed;
        }
        if let Some(out) = &self.out {
            s.output_dir = std::path::absolute(out)?;
        }
        if let Some(n) = self.paths {
            s.simulation.n_paths = n;
        }
        if let Some(n) = self.steps {
            s.simulation.n_steps = n;
        }
        if !self.interp.is_empty() {
            let mut kinds = self.interp.clone();
            kinds.sort();
            kinds.dedup();
            s.interpolators = kinds;
        }
        s.validate()?;
        Ok(s)
    }
}

fn report(r: &RunReport) {
    println!("output: {}", r.output_dir.display());
    println!("files: {}", r.files.len());
    println!("spread: {:.16e}", r.spread);
    for (kind, rows) in &r.theta0 {
        for (csa, v, se) in rows {
            println!("theta0 {kind} {csa}: {v:.16e} (se {se:.3e})");
        }
    }
    if let Some(c) = &r.comparison {
        for f in &c.flags {
            println!(
                "flag {}-{} {} on {} segments: price diff {:.3e}, TVA diff {:.3e}",
                f.a, f.b, f.csa, f.segment, f.price_diff, f.tva_diff
            );
        }
    }
}

fn execute(cli: Cli) -> affine_libor::Result<()> {
    let compare_only = matches!(cli.command, Command::Compare(_));
    let (common, stage) = match cli.command {
        Command::Scenario => {
            println!("{}", Scenario::synthetic().to_json()?);
            return Ok(());
        }
        Command::Fit(c) => (c, Stage::Fit),
        Command::Interpolate(c) => (c, Stage::Interpolate),
        Command::Simulate(c) => (c, Stage::Simulate),
        Command::Price(c) => (c, Stage::Price),
        Command::Tva(c) => (c, Stage::Tva),
        Command::Compare(c) => (c, Stage::Compare),
        Command::Run(c) => (c, Stage::Compare),
    };
    let s = common.scenario()?;
    if compare_only && s.interpolators.len() < 2 {
        return Err(affine_libor::Error::Comparison("comparison needs at least two interpolators".into()));
    }
    report(&run_scenario(&s, stage)?);
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                eprintln!("  caused by: {s}");
                src = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
