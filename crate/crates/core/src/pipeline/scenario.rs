use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::affine_core::{AffineModelSpec, CirComponent};
use crate::error::{Error, Result};
use crate::multicurve::{knotted_manifold, line_manifold, InitialTermStructure, Manifold, Tenor, TenorStructure};
use crate::pipeline::io;
use crate::tenor_extension::{ForwardCurve, InterpolatorKind};
use crate::xva::{reference_csas, BasisSwapSpec, CsaSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    pub components: Vec<CirComponent<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TenorBlock {
    pub delta: f64,
    pub n: usize,
    pub tenors: Vec<Tenor>,
}

/// Where the initial OIS and LIBOR curves come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSource {
    /// Discount factors from the forward curve, LIBOR as OIS forward plus a
    /// constant spread per tenor.
    Synthetic { forward_curve: ForwardCurve<f64>, spreads: Vec<f64> },
    /// CSV files, resolved relative to the scenario file.
    Files { discount: PathBuf, libor: PathBuf, forward_curve: Option<PathBuf> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ManifoldBlock {
    Knotted {
        #[serde(default = "default_knots")]
        knots: [usize; 4],
        #[serde(default = "default_aspect")]
        aspect: [f64; 2],
    },
    Line { direction: Vec<f64> },
}

fn default_knots() -> [usize; 4] {
    [9, 16, 21, 28]
}

fn default_aspect() -> [f64; 2] {
    [1.0, 1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwapBlock {
    pub short_tenor: String,
    pub long_tenor: String,
    /// Master-grid indices of the first reset and the last payment.
    pub start: usize,
    pub end: usize,
    #[serde(default)]
    pub inception: f64,
    /// Fixed spread; the fair spread at inception when absent.
    #[serde(default)]
    pub spread: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationBlock {
    #[serde(default = "default_paths")]
    pub n_paths: usize,
    #[serde(default = "default_steps")]
    pub n_steps: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_neighbours")]
    pub neighbours: usize,
    /// Paths written out per quantity.
    #[serde(default = "default_sample")]
    pub sample_paths: usize,
    /// Paths kept per interpolator for the pairwise comparison.
    #[serde(default = "default_compare")]
    pub compare_paths: usize,
}

fn default_paths() -> usize {
    100_000
}

fn default_steps() -> usize {
    200
}

fn default_neighbours() -> usize {
    3
}

fn default_sample() -> usize {
    20
}

fn default_compare() -> usize {
    2_000
}

impl Default for SimulationBlock {
    fn default() -> Self {
        Self {
            n_paths: default_paths(),
            n_steps: default_steps(),
            seed: 0,
            neighbours: default_neighbours(),
            sample_paths: default_sample(),
            compare_paths: default_compare(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub model: ModelBlock,
    pub tenor: TenorBlock,
    pub initial: InitialSource,
    pub manifold: ManifoldBlock,
    pub interpolators: Vec<InterpolatorKind>,
    pub swap: SwapBlock,
    #[serde(default)]
    pub csas: Vec<CsaSpec<f64>>,
    #[serde(default)]
    pub simulation: SimulationBlock,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    /// Directory relative paths are resolved against; set by the loader.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

/// Everything built from a scenario before any simulation.
#[derive(Debug, Clone)]
pub struct Market {
    pub model: AffineModelSpec<f64>,
    pub tenor: TenorStructure<f64>,
    pub init: InitialTermStructure<f64>,
    pub forward_curve: Option<ForwardCurve<f64>>,
}

impl Scenario {
    /// Synthetic setup: three independent CIR factors, a 10y
    /// horizon with quarterly master dates, 3M and 6M LIBOR with positive
    /// spreads, the knotted manifold, all interpolators and the five CSAs.
    pub fn synthetic() -> Self {
        Self {
            model: ModelBlock {
                components: vec![
                    CirComponent { lambda: 0.8, theta: 1.0, eta: 0.3 },
                    CirComponent { lambda: 0.5, theta: 1.0, eta: 0.4 },
                    CirComponent { lambda: 0.3, theta: 1.0, eta: 0.5 },
                ],
            },
            tenor: TenorBlock {
                delta: 0.25,
                n: 40,
                tenors: vec![Tenor { label: "3M".into(), multiple: 1 }, Tenor { label: "6M".into(), multiple: 2 }],
            },
            initial: InitialSource::Synthetic {
                forward_curve: ForwardCurve::NelsonSiegel { beta0: 0.03, beta1: -0.02, beta2: 0.01, tau: 2.0 },
                spreads: vec![0.0010, 0.0025],
            },
            manifold: ManifoldBlock::Knotted { knots: default_knots(), aspect: default_aspect() },
            interpolators: InterpolatorKind::ALL.to_vec(),
            swap: SwapBlock {
                short_tenor: "3M".into(),
                long_tenor: "6M".into(),
                start: 0,
                end: 40,
                inception: 0.0,
                spread: None,
            },
            csas: reference_csas(),
            simulation: SimulationBlock::default(),
            output_dir: default_output(),
            base_dir: PathBuf::new(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut s: Scenario = serde_json::from_str(&text)?;
        s.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output_path(&self) -> PathBuf {
        self.resolve(&self.output_dir)
    }

    pub fn validate(&self) -> Result<()> {
        if let InitialSource::Files { discount, libor, forward_curve } = &self.initial {
            for p in [Some(discount), Some(libor), forward_curve.as_ref()].into_iter().flatten() {
                let full = self.resolve(p);
                if !full.is_file() {
                    return Err(Error::invalid(format!("referenced file {} does not exist", full.display())));
                }
            }
        }
        if let ManifoldBlock::Knotted { knots, .. } = &self.manifold {
            if knots.windows(2).any(|w| w[0] >= w[1]) || knots[3] > self.tenor.n {
                return Err(Error::invalid("knot indices must increase and lie in [0, N]"));
            }
        }
        if self.interpolators.is_empty() {
            return Err(Error::invalid("no interpolators requested"));
        }
        let sim = &self.simulation;
        if sim.n_paths == 0 || sim.n_steps == 0 {
            return Err(Error::invalid("simulation needs paths and steps"));
        }
        if sim.neighbours == 0 || sim.neighbours > sim.n_paths {
            return Err(Error::invalid("neighbour count must lie in [1, n_paths]"));
        }
        for c in &self.csas {
            c.validate()?;
        }
        Ok(())
    }

    pub fn market(&self) -> Result<Market> {
        let horizon = self.tenor.delta * self.tenor.n as f64;
        let model = AffineModelSpec::cir(self.model.components.clone(), horizon)?;
        let tenor = TenorStructure::new(self.tenor.delta, self.tenor.n, self.tenor.tenors.clone())?;
        let (init, forward_curve) = match &self.initial {
            InitialSource::Synthetic { forward_curve, spreads } => {
                let disc = forward_curve.discount_factors(&tenor);
                (InitialTermStructure::with_spreads(&tenor, disc, spreads)?, Some(forward_curve.clone()))
            }
            InitialSource::Files { discount, libor, forward_curve } => {
                let disc = io::load_discount(&self.resolve(discount), &tenor)?;
                let lib = io::load_libor(&self.resolve(libor), &tenor)?;
                let fc = match forward_curve {
                    Some(p) => Some(io::load_forward_curve(&self.resolve(p))?),
                    None => None,
                };
                (InitialTermStructure { discount: disc, libor: lib }, fc)
            }
        };
        init.validate(&tenor)?;
        Ok(Market { model, tenor, init, forward_curve })
    }

    pub fn build_manifold(&self, market: &Market) -> Result<Manifold<f64>> {
        match &self.manifold {
            ManifoldBlock::Knotted { knots, aspect } => knotted_manifold(&market.model, &market.tenor, &market.init, *knots, *aspect),
            ManifoldBlock::Line { direction } => line_manifold(&market.model, &market.tenor, &market.init, direction.clone()),
        }
    }

    /// Swap terms with the spread left at zero; the caller fills in the fair spread if needed.
    pub fn swap_spec(&self, tenor: &TenorStructure<f64>) -> Result<BasisSwapSpec<f64>> {
        let find = |label: &str| tenor.tenor_index(label).ok_or_else(|| Error::invalid(format!("unknown tenor {label}")));
        let x1 = find(&self.swap.short_tenor)?;
        let x2 = find(&self.swap.long_tenor)?;
        BasisSwapSpec::new(tenor, x1, x2, self.swap.start, self.swap.end, self.swap.inception, self.swap.spread.unwrap_or(0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_round_trips_through_json() {
        let s = Scenario::synthetic();
        let back: Scenario = serde_json::from_str(&s.to_json().unwrap()).unwrap();
        assert_eq!(back, s);
        s.validate().unwrap();
    }

    #[test]
    fn bad_knots_are_rejected() {
        let mut s = Scenario::synthetic();
        s.manifold = ManifoldBlock::Knotted { knots: [9, 9, 21, 28], aspect: [1.0, 1.0] };
        assert!(s.validate().is_err());
    }

    #[test]
    fn missing_file_is_rejected() {
        let mut s = Scenario::synthetic();
        s.initial = InitialSource::Files { discount: "nope.csv".into(), libor: "nope.csv".into(), forward_curve: None };
        assert!(s.validate().is_err());
    }
}
