//! Scenario files, CSV input/output and the end-to-end run.

pub mod io;
pub mod run;
pub mod scenario;

pub use run::{
    build_extension, calibrate_scenario, compare_interpolators, run_scenario, segment_labels, validate_outputs, Calibration,
    Comparison, Flag, InterpolatorRun, PairComparison, RunReport, Stage, PRICE_ZERO_TOL,
};
pub use scenario::{InitialSource, ManifoldBlock, Market, Scenario, SimulationBlock, SwapBlock};
