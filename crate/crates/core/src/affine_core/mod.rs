//! Affine processes on the nonnegative orthant.

pub mod domain;
pub mod flow;
pub mod inhomogeneous;
pub mod model;
pub mod simulate;

pub use domain::{moment_domain, MomentDomain};
pub use flow::{flow, flow_at, mgf, solve_riccati, solve_riccati_at, FlowSolution};
pub use inhomogeneous::{
    extended_characteristics, solve_riccati_inhomogeneous, ExtendedCharacteristics, PiecewiseConstant,
    TimeDependentCharacteristics,
};
pub use model::{AffineModelSpec, CirComponent, JumpMeasure};
pub use simulate::{simulate_paths, simulate_paths_with, DriftModifier, PathGrid, RateIntegrand, Scheme, SimulationConfig};
