//! Continuous-tenor extension: interpolating functions, bond prices for all
//! maturities, forward and short rates, and the spot measure.

pub mod continuous;
pub mod forward_curve;
pub mod interpolate;

pub use continuous::{ContinuousTenorModel, ShortRateCoefficients, SpotTable};
pub use forward_curve::ForwardCurve;
pub use interpolate::{InterpolatingFunction, InterpolatorKind, IntervalClass};
