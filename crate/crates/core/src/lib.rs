//! Multi-curve affine LIBOR models with a continuous-tenor extension, the
//! implied short rate, and basis-swap valuation adjustments by backward
//! regression on simulated paths.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix it to `f64`.

pub mod affine_core;
pub mod error;
pub mod multicurve;
pub mod ode;
pub mod pipeline;
mod roots;
pub mod scalar;
pub mod tenor_extension;
pub mod xva;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type AffineModel = affine_core::AffineModelSpec<f64>;
pub type Flow = affine_core::FlowSolution<f64>;
pub type Paths = affine_core::PathGrid<f64>;
pub type Multicurve = multicurve::MulticurveModel<f64>;
pub type ContinuousTenor = tenor_extension::ContinuousTenorModel<f64>;
pub type Csa = xva::CsaSpec<f64>;
pub type BasisSwap = xva::BasisSwapSpec<f64>;
pub type Tva = xva::TvaResult<f64>;
