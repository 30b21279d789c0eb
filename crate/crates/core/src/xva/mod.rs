//! Basis-swap valuation and total valuation adjustments.

pub mod bsde;
pub mod csa;
pub mod knn;
pub mod swap;

pub use bsde::{generate_spot_paths, price_paths, solve_tva_backward, solve_tva_backward_many, tva_forward_mc, uniform_grid, SliceStats, TvaResult};
pub use csa::{reference_csas, CollateralRule, CsaSpec, QRule, TvaComponents};
pub use knn::{knn_conditional_expectation, KdTree};
pub use swap::{fair_spread, next_payment, BasisSwapSpec, PriceLayer, SwapPricer};
