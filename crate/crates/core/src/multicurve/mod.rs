//! Multi-curve affine LIBOR model: tenor structure, fitting manifold, fitted
//! parameter sequences and the rates they generate.

pub mod fit;
pub mod manifold;
pub mod rates;
pub mod tenor;

pub use fit::{calibrate, fit_u_sequence, fit_v_sequences, knotted_manifold, line_manifold, log_m0, CalibratedSequences};
pub use manifold::{Manifold, Segment};
pub use rates::MulticurveModel;
pub use tenor::{InitialTermStructure, Tenor, TenorStructure};
