//! Simulation toolkit for longitudinal transmon readout: circuit Hamiltonians,
//! branch analysis and ionization thresholds, exact Schrieffer-Wolff dispersive
//! structure, stochastic heterodyne readout and the classical pendulum picture.
//!
//! Frequencies are `ω/2π` in GHz and times are in ns throughout.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod linalg;
pub mod circuit;
pub mod classical;
pub mod operators;
pub mod readout;
pub mod schrieffer_wolff;
pub mod spectral;

pub use error::{Error, Result};
