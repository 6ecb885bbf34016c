//! Averaged models and controllers for a partial-power series flow
//! controller: series injection modules, a shunt active front end, and a
//! multi-active-bridge router linking them.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod afe;
pub mod cli;
pub mod control;
pub mod error;
pub mod loss;
pub mod mab;
pub mod phasor;
pub mod plant;
pub mod io;
pub mod series;
pub mod sim;

pub use error::{Error, Result};
pub use phasor::{DqSample, Impedance, Phasor, ThreePhaseSet};
