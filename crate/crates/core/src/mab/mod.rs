//! Multi-active-bridge router feeding the series modules' dc links.
//!
//! Sign convention throughout: a positive bridge power or current leaves
//! the bridge's dc link and enters the transformer mesh.

mod controller;
mod gains;
mod magnetics;
mod solver;
mod steady;

pub use controller::{mab_dc_link_step, DcLinkStep, MabControlParams, MabController};
pub use gains::{
    decoupling_terms, exact_crossover, implied_k_phi, link_impedance, loop_gain, mab_pi_tuning, phase_margin,
    scheduled_kp, small_signal_gains, MabGainMatrix, MabPiTuning,
};
pub use magnetics::{DeltaInductances, MabMagnetics};
pub use solver::{rated_power, solve_from, solve_phase_shifts, PhaseSolution, MAX_ITERATIONS};
pub use steady::{bridge_currents, bridge_powers, shape, MabOperatingPoint, PairCoefficients};
