//! Shunt active front end: gain design, per-phase synchronous-frame current
//! regulation, the dc-bus voltage loop and the averaged bus energy balance.
//!
//! The converter is a three-leg bridge with a split dc bus, so each phase is
//! an independent half bridge referenced to the bus midpoint. Every phase is
//! regulated in its own single-phase frame aligned with its grid voltage.
//! Currents inside the inner loop use the inverter convention (positive out
//! of the converter into the grid); the outer loop speaks in import
//! convention (positive from grid to bus).

use std::f64::consts::{FRAC_PI_2, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::control::{vector_clamp, PiController};
use crate::error::{Error, Result};
use crate::phasor::{DqSample, ThreePhaseSet};

/// Bus reference below which current distortion becomes a concern.
pub const MIN_RECOMMENDED_BUS_VOLTAGE: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AfeParams {
    /// AC filter inductance.
    pub l_f: f64,
    /// AC filter resistance.
    pub r_f: f64,
    /// Controller sampling period.
    pub t_s: f64,
    /// Phase margin of the current loop, radians.
    pub phase_margin: f64,
    pub v_dc_ref: f64,
    /// Capacitance of each half of the split bus.
    pub c_dc: f64,
    pub omega: f64,
}

impl AfeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.l_f > 0.0) {
            return Err(Error::param("l_f", "must be > 0"));
        }
        if !(self.r_f > 0.0) {
            return Err(Error::param("r_f", "must be > 0"));
        }
        if !(self.t_s > 0.0) {
            return Err(Error::param("t_s", "must be > 0"));
        }
        if !(self.phase_margin > 0.0 && self.phase_margin < FRAC_PI_2) {
            return Err(Error::param("phase_margin", "must lie in (0, π/2)"));
        }
        let a = design_a(self.phase_margin)?;
        if a <= 2.0 {
            return Err(Error::param(
                "phase_margin",
                format!("a = {a:.4} must exceed 2 (phase margin above {:.2}°)", (FRAC_PI_2 - 0.5).to_degrees()),
            ));
        }
        if !(self.v_dc_ref > 0.0) || !(self.c_dc > 0.0) || !(self.omega > 0.0) {
            return Err(Error::param("v_dc_ref/c_dc/omega", "must be > 0"));
        }
        if self.v_dc_ref < MIN_RECOMMENDED_BUS_VOLTAGE {
            log::warn!(
                "AFE bus reference {} V is below the recommended {} V",
                self.v_dc_ref,
                MIN_RECOMMENDED_BUS_VOLTAGE
            );
        }
        Ok(())
    }

    /// Equivalent capacitance of the two bus halves in series.
    pub fn bus_capacitance(&self) -> f64 {
        0.5 * self.c_dc
    }

    pub fn current_loop_gains(&self) -> Result<(f64, f64)> {
        afe_gains(self.l_f, self.r_f, self.t_s, self.phase_margin)
    }

    /// Crossover of the inner current loop, `1/(1.5·a·T_s)`.
    pub fn current_loop_crossover(&self) -> Result<f64> {
        Ok(1.0 / (1.5 * design_a(self.phase_margin)? * self.t_s))
    }
}

/// `a = 1/(π/2 − φ_m)`.
pub fn design_a(phase_margin: f64) -> Result<f64> {
    if phase_margin >= FRAC_PI_2 {
        return Err(Error::domain(format!(
            "phase margin {phase_margin} rad must be below π/2"
        )));
    }
    Ok(1.0 / (FRAC_PI_2 - phase_margin))
}

/// `K_P = L/(1.5·a·T_s)`, `τ_i = L/R`.
pub fn gains_for_a(l: f64, r: f64, ts: f64, a: f64) -> Result<(f64, f64)> {
    if !(ts > 0.0) {
        return Err(Error::domain("sampling time must be > 0"));
    }
    if !(r > 0.0) {
        return Err(Error::domain("loop resistance must be > 0 for τ_i = L/R"));
    }
    if !(a > 0.0) {
        return Err(Error::domain("design constant a must be > 0"));
    }
    Ok((l / (1.5 * a * ts), l / r))
}

/// Current-loop gains of the AFE from filter inductance, resistance,
/// sampling time and desired phase margin.
pub fn afe_gains(l_f: f64, r_f: f64, t_s: f64, phase_margin: f64) -> Result<(f64, f64)> {
    gains_for_a(l_f, r_f, t_s, design_a(phase_margin)?)
}

/// Output of one inner-loop sample for one phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AfeOutput {
    /// Converter-side voltage command, peak d-q.
    pub voltage: DqSample,
    pub saturated: bool,
}

/// Inner current loop of one AFE phase.
#[derive(Debug, Clone)]
pub struct AfeCurrentController {
    pub pi_d: PiController,
    pub pi_q: PiController,
    pub omega_l: f64,
}

impl AfeCurrentController {
    pub fn new(params: &AfeParams) -> Result<Self> {
        let (kp, ti) = params.current_loop_gains()?;
        Ok(AfeCurrentController {
            pi_d: PiController::new(kp, ti, params.t_s),
            pi_q: PiController::new(kp, ti, params.t_s),
            omega_l: params.omega * params.l_f,
        })
    }

    /// `V_d = U_d − ω_gL_f·I_q + PI(I_d,ref − I_d)`,
    /// `V_q = U_q + ω_gL_f·I_d + PI(I_q,ref − I_q)`, vector-clamped to the
    /// half-bridge limit `v_limit` (peak, normally `V_dc/2`).
    pub fn afe_voltage_command(&mut self, i_ref: DqSample, i_meas: DqSample, u: DqSample, v_limit: f64) -> AfeOutput {
        let ud = self.pi_d.step(i_ref.d - i_meas.d);
        let uq = self.pi_q.step(i_ref.q - i_meas.q);
        let d = u.d - self.omega_l * i_meas.q + ud;
        let q = u.q + self.omega_l * i_meas.d + uq;
        let (d, q, saturated) = vector_clamp(d, q, v_limit);
        if saturated {
            self.pi_d.hold();
            self.pi_q.hold();
        }
        AfeOutput {
            voltage: DqSample::new(d, q, u.theta),
            saturated,
        }
    }
}

/// Outer dc-bus loop. The output is the per-phase d-axis current reference
/// in import convention, peak amps.
///
/// Crossover is a tenth of the inner loop's, with the PI zero at the
/// crossover. A feedforward of the measured MAB draw is added so the PI only
/// has to correct the residual.
#[derive(Debug, Clone)]
pub struct DcBusController {
    pub pi: PiController,
    pub crossover: f64,
}

impl DcBusController {
    /// `u_peak_sum` is the sum of the three phase-voltage peaks at nominal
    /// grid voltage.
    pub fn design(params: &AfeParams, u_peak_sum: f64) -> Result<Self> {
        let crossover = params.current_loop_crossover()? / 10.0;
        if !(u_peak_sum > 0.0) {
            return Err(Error::domain("grid voltage must be > 0"));
        }
        // dV/dt = k·I_d with k = ½ΣU_pk / (C_eq·V_ref)
        let k = 0.5 * u_peak_sum / (params.bus_capacitance() * params.v_dc_ref);
        let kp = crossover / (SQRT_2 * k);
        Ok(DcBusController {
            pi: PiController::new(kp, 1.0 / crossover, params.t_s),
            crossover,
        })
    }

    /// Current reference for the next sample. `p_feedforward` is the power
    /// drawn from the bus by the MAB; `u_peak_sum` the present sum of phase
    /// voltage peaks.
    pub fn dc_bus_outer_loop(&mut self, v_measured: f64, v_ref: f64, p_feedforward: f64, u_peak_sum: f64) -> f64 {
        let ff = if u_peak_sum > 0.0 {
            p_feedforward / (0.5 * u_peak_sum)
        } else {
            0.0
        };
        self.pi.step(v_ref - v_measured) + ff
    }
}

/// Energy-tracked dc capacitor (or capacitor bank).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DcBus {
    pub capacitance: f64,
    energy: f64,
}

impl DcBus {
    pub fn new(capacitance: f64, voltage: f64) -> Self {
        DcBus {
            capacitance,
            energy: 0.5 * capacitance * voltage * voltage,
        }
    }

    pub fn voltage(&self) -> f64 {
        (2.0 * self.energy.max(0.0) / self.capacitance).sqrt()
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Forward-Euler energy update with net charging power `p_net`.
    /// Fails if the stored energy would drop to zero or below.
    pub fn apply(&mut self, p_net: f64, dt: f64) -> Result<()> {
        let e = self.energy + p_net * dt;
        if !(e > 0.0) {
            self.energy = e.max(0.0);
            return Err(Error::domain(format!("dc link collapsed (energy {e:.3e} J)")));
        }
        self.energy = e;
        Ok(())
    }
}

/// Averaged state of the AFE.
#[derive(Debug, Clone, PartialEq)]
pub struct AfeState {
    /// Phase currents, inverter convention, peak d-q.
    pub currents: ThreePhaseSet<DqSample>,
    pub bus: DcBus,
}

impl AfeState {
    pub fn new(params: &AfeParams) -> Self {
        AfeState {
            currents: ThreePhaseSet::default(),
            bus: DcBus::new(params.bus_capacitance(), params.v_dc_ref),
        }
    }

    /// Upper half of the split bus; the midpoint is ideally balanced.
    pub fn v_dc_upper(&self) -> f64 {
        0.5 * self.bus.voltage()
    }

    pub fn v_dc_lower(&self) -> f64 {
        0.5 * self.bus.voltage()
    }

    /// Power drawn from the grid, `Σ ½·(U_d·I_d + U_q·I_q)` with import-convention
    /// currents (three times that for a balanced set: `1.5·(U_d·I_d + U_q·I_q)`).
    pub fn grid_import_power(&self, u: &ThreePhaseSet<DqSample>) -> f64 {
        (0..3)
            .map(|k| -0.5 * (u[k].d * self.currents[k].d + u[k].q * self.currents[k].q))
            .sum()
    }
}

/// Advances the bus by `dt` with the grid-side import power implied by the
/// state and the grid voltages `u`, minus the MAB draw.
pub fn afe_power_balance(state: &AfeState, u: &ThreePhaseSet<DqSample>, p_mab_draw: f64, dt: f64) -> Result<AfeState> {
    if !(dt > 0.0) {
        return Err(Error::domain("dt must be > 0"));
    }
    let mut next = state.clone();
    let p_in = state.grid_import_power(u);
    next.bus.apply(p_in - p_mab_draw, dt)?;
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gain_examples() {
        let a = design_a(PI / 4.0).unwrap();
        assert!((a - 1.273_239_5).abs() < 1e-6);
        let (kp, ti) = afe_gains(500e-6, 0.1, 100e-6, PI / 4.0).unwrap();
        assert!((kp - 2.618).abs() < 1e-3, "{kp}");
        assert!((ti - 5e-3).abs() < 1e-15);
        let (kp_edge, _) = afe_gains(500e-6, 0.1, 100e-6, FRAC_PI_2 - 1e-9).unwrap();
        assert!(kp_edge < 1e-8);
        assert!(afe_gains(500e-6, 0.1, 100e-6, FRAC_PI_2).is_err());
    }

    #[test]
    fn params_require_a_above_two() {
        let mut p = AfeParams {
            l_f: 500e-6,
            r_f: 0.1,
            t_s: 1e-4,
            phase_margin: 45f64.to_radians(),
            v_dc_ref: 800.0,
            c_dc: 1e-3,
            omega: 2.0 * PI * 50.0,
        };
        assert!(p.validate().is_err());
        p.phase_margin = 65f64.to_radians();
        assert!(p.validate().is_ok());
    }

    #[test]
    fn voltage_command_feedforward() {
        let p = AfeParams {
            l_f: 500e-6,
            r_f: 0.1,
            t_s: 1e-4,
            phase_margin: 65f64.to_radians(),
            v_dc_ref: 800.0,
            c_dc: 1e-3,
            omega: 2.0 * PI * 50.0,
        };
        let mut c = AfeCurrentController::new(&p).unwrap();
        let u = DqSample::new(325.0, 0.0, 0.0);
        let zero = DqSample::default();
        let out = c.afe_voltage_command(zero, zero, u, 400.0);
        assert_eq!((out.voltage.d, out.voltage.q), (325.0, 0.0));
        let i = DqSample::new(10.0, 0.0, 0.0);
        let out = c.afe_voltage_command(i, i, u, 400.0);
        // ωL·i cross-coupling
        assert!((out.voltage.q - p.omega * p.l_f * 10.0).abs() < 1e-9);
    }

    #[test]
    fn bus_energy_balance_example() {
        let state = AfeState {
            currents: ThreePhaseSet::default(),
            bus: DcBus::new(1e-3, 800.0),
        };
        let u = ThreePhaseSet::splat(DqSample::new(325.0, 0.0, 0.0));
        let next = afe_power_balance(&state, &u, 1000.0, 1e-3).unwrap();
        let dv = next.bus.voltage() - 800.0;
        // V' = sqrt(V² − 2PΔt/C)
        assert!((dv - ((640_000.0f64 - 2000.0).sqrt() - 800.0)).abs() < 1e-9);
        assert!((dv + 1.251).abs() < 1e-3);
        let back = afe_power_balance(&next, &u, -1000.0, 1e-3).unwrap();
        assert!((back.bus.voltage() - 800.0).abs() < 1e-9);
        let same = afe_power_balance(&state, &u, 0.0, 1e-3).unwrap();
        assert_eq!(same.bus.voltage(), 800.0);
        let mut dead = DcBus::new(1e-3, 1.0);
        assert!(dead.apply(-1e6, 1.0).is_err());
    }
}
