use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use super::gains::{exact_crossover, gains_from, scheduled_kp};
use super::magnetics::MabMagnetics;
use super::solver::{solve_from, PhaseSolution};
use super::steady::{MabOperatingPoint, PairCoefficients};
use crate::control::PiController;
use crate::error::{Error, Result};

/// Dc-link regulation settings shared by every secondary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MabControlParams {
    pub v_ref: f64,
    pub capacitance: f64,
    /// Controller sample period.
    pub t_s: f64,
    /// Loop delay used for the design (compute delay plus hold).
    pub t_d: f64,
    pub phase_margin: f64,
    pub decoupling: bool,
}

impl Default for MabControlParams {
    fn default() -> Self {
        MabControlParams {
            v_ref: 50.0,
            capacitance: 200e-6,
            t_s: 1e-4,
            t_d: 150e-6,
            phase_margin: PI / 3.0,
            decoupling: true,
        }
    }
}

/// Largest phase the controller commands on any secondary. Keeps every
/// pairwise difference strictly inside `(−π, π)`.
const PHASE_LIMIT: f64 = FRAC_PI_2 - 1e-3;
/// Bound on the PI correction in radians.
const CORRECTION_LIMIT: f64 = 0.5;

/// Feedforward Newton–Raphson phases plus one PI voltage loop per
/// secondary, with cross-channel decoupling and a gain schedule that
/// re-derives `K_P` from the measured load every sample.
#[derive(Debug, Clone)]
pub struct MabController {
    coeffs: PairCoefficients,
    params: MabControlParams,
    omega_c: f64,
    ti: f64,
    pi: Vec<PiController>,
    feedforward: Vec<f64>,
    correction: Vec<f64>,
    saturated: bool,
    feedforward_scale: f64,
}

impl MabController {
    pub fn new(mag: &MabMagnetics, params: MabControlParams) -> Result<Self> {
        mag.validate()?;
        if !(params.t_s > 0.0) || !(params.capacitance > 0.0) || !(params.v_ref > 0.0) {
            return Err(Error::param("mab", "t_s, capacitance and v_ref must be > 0"));
        }
        // unloaded link is the worst case for phase; loading only adds margin
        let omega_c = exact_crossover(params.t_d, params.phase_margin, f64::INFINITY, params.capacitance)?;
        let ti = 10.0 / omega_c;
        let m = mag.windings() - 1;
        let pi = (0..m)
            .map(|_| PiController::with_limits(0.0, ti, params.t_s, -CORRECTION_LIMIT, CORRECTION_LIMIT))
            .collect();
        Ok(MabController {
            coeffs: PairCoefficients::new(mag),
            params,
            omega_c,
            ti,
            pi,
            feedforward: vec![0.0; m],
            correction: vec![0.0; m],
            saturated: false,
            feedforward_scale: 1.0,
        })
    }

    pub fn params(&self) -> &MabControlParams {
        &self.params
    }

    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }

    pub fn ti(&self) -> f64 {
        self.ti
    }

    pub fn coefficients(&self) -> &PairCoefficients {
        &self.coeffs
    }

    /// True when the last feedforward solve had to scale its targets down.
    pub fn saturated(&self) -> bool {
        self.saturated
    }

    pub fn feedforward_scale(&self) -> f64 {
        self.feedforward_scale
    }

    pub fn reset(&mut self) {
        self.pi.iter_mut().for_each(PiController::reset);
        self.correction.iter_mut().for_each(|c| *c = 0.0);
    }

    /// Commanded phases of every bridge, primary first.
    pub fn phases(&self) -> Vec<f64> {
        let mut out = vec![0.0];
        out.extend(
            self.feedforward
                .iter()
                .zip(&self.correction)
                .map(|(f, c)| (f + c).clamp(-PHASE_LIMIT, PHASE_LIMIT)),
        );
        out
    }

    /// Solves for the phases that supply `load_power` (watts drawn from each
    /// secondary link). Infeasible targets are scaled back until solvable.
    pub fn update_feedforward(&mut self, voltages: &[f64], load_power: &[f64]) -> Result<()> {
        let targets: Vec<f64> = load_power.iter().map(|p| -p).collect();
        match solve_from(&self.coeffs, &targets, voltages, &self.feedforward) {
            Ok(sol) => {
                self.accept(sol, 1.0);
                return Ok(());
            }
            Err(Error::Infeasible { .. }) | Err(Error::Degenerate(_)) => {}
            Err(e) => return Err(e),
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut best: Option<(PhaseSolution, f64)> = None;
        for _ in 0..16 {
            let k = 0.5 * (lo + hi);
            let scaled: Vec<f64> = targets.iter().map(|t| t * k).collect();
            match solve_from(&self.coeffs, &scaled, voltages, &vec![0.0; scaled.len()]) {
                Ok(sol) => {
                    best = Some((sol, k));
                    lo = k;
                }
                Err(_) => hi = k,
            }
        }
        match best {
            Some((sol, k)) => self.accept(sol, k),
            None => self.accept_zero(),
        }
        self.saturated = true;
        Ok(())
    }

    fn accept(&mut self, sol: PhaseSolution, scale: f64) {
        self.feedforward.copy_from_slice(sol.secondary_phases());
        self.feedforward_scale = scale;
        self.saturated = scale < 1.0;
    }

    fn accept_zero(&mut self) {
        self.feedforward.iter_mut().for_each(|f| *f = 0.0);
        self.feedforward_scale = 0.0;
    }

    /// One controller sample. `voltages` holds every bridge, primary first;
    /// `equivalent_load` the small-signal load resistance `R_i` each
    /// secondary PI works against, used to schedule `K_P`.
    ///
    /// Pass `inf` for a link whose load the feedforward already cancels: the
    /// PI then sees the bare capacitor. Passing `V²/P` for such a link puts
    /// the crossover far above `ω_c` at heavy load.
    pub fn regulate(&mut self, voltages: &[f64], equivalent_load: &[f64]) {
        let phases = self.phases();
        let (diag, cross) = gains_from(&self.coeffs, voltages, &phases);
        let n = self.coeffs.size();
        let prev = self.correction.clone();
        for k in 0..self.pi.len() {
            let i = k + 1;
            let v = voltages[i];
            let k_phi = diag[i].max(1e-9);
            self.pi[k].kp = scheduled_kp(k_phi, self.omega_c, self.ti, equivalent_load[k], self.params.capacitance);
            // a larger phase drains the link, hence the sign
            let u = -self.pi[k].step(self.params.v_ref - v);
            let dec = if self.params.decoupling {
                (1..n)
                    .filter(|&j| j != i)
                    .map(|j| cross[i * n + j] / k_phi * prev[j - 1])
                    .sum()
            } else {
                0.0
            };
            self.correction[k] = (u + dec).clamp(-CORRECTION_LIMIT, CORRECTION_LIMIT);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DcLinkStep {
    /// Updated secondary link voltages.
    pub voltages: Vec<f64>,
    /// Set when some link moved by more than 0.1 % in this step.
    pub step_too_large: bool,
}

/// Forward-Euler step of the secondary dc links,
/// `C_i·dV_i/dt = −I_i − I_load,i`, where `I_i` (from the phase shifts in
/// `op`) is positive out of the link. The primary link is held.
pub fn mab_dc_link_step(op: &MabOperatingPoint, mag: &MabMagnetics, load_currents: &[f64], dt: f64) -> Result<DcLinkStep> {
    if !(dt > 0.0) {
        return Err(Error::param("dt", "must be > 0"));
    }
    op.validate()?;
    let n = op.voltages.len();
    if load_currents.len() != n - 1 {
        return Err(Error::param("load_currents", "one load current per secondary required"));
    }
    let i = PairCoefficients::new(mag).currents(&op.voltages, &op.phases)?;
    let mut step_too_large = false;
    let mut voltages = Vec::with_capacity(n - 1);
    for k in 1..n {
        let v = op.voltages[k];
        let dv = dt * (-i[k] - load_currents[k - 1]) / op.capacitances[k];
        let next = v + dv;
        if !(next > 0.0) {
            return Err(Error::domain(format!("dc link {k} collapsed to {next:.3} V")));
        }
        if dv.abs() > 1e-3 * v {
            step_too_large = true;
        }
        voltages.push(next);
    }
    Ok(DcLinkStep {
        voltages,
        step_too_large,
    })
}
