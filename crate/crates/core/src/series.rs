//! Series-injection stage: line-current physics, the per-phase d-q current
//! regulator and the operating-area calculators.

use std::f64::consts::{FRAC_PI_2, SQRT_2, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::control::{vector_clamp, PiController};
use crate::error::{Error, Result};
use crate::phasor::{DqSample, Impedance, Phasor};

/// Design constant `a` used for the series current loop (phase margin
/// `π/2 − 1/a`).
pub const SERIES_LOOP_A: f64 = 2.0;

/// Electrical parameters of one series-injection module and the loop it
/// regulates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesModuleParams {
    /// Module dc-link voltage.
    pub v_dc: f64,
    /// Total series inductance of the module (both sides).
    pub l_s: f64,
    /// Series resistance of the module inductors.
    pub r_s: f64,
    /// Total loop impedance seen by the current regulator (`Z_g`), including
    /// the module inductors.
    pub line: Impedance,
}

impl SeriesModuleParams {
    pub fn new(v_dc: f64, l_s: f64, r_s: f64, line: Impedance) -> Result<Self> {
        if !(v_dc > 0.0) {
            return Err(Error::param("v_dc", format!("must be > 0, got {v_dc}")));
        }
        if !(l_s > 0.0) {
            return Err(Error::param("l_s", format!("must be > 0, got {l_s}")));
        }
        if !(r_s >= 0.0) {
            return Err(Error::param("r_s", format!("must be >= 0, got {r_s}")));
        }
        Ok(SeriesModuleParams { v_dc, l_s, r_s, line })
    }

    pub fn omega(&self) -> f64 {
        self.line.omega
    }

    /// Largest rms voltage the H-bridge can synthesise without
    /// over-modulation.
    pub fn max_injection_rms(&self) -> f64 {
        self.v_dc / SQRT_2
    }

    /// `r_max = V_dc / (√2·V₁)`.
    pub fn r_max(&self, v1_rms: f64) -> f64 {
        self.v_dc / (SQRT_2 * v1_rms)
    }

    /// `(K_P, τ_i)` of the current loop from the L/R tuning rule with
    /// [`SERIES_LOOP_A`].
    pub fn current_loop_gains(&self, ts: f64) -> Result<(f64, f64)> {
        crate::afe::gains_for_a(self.line.inductance(), self.line.resistance, ts, SERIES_LOOP_A)
    }
}

/// Series injection in polar form relative to the feeder-1 phasor:
/// `V_S = r·V₁·e^{jγ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesVoltageCommand {
    pub r: f64,
    /// In `[0, 2π)`.
    pub gamma: f64,
}

impl SeriesVoltageCommand {
    /// Validating constructor; `gamma` is wrapped into `[0, 2π)`.
    pub fn new(r: f64, gamma: f64, r_max: f64) -> Result<Self> {
        if !(r >= 0.0) || r > r_max * (1.0 + 1e-12) {
            return Err(Error::domain(format!("modulation ratio {r} outside [0, {r_max}]")));
        }
        Ok(SeriesVoltageCommand {
            r,
            gamma: gamma.rem_euclid(TAU),
        })
    }

    /// Unchecked form used by the analytic calculators.
    pub fn unchecked(r: f64, gamma: f64) -> Self {
        SeriesVoltageCommand {
            r,
            gamma: gamma.rem_euclid(TAU),
        }
    }

    pub fn from_phasor(vs: Phasor, v1: Phasor) -> Self {
        let w = vs.complex() / v1.complex();
        Self::unchecked(w.norm(), w.arg())
    }

    pub fn to_phasor(&self, v1: Phasor) -> Phasor {
        Phasor(v1.complex() * Complex64::from_polar(self.r, self.gamma))
    }
}

/// Admissible operating area of the series stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingRegion {
    /// `|tan⁻¹(Q/P)|` bound for the P-Q load case, radians.
    pub load_angle_limit: f64,
    /// `|V₁ − V₂|` bound for the two-feeder case, volts rms.
    pub amplitude_limit: f64,
    /// `|θ₁ − θ₂|` bound for the two-feeder case, radians.
    pub phase_limit: f64,
    /// The arcsin argument exceeded one and was saturated.
    pub unrestricted: bool,
}

impl OperatingRegion {
    /// Whether a load with power `(p, q)` can be fully compensated.
    pub fn admits_load(&self, p: f64, q: f64) -> bool {
        if self.unrestricted {
            return true;
        }
        if q == 0.0 {
            return true;
        }
        let angle = if p == 0.0 { FRAC_PI_2 } else { (q / p).atan().abs() };
        angle <= self.load_angle_limit
    }
}

/// Two-feeder region together with the verdict for one feeder pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoFeederRegion {
    pub region: OperatingRegion,
    /// `V₁·cos(θ₁−θ₂) − V₂`, volts rms.
    pub amplitude_difference: f64,
    pub phase_difference: f64,
    /// `false` means the controller would fall back to bypass.
    pub feasible: bool,
}

/// `(V₁ + V_S − V₂) / Z_g`.
pub fn line_current(v1: Phasor, v2: Phasor, vs: Phasor, zg: &Impedance) -> Result<Phasor> {
    let z = zg.complex();
    if z.norm() == 0.0 {
        return Err(Error::domain("line impedance is zero"));
    }
    Ok(Phasor((v1.complex() + vs.complex() - v2.complex()) / z))
}

fn limit_angle(v_dc: f64, v1: f64) -> (f64, bool) {
    let arg = v_dc / (SQRT_2 * v1);
    if arg >= 1.0 {
        (FRAC_PI_2, arg > 1.0)
    } else {
        (arg.max(0.0).asin(), false)
    }
}

/// Load-angle limit `arcsin(V_dc/(√2·V₁))`. If the argument exceeds one the
/// region is the whole circle (`unrestricted`).
pub fn pq_load_operating_region(v_dc: f64, v1: f64) -> Result<OperatingRegion> {
    if !(v_dc >= 0.0) || !(v1 > 0.0) {
        return Err(Error::domain(format!("need v_dc >= 0 and v1 > 0, got {v_dc}, {v1}")));
    }
    let (limit, unrestricted) = limit_angle(v_dc, v1);
    Ok(OperatingRegion {
        load_angle_limit: limit,
        amplitude_limit: v_dc / SQRT_2,
        phase_limit: limit,
        unrestricted,
    })
}

/// Amplitude and phase bounds for a series module between two feeders and
/// the verdict for the pair `(v1, v2)` with angle difference `phase_diff`.
pub fn two_feeder_operating_region(v_dc: f64, v1: f64, v2: f64, phase_diff: f64) -> Result<TwoFeederRegion> {
    let region = pq_load_operating_region(v_dc, v1)?;
    if !(v2 > 0.0) {
        return Err(Error::domain(format!("v2 must be > 0, got {v2}")));
    }
    let amp = v1 * phase_diff.cos() - v2;
    let tol = 1e-12 * v1.max(v2);
    let feasible = (region.unrestricted || phase_diff.abs() <= region.phase_limit + 1e-15)
        && amp.abs() <= region.amplitude_limit + tol;
    Ok(TwoFeederRegion {
        region,
        amplitude_difference: amp,
        phase_difference: phase_diff,
        feasible,
    })
}

/// Feeder-side `(P₁, Q₁)` of a series module feeding a load `Z_L` (load
/// angle `φ = ∠Z_L`).
pub fn pq_load_power(v1: Phasor, cmd: SeriesVoltageCommand, z_l: &Impedance) -> Result<(f64, f64)> {
    let zm = z_l.magnitude();
    if zm == 0.0 {
        return Err(Error::domain("load impedance is zero"));
    }
    let phi = z_l.angle();
    let k = v1.magnitude().powi(2) / zm;
    let p = k * phi.cos() + cmd.r * k * (phi - cmd.gamma).cos();
    let q = k * phi.sin() + cmd.r * k * (phi - cmd.gamma).sin();
    Ok((p, q))
}

/// Smallest injection that cancels the feeder reactive power of a load with
/// angle `phi`: `r = |sin φ|`, `γ = φ ± π/2`.
///
/// This satisfies `sin φ + r·sin(φ−γ) = 0` in [`pq_load_power`].
pub fn reactive_compensation_command(phi: f64) -> SeriesVoltageCommand {
    if phi >= 0.0 {
        SeriesVoltageCommand::unchecked(phi.sin(), phi + FRAC_PI_2)
    } else {
        SeriesVoltageCommand::unchecked(-phi.sin(), phi - FRAC_PI_2)
    }
}

/// Power injected into feeder 2 through a line of reactance `x_g`.
pub fn two_feeder_injected_power(v1: Phasor, v2: Phasor, cmd: SeriesVoltageCommand, x_g: f64) -> Result<(f64, f64)> {
    if x_g == 0.0 {
        return Err(Error::domain("line reactance is zero"));
    }
    let (m1, m2) = (v1.magnitude(), v2.magnitude());
    let delta = v1.angle() - v2.angle();
    let k = m1 * m2 / x_g;
    let p = k * delta.sin() + cmd.r * k * (delta + cmd.gamma).sin();
    let q = k * delta.cos() + cmd.r * k * (delta + cmd.gamma).cos() - m2 * m2 / x_g;
    Ok((p, q))
}

/// Closed-form inverse of [`two_feeder_injected_power`]: the command that
/// delivers `(p, q)` into feeder 2.
pub fn two_feeder_command(v1: Phasor, v2: Phasor, x_g: f64, p: f64, q: f64) -> Result<SeriesVoltageCommand> {
    if x_g == 0.0 {
        return Err(Error::domain("line reactance is zero"));
    }
    let (m1, m2) = (v1.magnitude(), v2.magnitude());
    if m1 == 0.0 || m2 == 0.0 {
        return Err(Error::domain("feeder voltages must be nonzero"));
    }
    let delta = v1.angle() - v2.angle();
    let s = Complex64::new(p, q);
    let w = (Complex64::new(m2 * m2, 0.0) - Complex64::i() * x_g * s) * Complex64::from_polar(1.0, delta) / (m1 * m2)
        - 1.0;
    Ok(SeriesVoltageCommand::unchecked(w.norm(), -w.arg()))
}

/// Output of one series-regulator sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesOutput {
    /// Commanded injection, peak d-q.
    pub voltage: DqSample,
    pub saturated: bool,
}

/// Per-phase synchronous-frame current regulator of one series module.
#[derive(Debug, Clone)]
pub struct SeriesCurrentController {
    pub pi_d: PiController,
    pub pi_q: PiController,
    /// `ω_g·L_g` used in the cross-coupling feedforward.
    pub omega_l: f64,
}

impl SeriesCurrentController {
    pub fn new(params: &SeriesModuleParams, ts: f64) -> Result<Self> {
        let (kp, ti) = params.current_loop_gains(ts)?;
        Ok(SeriesCurrentController {
            pi_d: PiController::new(kp, ti, ts),
            pi_q: PiController::new(kp, ti, ts),
            omega_l: params.line.reactance,
        })
    }

    pub fn reset(&mut self) {
        self.pi_d.reset();
        self.pi_q.reset();
    }

    /// One regulator sample:
    /// `V_Sd = V₂d − V₁d − ω_gL_g·I_q + PI(I_d,ref − I_d)` and
    /// `V_Sq = V₂q − V₁q + ω_gL_g·I_d + PI(I_q,ref − I_q)`,
    /// vector-clamped to the peak modulation limit `v_dc`.
    pub fn series_voltage_setpoint(
        &mut self,
        i_ref: DqSample,
        i_meas: DqSample,
        v1: DqSample,
        v2: DqSample,
        v_dc: f64,
    ) -> SeriesOutput {
        let ud = self.pi_d.step(i_ref.d - i_meas.d);
        let uq = self.pi_q.step(i_ref.q - i_meas.q);
        let d = v2.d - v1.d - self.omega_l * i_meas.q + ud;
        let q = v2.q - v1.q + self.omega_l * i_meas.d + uq;
        let (d, q, saturated) = vector_clamp(d, q, v_dc.max(0.0));
        // integrate only along axes whose error pulls back inside the limit
        if saturated {
            if (i_ref.d - i_meas.d) * d > 0.0 {
                self.pi_d.hold();
            }
            if (i_ref.q - i_meas.q) * q > 0.0 {
                self.pi_q.hold();
            }
        }
        SeriesOutput {
            voltage: DqSample::new(d, q, i_meas.theta),
            saturated,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const W: f64 = 2.0 * PI * 50.0;

    fn z(r: f64, x: f64) -> Impedance {
        Impedance::new(r, x, W).unwrap()
    }

    #[test]
    fn line_current_examples() {
        let v = Phasor::from_polar(230.0, 0.0);
        let i = line_current(v, v, Phasor::ZERO, &z(0.02, 0.05)).unwrap();
        assert_eq!(i.magnitude(), 0.0);

        // 10 V across 0.02 + j0.05 Ω
        let i = line_current(v, Phasor::from_polar(220.0, 0.0), Phasor::ZERO, &z(0.02, 0.05)).unwrap();
        assert!((i.magnitude() - 185.695).abs() < 1e-2, "{}", i.magnitude());
        assert!((i.angle().to_degrees() + 68.199).abs() < 1e-2);

        let i = line_current(v, v, Phasor::from_polar(10.0, PI / 2.0), &z(0.0, 0.05)).unwrap();
        assert!((i.re() - 200.0).abs() < 1e-9 && i.im().abs() < 1e-9);

        assert!(line_current(v, v, v, &z(0.0, 0.0)).is_err());
    }

    #[test]
    fn pq_region_examples() {
        let r = pq_load_operating_region(50.0, 230.0).unwrap();
        assert!((r.load_angle_limit.to_degrees() - 8.84).abs() < 0.01);
        let r0 = pq_load_operating_region(0.0, 230.0).unwrap();
        assert_eq!(r0.load_angle_limit, 0.0);
        let full = pq_load_operating_region(500.0, 230.0).unwrap();
        assert!(full.unrestricted);
        assert!(pq_load_operating_region(50.0, 0.0).is_err());
        // case-1 load angle
        let ang = (5.621f64 / 40.0).atan().to_degrees();
        assert!((ang - 8.00).abs() < 0.005);
        assert!(r.admits_load(40e3, 5.621e3));
        assert!(!r.admits_load(40e3, 8e3));
    }

    #[test]
    fn two_feeder_region_examples() {
        let r = two_feeder_operating_region(50.0, 230.0, 230.0, 0.0).unwrap();
        assert!((r.region.amplitude_limit - 35.3553).abs() < 1e-4);
        assert!(r.feasible);
        let r = two_feeder_operating_region(50.0, 400.0 / 3f64.sqrt(), 380.0 / 3f64.sqrt(), 0.0).unwrap();
        assert!((r.amplitude_difference - 11.547).abs() < 1e-3);
        assert!(r.feasible);
        let r = two_feeder_operating_region(0.0, 230.0, 230.0, 0.0).unwrap();
        assert!(r.feasible);
        let r = two_feeder_operating_region(50.0, 230.0, 180.0, 0.0).unwrap();
        assert!(!r.feasible);
        let r = two_feeder_operating_region(50.0, 230.0, 230.0, 10f64.to_radians()).unwrap();
        assert!(!r.feasible);
    }

    #[test]
    fn pq_load_power_bypass_baseline() {
        let zl = Impedance::new(1.3225 * 8f64.to_radians().cos(), 1.3225 * 8f64.to_radians().sin(), W).unwrap();
        let (p, q) = pq_load_power(Phasor::from_polar(230.0, 0.0), SeriesVoltageCommand::unchecked(0.0, 0.0), &zl).unwrap();
        assert!((p - 39_610.7).abs() < 1.0, "{p}");
        assert!((q - 5_566.9).abs() < 1.0, "{q}");
    }

    #[test]
    fn compensation_command_nulls_reactive_power() {
        for deg in [-8.0, -3.0, 0.5, 8.0, 8.8] {
            let phi = f64::to_radians(deg);
            let zl = Impedance::new(phi.cos(), phi.sin(), W).unwrap();
            let cmd = reactive_compensation_command(phi);
            let (_, q) = pq_load_power(Phasor::from_polar(230.0, 0.0), cmd, &zl).unwrap();
            assert!(q.abs() < 1e-9, "deg={deg} q={q}");
            assert!((cmd.r - phi.sin().abs()).abs() < 1e-15);
        }
    }

    #[test]
    fn injected_power_bypass_example() {
        let v1 = Phasor::from_polar(230.0, 8f64.to_radians());
        let v2 = Phasor::from_polar(230.0, 0.0);
        let (p, q) = two_feeder_injected_power(v1, v2, SeriesVoltageCommand::unchecked(0.0, 0.0), 0.05).unwrap();
        assert!((p - 147_246.0).abs() < 1.0, "{p}");
        assert!((q + 10_296.4).abs() < 0.1, "{q}");
        let (p, q) = two_feeder_injected_power(v2, v2, SeriesVoltageCommand::unchecked(0.0, 0.0), 0.05).unwrap();
        assert!(p.abs() < 1e-9 && q.abs() < 1e-9);
        assert!(two_feeder_injected_power(v1, v2, SeriesVoltageCommand::unchecked(0.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn command_inverse_round_trip() {
        let v1 = Phasor::from_polar(230.94, 0.0);
        let v2 = Phasor::from_polar(230.94, 8f64.to_radians());
        for &(p, q) in &[(0.0, 0.0), (2000.0, 2000.0), (-5000.0, 300.0)] {
            let cmd = two_feeder_command(v1, v2, 0.0814, p, q).unwrap();
            let (p2, q2) = two_feeder_injected_power(v1, v2, cmd, 0.0814).unwrap();
            assert!((p2 - p).abs() < 1e-6 && (q2 - q).abs() < 1e-6, "{p2} {q2}");
        }
    }

    #[test]
    fn regulator_zero_error_outputs_cross_coupling() {
        let params = SeriesModuleParams::new(50.0, 100e-6, 0.005, z(0.025, 0.0814)).unwrap();
        let mut c = SeriesCurrentController::new(&params, 1e-4).unwrap();
        let i = DqSample::new(20.0, -5.0, 0.0);
        let v = DqSample::new(325.0, 0.0, 0.0);
        let out = c.series_voltage_setpoint(i, i, v, v, 50.0);
        assert!((out.voltage.d - 0.0814 * 5.0).abs() < 1e-12);
        assert!((out.voltage.q - 0.0814 * 20.0).abs() < 1e-12);
        assert!(!out.saturated);
        let zero = DqSample::default();
        let out = c.series_voltage_setpoint(zero, zero, zero, zero, 50.0);
        assert_eq!((out.voltage.d, out.voltage.q), (0.0, 0.0));
    }

    #[test]
    fn regulator_never_exceeds_modulation_circle() {
        let params = SeriesModuleParams::new(50.0, 100e-6, 0.005, z(0.025, 0.0814)).unwrap();
        let mut c = SeriesCurrentController::new(&params, 1e-4).unwrap();
        let out = c.series_voltage_setpoint(
            DqSample::new(500.0, 0.0, 0.0),
            DqSample::default(),
            DqSample::new(325.0, 0.0, 0.0),
            DqSample::new(300.0, 20.0, 0.0),
            50.0,
        );
        assert!(out.saturated);
        assert!(out.voltage.magnitude() <= 50.0 + 1e-12);
        assert_eq!(c.pi_d.integral(), 0.0);
    }
}
