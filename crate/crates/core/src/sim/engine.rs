use std::f64::consts::{SQRT_2, TAU};

use num_complex::Complex64;
use serde::Serialize;

use super::measure::{SlidingMean, SlidingPhasor};
use super::record::{AuditMark, PowerAudit, TimeSeriesRecord};
use super::scenario::{Action, Scenario, Setpoint, Termination};
use crate::afe::{AfeCurrentController, DcBus, DcBusController};
use crate::error::{Error, Result};
use crate::mab::{MabController, PairCoefficients};
use crate::phasor::{DqSample, Impedance, Phasor, QuadratureDelay};
use crate::plant::RlBranch;
use crate::series::SeriesCurrentController;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FaultRecord {
    pub time: f64,
    pub cause: String,
}

/// Phasor-domain steady state for one operating mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhasorPrediction {
    pub current: [Phasor; 3],
    pub vs: [Phasor; 3],
    pub v1: [Phasor; 3],
    pub v2: [Phasor; 3],
}

impl PhasorPrediction {
    pub fn s1(&self, k: usize) -> Complex64 {
        self.v1[k].complex() * self.current[k].complex().conj()
    }

    pub fn s2(&self, k: usize) -> Complex64 {
        self.v2[k].complex() * self.current[k].complex().conj()
    }
}

/// Feasibility of one setpoint, checked before the run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SetpointCheck {
    pub time: f64,
    pub setpoint: Setpoint,
    pub required_vs_rms: [f64; 3],
    pub limit_rms: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimOutcome {
    pub fault: Option<FaultRecord>,
    pub audit: PowerAudit,
    /// Cumulative audit just before each event.
    pub audit_marks: Vec<AuditMark>,
    pub warnings: Vec<String>,
    pub checks: Vec<SetpointCheck>,
    pub steps: usize,
    pub end_time: f64,
}

#[derive(Debug, Clone)]
pub struct SimResult {
    pub scenario: Scenario,
    pub records: Vec<TimeSeriesRecord>,
    pub outcome: SimOutcome,
}

impl SimResult {
    pub fn fault(&self) -> Option<&FaultRecord> {
        self.outcome.fault.as_ref()
    }
}

fn phase_angles(angle_deg: f64) -> [f64; 3] {
    let a = angle_deg.to_radians();
    [a, a - TAU / 3.0, a + TAU / 3.0]
}

fn feeder2_phasors(s: &Scenario) -> Option<[Phasor; 3]> {
    match &s.termination {
        Termination::Feeder(f) => {
            let p = f.phasors();
            Some([p[0], p[1], p[2]])
        }
        Termination::Load(_) => None,
    }
}

/// Current reference (rms phasor, absolute angle) of phase `k`.
pub fn reference_current(s: &Scenario, sp: &Setpoint, k: usize) -> Result<Phasor> {
    let theta = phase_angles(s.feeder1.angle_deg)[k];
    match *sp {
        Setpoint::Current { d, q } => Ok(Phasor(Complex64::new(d, q) * Complex64::from_polar(1.0, theta))),
        Setpoint::Power { p, q } => {
            let v2 = feeder2_phasors(s).ok_or_else(|| Error::Config("power setpoint needs feeder 2".into()))?[k];
            if v2.magnitude() == 0.0 {
                return Err(Error::Config("power setpoint into a dead feeder".into()));
            }
            Ok(Phasor((Complex64::new(p, q) / v2.complex()).conj()))
        }
    }
}

/// Steady state predicted by phasor algebra, bypassed when `setpoint` is
/// `None`.
pub fn predict_steady_state(s: &Scenario, setpoint: Option<&Setpoint>) -> Result<PhasorPrediction> {
    let w = s.omega();
    let v1 = s.feeder1.phasors();
    let v1 = [v1[0], v1[1], v1[2]];
    let mut out = PhasorPrediction {
        current: [Phasor::ZERO; 3],
        vs: [Phasor::ZERO; 3],
        v1,
        v2: [Phasor::ZERO; 3],
    };
    let z = s.branch_impedance()?.complex();
    for k in 0..3 {
        let i = match setpoint {
            None => match feeder2_phasors(s) {
                Some(v2) => (v1[k].complex() - v2[k].complex()) / z,
                None => v1[k].complex() / z,
            },
            Some(sp) => reference_current(s, sp, k)?.complex(),
        };
        let (v2, vs) = match (&s.termination, feeder2_phasors(s)) {
            (_, Some(v2)) => (v2[k].complex(), v2[k].complex() - v1[k].complex() + z * i),
            (Termination::Load(l), None) => {
                let zl = l.impedance(w)?.complex();
                (zl * i, z * i - v1[k].complex())
            }
            _ => unreachable!(),
        };
        out.current[k] = Phasor(i);
        out.v2[k] = Phasor(v2);
        out.vs[k] = Phasor(if setpoint.is_some() { vs } else { Complex64::new(0.0, 0.0) });
    }
    Ok(out)
}

fn setpoint_checks(s: &Scenario) -> Result<(Vec<SetpointCheck>, Vec<String>)> {
    let limit = s.series.v_dc / SQRT_2;
    let mut checks = Vec::new();
    let mut warnings = Vec::new();
    let first_active = s.events.iter().find(|e| e.action == Action::Activate).map(|e| e.time);
    let mut list = vec![(first_active.unwrap_or(0.0), s.setpoint)];
    list.extend(s.events.iter().filter_map(|e| e.setpoint.map(|sp| (e.time, sp))));
    for (time, sp) in list {
        let pred = predict_steady_state(s, Some(&sp))?;
        let req = [0, 1, 2].map(|k| pred.vs[k].magnitude());
        let feasible = req.iter().all(|v| *v <= limit);
        if !feasible {
            warnings.push(format!(
                "setpoint at t = {time} s needs {:.2} V rms injection, above the {limit:.2} V limit; expect saturation (bypass region)",
                req.iter().cloned().fold(0.0, f64::max)
            ));
        }
        checks.push(SetpointCheck {
            time,
            setpoint: sp,
            required_vs_rms: req,
            limit_rms: limit,
            feasible,
        });
    }
    Ok((checks, warnings))
}

/// Runs `s`, keeping every record in memory.
pub fn run_scenario(s: &Scenario) -> Result<SimResult> {
    let mut records = Vec::with_capacity(s.total_steps() / s.steps_per_record() + 2);
    let outcome = run_scenario_with(s, |r| records.push(r.clone()))?;
    Ok(SimResult {
        scenario: s.clone(),
        records,
        outcome,
    })
}

/// Runs `s`, handing each record to `sink` as it is produced. Only
/// configuration problems return `Err`; simulation faults end the run and
/// are reported in the outcome.
pub fn run_scenario_with(s: &Scenario, mut sink: impl FnMut(&TimeSeriesRecord)) -> Result<SimOutcome> {
    s.validate()?;
    let (checks, mut warnings) = setpoint_checks(s)?;
    for w in &warnings {
        log::warn!("{}: {w}", s.name);
    }
    let mut eng = Engine::new(s)?;
    sink(&eng.record());
    let n = s.total_steps();
    let mut fault = None;
    let mut steps = 0;
    for k in 0..n {
        if let Err(e) = eng.step(k) {
            fault = Some(FaultRecord {
                time: eng.time(k),
                cause: e.to_string(),
            });
            break;
        }
        steps = k + 1;
        if steps % eng.n_rec == 0 {
            sink(&eng.record());
        }
    }
    if let Some(f) = &fault {
        log::error!("{}: fault at t = {} s: {}", s.name, f.time, f.cause);
    }
    if eng.mab_saturated_ever {
        warnings.push("MAB feedforward saturated during the run".into());
    }
    eng.audit.close();
    Ok(SimOutcome {
        fault,
        audit: eng.audit.clone(),
        audit_marks: eng.marks.clone(),
        warnings,
        checks,
        steps,
        end_time: eng.time(steps),
    })
}

enum Branch {
    /// Feeder 2 behind the line; audit resistance and inductance are the
    /// whole branch.
    Feeder { delay: Vec<QuadratureDelay>, v2: [Phasor; 3] },
    /// Load impedance in the branch; only the module part is "line".
    Load { r_l: f64, l_l: f64 },
}

struct Engine<'a> {
    s: &'a Scenario,
    h: f64,
    omega: f64,
    n_ctrl: usize,
    n_rec: usize,
    frame: [Complex64; 3],
    v1_mag: [f64; 3],
    v1_delay: Vec<QuadratureDelay>,
    v1_env: [Complex64; 3],
    branch: Branch,
    v2_env: [Complex64; 3],
    line: [RlBranch; 3],
    line_r_audit: f64,
    line_l_audit: f64,
    afe_line: [RlBranch; 3],
    series_ctl: Vec<SeriesCurrentController>,
    afe_ctl: Vec<AfeCurrentController>,
    bus_ctl: DcBusController,
    mab: MabController,
    coeffs: PairCoefficients,
    links: [DcBus; 3],
    bus: DcBus,
    vs_cmd: [Complex64; 3],
    vs_pending: [Complex64; 3],
    afe_cmd: [Complex64; 3],
    afe_pending: [Complex64; 3],
    active: bool,
    i_ref: [Complex64; 3],
    series_sat: [bool; 3],
    afe_sat: bool,
    mab_sat: bool,
    mab_saturated_ever: bool,
    p0_mean: SlidingMean,
    mab_meas: Option<Vec<f64>>,
    phases: Vec<f64>,
    next_event: usize,
    m_v1: Vec<SlidingPhasor>,
    m_v2: Vec<SlidingPhasor>,
    m_i: Vec<SlidingPhasor>,
    m_vs: Vec<SlidingPhasor>,
    audit: PowerAudit,
    marks: Vec<AuditMark>,
    t_now: f64,
}

impl<'a> Engine<'a> {
    fn new(s: &'a Scenario) -> Result<Self> {
        let h = s.step;
        let omega = s.omega();
        let angles = phase_angles(s.feeder1.angle_deg);
        let frame = angles.map(|a| Complex64::from_polar(1.0, a));
        let v1_mag = s.feeder1.magnitudes;

        let make_delay = |mag: [f64; 3], ang: [f64; 3]| -> Result<(Vec<QuadratureDelay>, [Complex64; 3])> {
            let mut d = Vec::new();
            let mut env = [Complex64::new(0.0, 0.0); 3];
            for k in 0..3 {
                let mut q = QuadratureDelay::new(omega, h)?;
                q.prefill(|j| SQRT_2 * mag[k] * (omega * -(j as f64) * h + ang[k]).cos());
                let alpha = SQRT_2 * mag[k] * ang[k].cos();
                env[k] = Complex64::new(alpha, q.push(alpha));
                d.push(q);
            }
            Ok((d, env))
        };
        let (v1_delay, v1_env) = make_delay(v1_mag, angles)?;

        let w = omega;
        let series_params = s.series_params()?;
        let (branch, v2_env, line, r_audit, l_audit) = match &s.termination {
            Termination::Feeder(f) => {
                let ang = phase_angles(f.angle_deg);
                let (delay, env) = make_delay(f.magnitudes, ang)?;
                let z = series_params.line;
                let v2 = f.phasors();
                let l = z.inductance();
                (
                    Branch::Feeder {
                        delay,
                        v2: [v2[0], v2[1], v2[2]],
                    },
                    env,
                    [RlBranch::new(l, z.resistance); 3],
                    z.resistance,
                    l,
                )
            }
            Termination::Load(load) => {
                let zl: Impedance = load.impedance(w)?;
                let (r_l, l_l) = (zl.resistance, zl.inductance());
                let br = RlBranch::new(s.series.l_s + l_l, s.series.r_s + r_l);
                (Branch::Load { r_l, l_l }, [Complex64::new(0.0, 0.0); 3], [br; 3], s.series.r_s, s.series.l_s)
            }
        };

        let afe = s.afe_params();
        afe.validate()?;
        let u_peak_sum = 3.0 * SQRT_2 * s.v_phase_nominal();
        let bus_ctl = DcBusController::design(&afe, u_peak_sum)?;
        let afe_ctl = (0..3).map(|_| AfeCurrentController::new(&afe)).collect::<Result<Vec<_>>>()?;
        let series_ctl = (0..3)
            .map(|_| SeriesCurrentController::new(&series_params, s.control_period))
            .collect::<Result<Vec<_>>>()?;

        let mag = s.mab_magnetics()?;
        let mab = MabController::new(&mag, s.mab_control())?;
        let coeffs = mab.coefficients().clone();
        let n_cycle = s.steps_per_cycle();

        let mut eng = Engine {
            s,
            h,
            omega,
            n_ctrl: s.steps_per_control(),
            n_rec: s.steps_per_record(),
            frame,
            v1_mag,
            v1_delay,
            v1_env,
            branch,
            v2_env,
            line,
            line_r_audit: r_audit,
            line_l_audit: l_audit,
            afe_line: [RlBranch::new(afe.l_f, afe.r_f); 3],
            series_ctl,
            afe_ctl,
            bus_ctl,
            mab,
            coeffs,
            links: [DcBus::new(s.mab.capacitance, s.series.precharge); 3],
            bus: DcBus::new(afe.bus_capacitance(), afe.v_dc_ref),
            vs_cmd: [Complex64::new(0.0, 0.0); 3],
            vs_pending: [Complex64::new(0.0, 0.0); 3],
            afe_cmd: [Complex64::new(0.0, 0.0); 3],
            afe_pending: [Complex64::new(0.0, 0.0); 3],
            active: false,
            i_ref: [Complex64::new(0.0, 0.0); 3],
            series_sat: [false; 3],
            afe_sat: false,
            mab_sat: false,
            mab_saturated_ever: false,
            p0_mean: SlidingMean::new(n_cycle),
            mab_meas: None,
            phases: vec![0.0; 4],
            next_event: 0,
            m_v1: (0..3).map(|_| SlidingPhasor::new(n_cycle)).collect(),
            m_v2: (0..3).map(|_| SlidingPhasor::new(n_cycle)).collect(),
            m_i: (0..3).map(|_| SlidingPhasor::new(n_cycle)).collect(),
            m_vs: (0..3).map(|_| SlidingPhasor::new(n_cycle)).collect(),
            audit: PowerAudit::default(),
            marks: Vec::new(),
            t_now: 0.0,
        };
        eng.set_reference(&s.setpoint)?;
        // converter voltage starts equal to the grid so no inrush flows
        eng.afe_cmd = eng.v1_dq();
        eng.afe_pending = eng.afe_cmd;
        if let Branch::Load { .. } = eng.branch {
            eng.v2_env = eng.load_voltage(Complex64::new(0.0, 0.0));
        }
        Ok(eng)
    }

    fn time(&self, k: usize) -> f64 {
        k as f64 * self.h
    }

    fn rotor(&self, t: f64) -> Complex64 {
        Complex64::from_polar(1.0, self.omega * t)
    }

    fn set_reference(&mut self, sp: &Setpoint) -> Result<()> {
        for k in 0..3 {
            let i = reference_current(self.s, sp, k)?;
            // peak d-q in the phase's own feeder-1 frame
            self.i_ref[k] = i.complex() * self.frame[k].conj() * SQRT_2;
        }
        Ok(())
    }

    fn v1_dq(&self) -> [Complex64; 3] {
        let rot = self.rotor(self.t_now);
        [0, 1, 2].map(|k| self.v1_env[k] * (rot * self.frame[k]).conj())
    }

    /// Load-terminal voltage `R_L·i + L_L·di/dt` for the present state.
    fn load_voltage(&self, _unused: Complex64) -> [Complex64; 3] {
        let Branch::Load { r_l, l_l } = self.branch else {
            return self.v2_env;
        };
        let rot = self.rotor(self.t_now);
        [0, 1, 2].map(|k| {
            let drive = self.v1_env[k] + self.vs_cmd[k] * rot * self.frame[k];
            let di = self.line[k].derivative(drive);
            self.line[k].current * r_l + di * l_l
        })
    }

    fn apply_events(&mut self, t: f64) -> Result<()> {
        while let Some(e) = self.s.events.get(self.next_event) {
            if e.time > t + 0.5 * self.h {
                break;
            }
            self.next_event += 1;
            let mut audit = self.audit.clone();
            audit.close();
            self.marks.push(AuditMark { time: t, audit });
            match e.action {
                Action::Bypass => {
                    self.active = false;
                    self.vs_pending = [Complex64::new(0.0, 0.0); 3];
                }
                Action::Activate => {
                    self.active = true;
                    self.series_ctl.iter_mut().for_each(SeriesCurrentController::reset);
                }
                Action::Retarget => {}
            }
            if let Some(sp) = e.setpoint {
                self.set_reference(&sp)?;
            }
            log::debug!("{}: {:?} at t = {t}", self.s.name, e.action);
        }
        Ok(())
    }

    fn control(&mut self) -> Result<()> {
        // outputs computed one sample ago take effect now
        self.vs_cmd = self.vs_pending;
        self.afe_cmd = self.afe_pending;
        if let Some(v) = self.mab_meas.take() {
            // the feedforward supplies the series draw at the measured voltage
            self.mab.regulate(&v, &[f64::INFINITY; 3]);
        }

        let rot = self.rotor(self.t_now);
        let v1 = self.v1_dq();
        let theta = self.omega * self.t_now;
        let dq = |z: Complex64| DqSample::new(z.re, z.im, theta);

        if self.active {
            for k in 0..3 {
                let f = (rot * self.frame[k]).conj();
                let out = self.series_ctl[k].series_voltage_setpoint(
                    dq(self.i_ref[k]),
                    dq(self.line[k].current * f),
                    dq(v1[k]),
                    dq(self.v2_env[k] * f),
                    self.links[k].voltage(),
                );
                self.vs_pending[k] = out.voltage.complex();
                self.series_sat[k] = out.saturated;
            }
        } else {
            self.vs_pending = [Complex64::new(0.0, 0.0); 3];
            self.series_sat = [false; 3];
        }

        let u_peak_sum: f64 = self.v1_env.iter().map(|v| v.norm()).sum();
        let v_bus = self.bus.voltage();
        let i_d = self
            .bus_ctl
            .dc_bus_outer_loop(v_bus, self.s.afe.v_dc_ref, self.p0_mean.mean(), u_peak_sum);
        self.afe_sat = false;
        for k in 0..3 {
            let f = (rot * self.frame[k]).conj();
            let out = self.afe_ctl[k].afe_voltage_command(
                DqSample::new(-i_d, 0.0, theta),
                dq(self.afe_line[k].current * f),
                dq(v1[k]),
                0.5 * v_bus,
            );
            self.afe_pending[k] = out.voltage.complex();
            self.afe_sat |= out.saturated;
        }

        let mut v = vec![v_bus];
        v.extend(self.links.iter().map(DcBus::voltage));
        self.mab_meas = Some(v);
        Ok(())
    }

    fn step(&mut self, k: usize) -> Result<()> {
        let h = self.h;
        let t0 = self.time(k);
        let t1 = self.time(k + 1);
        self.t_now = t0;
        self.apply_events(t0)?;
        if k.is_multiple_of(self.n_ctrl) {
            self.control()?;
        }
        // a bridge cannot put out more than its link holds right now
        for ph in 0..3 {
            let (m, v) = (self.vs_cmd[ph].norm(), self.links[ph].voltage().max(0.0));
            if m > v {
                self.vs_cmd[ph] *= v / m;
            }
        }
        let r0 = self.rotor(t0);
        let r1 = self.rotor(t1);

        // stiff sources at the end of the step
        let mut v1_next = [Complex64::new(0.0, 0.0); 3];
        for (ph, next) in v1_next.iter_mut().enumerate() {
            let a = SQRT_2 * self.v1_mag[ph] * (r1 * self.frame[ph]).re;
            *next = Complex64::new(a, self.v1_delay[ph].push(a));
        }
        let mut v2_next = self.v2_env;
        if let Branch::Feeder { delay, v2 } = &mut self.branch {
            for ph in 0..3 {
                let a = SQRT_2 * (v2[ph].complex() * r1).re;
                v2_next[ph] = Complex64::new(a, delay[ph].push(a));
            }
        }

        let mut ps = [0.0; 3];
        // draw known at the start of the step: commanded injection over the step times measured current
        let mut ps_start = [0.0; 3];
        let mut p_conv = 0.0;
        for ph in 0..3 {
            let (f0, f1) = (r0 * self.frame[ph], r1 * self.frame[ph]);
            let vs0 = self.vs_cmd[ph] * f0;
            let vs1 = self.vs_cmd[ph] * f1;

            // series line
            let i0 = self.line[ph].current;
            ps_start[ph] = 0.5 * (vs0.re + vs1.re) * i0.re;
            let (d0, d1) = match self.branch {
                Branch::Feeder { .. } => (
                    self.v1_env[ph] + vs0 - self.v2_env[ph],
                    v1_next[ph] + vs1 - v2_next[ph],
                ),
                Branch::Load { .. } => (self.v1_env[ph] + vs0, v1_next[ph] + vs1),
            };
            self.line[ph].step(d0, d1, h);
            let i1 = self.line[ph].current;
            if let Branch::Load { r_l, l_l } = self.branch {
                v2_next[ph] = i1 * r_l + self.line[ph].derivative(d1) * l_l;
            }
            let ib = 0.5 * (i0.re + i1.re);
            ps[ph] = 0.5 * (vs0.re + vs1.re) * ib;
            self.audit.feeder1 += h * 0.5 * (self.v1_env[ph].re + v1_next[ph].re) * ib;
            self.audit.feeder2 += h * 0.5 * (self.v2_env[ph].re + v2_next[ph].re) * ib;
            self.audit.series_injection += h * ps[ph];
            self.audit.line_resistive += h * self.line_r_audit * ib * ib;
            self.audit.line_inductor_delta += 0.5 * self.line_l_audit * (i1.re * i1.re - i0.re * i0.re);

            // AFE filter, inverter convention
            let a0 = self.afe_line[ph].current;
            let (u0, u1) = (self.afe_cmd[ph] * f0, self.afe_cmd[ph] * f1);
            self.afe_line[ph].step(u0 - self.v1_env[ph], u1 - v1_next[ph], h);
            let a1 = self.afe_line[ph].current;
            let ab = 0.5 * (a0.re + a1.re);
            p_conv += 0.5 * (u0.re + u1.re) * ab;
            self.audit.afe_grid -= h * 0.5 * (self.v1_env[ph].re + v1_next[ph].re) * ab;
            self.audit.afe_filter_resistive += h * self.afe_line[ph].resistance * ab * ab;
            self.audit.afe_inductor_delta += 0.5 * self.afe_line[ph].inductance * (a1.re * a1.re - a0.re * a0.re);

            if !(i1.re.is_finite() && a1.re.is_finite()) {
                return Err(Error::domain(format!("non-finite current in phase {ph}")));
            }
        }

        // MAB: phases follow the series draw at the start of the step
        let mut volts = vec![self.bus.voltage()];
        volts.extend(self.links.iter().map(DcBus::voltage));
        self.mab.update_feedforward(&volts, &ps_start)?;
        self.mab_sat = self.mab.saturated();
        self.mab_saturated_ever |= self.mab_sat;
        self.phases = self.mab.phases();
        let p = self.coeffs.powers(&volts, &self.phases)?;
        let p0 = p[0];
        for ph in 0..3 {
            let before = self.links[ph].energy();
            self.links[ph]
                .apply(-p[ph + 1] - ps[ph], h)
                .map_err(|e| Error::domain(format!("series link {ph}: {e}")))?;
            self.audit.series_link_delta += self.links[ph].energy() - before;
            self.audit.mab_secondary -= h * p[ph + 1];
        }
        self.audit.mab_primary += h * p0;
        let before = self.bus.energy();
        self.bus
            .apply(-p_conv - p0, h)
            .map_err(|e| Error::domain(format!("AFE bus: {e}")))?;
        self.audit.afe_bus_delta += self.bus.energy() - before;

        self.p0_mean.push(p0);

        self.v1_env = v1_next;
        self.v2_env = v2_next;
        self.t_now = t1;

        for ph in 0..3 {
            let f1 = r1 * self.frame[ph];
            self.m_v1[ph].push(self.v1_env[ph].re, r1);
            self.m_v2[ph].push(self.v2_env[ph].re, r1);
            self.m_i[ph].push(self.line[ph].current.re, r1);
            self.m_vs[ph].push((self.vs_cmd[ph] * f1).re, r1);
        }
        Ok(())
    }

    fn record(&self) -> TimeSeriesRecord {
        let rot = self.rotor(self.t_now);
        let per = |f: &dyn Fn(usize) -> f64| [f(0), f(1), f(2)];
        let s = |a: &SlidingPhasor, b: &SlidingPhasor| a.phasor() * b.phasor().conj();
        TimeSeriesRecord {
            time: self.t_now,
            v1: per(&|k| self.v1_env[k].re),
            v2: per(&|k| self.v2_env[k].re),
            i: per(&|k| self.line[k].current.re),
            vs: per(&|k| (self.vs_cmd[k] * rot * self.frame[k]).re),
            v1_rms: per(&|k| self.m_v1[k].phasor().norm()),
            v2_rms: per(&|k| self.m_v2[k].phasor().norm()),
            i_rms: per(&|k| self.m_i[k].phasor().norm()),
            vs_rms: per(&|k| self.m_vs[k].phasor().norm()),
            p1: per(&|k| s(&self.m_v1[k], &self.m_i[k]).re),
            q1: per(&|k| s(&self.m_v1[k], &self.m_i[k]).im),
            p2: per(&|k| s(&self.m_v2[k], &self.m_i[k]).re),
            q2: per(&|k| s(&self.m_v2[k], &self.m_i[k]).im),
            ps: per(&|k| s(&self.m_vs[k], &self.m_i[k]).re),
            qs: per(&|k| s(&self.m_vs[k], &self.m_i[k]).im),
            v_dc: per(&|k| self.links[k].voltage()),
            v_bus: self.bus.voltage(),
            phi: per(&|k| self.phases[k + 1]),
            series_saturated: self.series_sat,
            afe_saturated: self.afe_sat,
            mab_saturated: self.mab_sat,
            active: self.active,
        }
    }
}
