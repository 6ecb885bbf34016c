use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::afe::AfeParams;
use crate::error::{Error, Result};
use crate::mab::{MabControlParams, MabMagnetics};
use crate::phasor::{Impedance, Phasor, ThreePhaseSet};
use crate::series::SeriesModuleParams;

fn default_step() -> f64 {
    10e-6
}
fn default_control_period() -> f64 {
    100e-6
}
fn default_record_interval() -> f64 {
    100e-6
}
fn default_provenance() -> String {
    "user".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Nominal line-to-line rms voltage.
    pub v_ll: f64,
    pub frequency: f64,
    #[serde(default = "default_provenance")]
    pub provenance: String,
}

/// Per-phase rms magnitudes; phase a sits at `angle_deg`, b and c follow at
/// −120° and +120°.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeederSpec {
    pub magnitudes: [f64; 3],
    #[serde(default)]
    pub angle_deg: f64,
    #[serde(default = "default_provenance")]
    pub provenance: String,
}

impl FeederSpec {
    pub fn balanced(magnitude: f64, angle_deg: f64, provenance: &str) -> Self {
        FeederSpec {
            magnitudes: [magnitude; 3],
            angle_deg,
            provenance: provenance.into(),
        }
    }

    pub fn phasors(&self) -> ThreePhaseSet<Phasor> {
        ThreePhaseSet::from_magnitudes(self.magnitudes, self.angle_deg.to_radians())
    }
}

/// Constant-impedance load sized from its three-phase rating at `v_nominal`
/// (phase rms).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadSpec {
    pub p: f64,
    pub q: f64,
    pub v_nominal: f64,
    #[serde(default = "default_provenance")]
    pub provenance: String,
}

impl LoadSpec {
    pub fn impedance(&self, omega: f64) -> Result<Impedance> {
        Impedance::from_power(self.p / 3.0, self.q / 3.0, self.v_nominal, omega)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    /// A second stiff feeder.
    Feeder(FeederSpec),
    /// A P-Q load fed through the modules.
    Load(LoadSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineSpec {
    pub resistance: f64,
    pub inductance: f64,
    #[serde(default = "default_provenance")]
    pub provenance: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesSpec {
    pub v_dc: f64,
    pub l_s: f64,
    pub r_s: f64,
    /// Link voltage at t = 0.
    pub precharge: f64,
    #[serde(default = "default_provenance")]
    pub provenance: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AfeSpec {
    pub l_f: f64,
    pub r_f: f64,
    /// Capacitance of each half of the split bus.
    pub c_dc: f64,
    pub v_dc_ref: f64,
    pub phase_margin_deg: f64,
    #[serde(default = "default_provenance")]
    pub provenance: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MabSpec {
    /// Primary-referred delta inductance between any two windings.
    pub delta_inductance: f64,
    pub magnetizing: f64,
    pub turns: [f64; 4],
    pub f_sw: f64,
    pub v_ref: f64,
    pub capacitance: f64,
    pub t_d: f64,
    pub phase_margin_deg: f64,
    pub decoupling: bool,
    #[serde(default = "default_provenance")]
    pub provenance: String,
}

/// Regulation target of the series modules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Setpoint {
    /// Line current per phase, rms, in the frame of that phase's feeder-1
    /// voltage.
    Current { d: f64, q: f64 },
    /// Power per phase delivered into feeder 2.
    Power { p: f64, q: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Bypass,
    Activate,
    Retarget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Event {
    pub time: f64,
    pub action: Action,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub setpoint: Option<Setpoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub duration: f64,
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default = "default_control_period")]
    pub control_period: f64,
    #[serde(default = "default_record_interval")]
    pub record_interval: f64,
    pub grid: GridSpec,
    pub feeder1: FeederSpec,
    pub termination: Termination,
    /// Line between feeder 1 and the modules. Absent for load cases, where
    /// the feeder is stiff at the module terminals.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line: Option<LineSpec>,
    pub series: SeriesSpec,
    pub afe: AfeSpec,
    pub mab: MabSpec,
    /// Target in force until the first retarget event.
    pub setpoint: Setpoint,
    #[serde(default)]
    pub events: Vec<Event>,
}

pub const PRESETS: [&str; 5] = ["case1", "case2", "case3", "case4", "bench"];

fn ratio_steps(total: f64, step: f64) -> Option<usize> {
    let n = total / step;
    let r = n.round();
    if r >= 1.0 && (n - r).abs() <= 1e-6 * r {
        Some(r as usize)
    } else {
        None
    }
}

impl Scenario {
    pub fn omega(&self) -> f64 {
        TAU * self.grid.frequency
    }

    pub fn v_phase_nominal(&self) -> f64 {
        self.grid.v_ll / 3f64.sqrt()
    }

    pub fn total_steps(&self) -> usize {
        (self.duration / self.step).round() as usize
    }

    pub fn steps_per_control(&self) -> usize {
        ratio_steps(self.control_period, self.step).unwrap_or(1)
    }

    pub fn steps_per_record(&self) -> usize {
        ratio_steps(self.record_interval, self.step).unwrap_or(1)
    }

    pub fn steps_per_cycle(&self) -> usize {
        ratio_steps(1.0 / self.grid.frequency, self.step).unwrap_or(1)
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |m: String| Err(Error::Config(m));
        if !(self.duration > 0.0) {
            return cfg(format!("duration must be > 0, got {}", self.duration));
        }
        if !(self.step > 0.0) {
            return cfg(format!("step must be > 0, got {}", self.step));
        }
        if !(self.grid.frequency > 0.0) || !(self.grid.v_ll > 0.0) {
            return cfg("grid.v_ll and grid.frequency must be > 0".into());
        }
        if self.step > self.control_period {
            return cfg(format!("step {} exceeds control_period {}", self.step, self.control_period));
        }
        if ratio_steps(self.control_period, self.step).is_none() {
            return cfg("control_period must be a whole number of steps".into());
        }
        if ratio_steps(self.record_interval, self.step).is_none() {
            return cfg("record_interval must be a whole number of steps".into());
        }
        if ratio_steps(0.25 / self.grid.frequency, self.step).is_none() {
            return cfg("a quarter grid period must be a whole number of steps".into());
        }
        if self.feeder1.magnitudes.iter().any(|m| !(*m >= 0.0)) {
            return cfg("feeder1.magnitudes must be >= 0".into());
        }
        match &self.termination {
            Termination::Feeder(f) => {
                if f.magnitudes.iter().any(|m| !(*m >= 0.0)) {
                    return cfg("termination.magnitudes must be >= 0".into());
                }
                if self.line.is_none() {
                    return cfg("a feeder termination needs a [line] block".into());
                }
            }
            Termination::Load(l) => {
                if !(l.p > 0.0) || !(l.v_nominal > 0.0) {
                    return cfg("termination load needs p > 0 and v_nominal > 0".into());
                }
            }
        }
        if let Some(l) = &self.line {
            if !(l.resistance >= 0.0) || !(l.inductance >= 0.0) {
                return cfg("line resistance and inductance must be >= 0".into());
            }
        }
        let mut last = 0.0;
        for (k, e) in self.events.iter().enumerate() {
            if !(e.time >= last) || e.time > self.duration {
                return cfg(format!("events[{k}] at {} is out of order or beyond the duration", e.time));
            }
            last = e.time;
            if e.action == Action::Retarget && e.setpoint.is_none() {
                return cfg(format!("events[{k}]: retarget needs a setpoint"));
            }
        }
        let setpoints = std::iter::once(&self.setpoint).chain(self.events.iter().filter_map(|e| e.setpoint.as_ref()));
        for s in setpoints {
            if matches!(s, Setpoint::Power { .. }) && matches!(self.termination, Termination::Load(_)) {
                return cfg("power setpoints need a feeder termination".into());
            }
        }
        if !(self.series.precharge > 0.0) {
            return cfg("series.precharge must be > 0".into());
        }
        self.series_params()?;
        self.afe_params().validate()?;
        self.mab_magnetics()?;
        Ok(())
    }

    /// Loop impedance the series regulator is tuned for.
    pub fn series_params(&self) -> Result<SeriesModuleParams> {
        let w = self.omega();
        let s = &self.series;
        let (r, l) = match &self.line {
            Some(line) if matches!(self.termination, Termination::Feeder(_)) => {
                (line.resistance + s.r_s, line.inductance + s.l_s)
            }
            _ => (s.r_s, s.l_s),
        };
        SeriesModuleParams::new(s.v_dc, s.l_s, s.r_s, Impedance::from_rl(r, l, w)?)
    }

    /// Total series impedance between feeder 1 and the termination.
    pub fn branch_impedance(&self) -> Result<Impedance> {
        let w = self.omega();
        match &self.termination {
            Termination::Feeder(_) => self.series_params().map(|p| p.line),
            Termination::Load(load) => {
                let zs = Impedance::from_rl(self.series.r_s, self.series.l_s, w)?;
                Ok(zs.series(&load.impedance(w)?))
            }
        }
    }

    pub fn afe_params(&self) -> AfeParams {
        AfeParams {
            l_f: self.afe.l_f,
            r_f: self.afe.r_f,
            t_s: self.control_period,
            phase_margin: self.afe.phase_margin_deg.to_radians(),
            v_dc_ref: self.afe.v_dc_ref,
            c_dc: self.afe.c_dc,
            omega: self.omega(),
        }
    }

    pub fn mab_magnetics(&self) -> Result<MabMagnetics> {
        let m = &self.mab;
        MabMagnetics::symmetric(m.delta_inductance, m.magnetizing, m.turns.to_vec(), m.f_sw)
    }

    pub fn mab_control(&self) -> MabControlParams {
        MabControlParams {
            v_ref: self.mab.v_ref,
            capacitance: self.mab.capacitance,
            t_s: self.control_period,
            t_d: self.mab.t_d,
            phase_margin: self.mab.phase_margin_deg.to_radians(),
            decoupling: self.mab.decoupling,
        }
    }

    pub fn preset(name: &str) -> Result<Scenario> {
        match name {
            "case1" => Ok(case1()),
            "case2" => Ok(case2()),
            "case3" => Ok(case3()),
            "case4" => Ok(case4()),
            "bench" => Ok(bench()),
            other => Err(Error::Config(format!(
                "unknown preset `{other}` (known: {})",
                PRESETS.join(", ")
            ))),
        }
    }
}

const V_PHASE: f64 = 230.940_107_675_850_3;

fn base(name: &str, description: &str) -> Scenario {
    Scenario {
        name: name.into(),
        description: description.into(),
        duration: 1.0,
        step: default_step(),
        control_period: default_control_period(),
        record_interval: default_record_interval(),
        grid: GridSpec {
            v_ll: 400.0,
            frequency: 50.0,
            provenance: "reference".into(),
        },
        feeder1: FeederSpec::balanced(V_PHASE, 0.0, "reference"),
        termination: Termination::Feeder(FeederSpec::balanced(V_PHASE, 0.0, "reference")),
        line: Some(LineSpec {
            resistance: 0.02,
            inductance: 0.05 / (2.0 * PI * 50.0),
            provenance: "reference".into(),
        }),
        series: SeriesSpec {
            v_dc: 50.0,
            l_s: 100e-6,
            r_s: 5e-3,
            precharge: 50.0,
            provenance: "reference; r_s and precharge user".into(),
        },
        afe: AfeSpec {
            l_f: 500e-6,
            r_f: 0.1,
            c_dc: 1e-3,
            v_dc_ref: 800.0,
            phase_margin_deg: 65.0,
            provenance: "reference for v_dc_ref; filter and capacitors user".into(),
        },
        mab: MabSpec {
            delta_inductance: 15e-6,
            magnetizing: 2e-3,
            turns: [16.0, 1.0, 1.0, 1.0],
            f_sw: 100e3,
            v_ref: 50.0,
            capacitance: 200e-6,
            t_d: 150e-6,
            phase_margin_deg: 60.0,
            decoupling: true,
            provenance: "reference; magnetizing inductance user".into(),
        },
        setpoint: Setpoint::Current { d: 0.0, q: 0.0 },
        events: Vec::new(),
    }
}

fn load_case(name: &str, description: &str, feeder: FeederSpec, p: f64, q: f64, at: f64) -> Scenario {
    let mut s = base(name, description);
    s.feeder1 = feeder;
    s.termination = Termination::Load(LoadSpec {
        p,
        q,
        v_nominal: V_PHASE,
        provenance: "reference".into(),
    });
    s.line = None;
    // rated per-phase current of the load at nominal voltage
    let i = (num_complex::Complex64::new(p, q) / 3.0 / V_PHASE).conj();
    s.setpoint = Setpoint::Current { d: i.re, q: i.im };
    s.events = vec![Event {
        time: at,
        action: Action::Activate,
        setpoint: None,
    }];
    s
}

/// Reactive compensation of a 40 kW + j5.621 kVar load.
pub fn case1() -> Scenario {
    let mut s = load_case(
        "case1",
        "P-Q load 40 kW + j5.621 kVar, modules activate at 0.3 s and cancel the feeder reactive power",
        FeederSpec::balanced(V_PHASE, 0.0, "reference"),
        40e3,
        5.621e3,
        0.3,
    );
    // all of the load's active current, none of its reactive current
    if let Setpoint::Current { q, .. } = &mut s.setpoint {
        *q = 0.0;
    }
    s
}

/// Feeders at 400 V and 380 V, in phase.
pub fn case2() -> Scenario {
    let mut s = base(
        "case2",
        "feeder 2 at 380 V: activate at 0.3 s delivering 5 kW per phase, reverse to -5 kW at 0.6 s",
    );
    s.termination = Termination::Feeder(FeederSpec::balanced(380.0 / 3f64.sqrt(), 0.0, "reference"));
    s.setpoint = Setpoint::Power { p: 5e3, q: 0.0 };
    s.events = vec![
        Event {
            time: 0.3,
            action: Action::Activate,
            setpoint: None,
        },
        Event {
            time: 0.6,
            action: Action::Retarget,
            setpoint: Some(Setpoint::Power { p: -5e3, q: 0.0 }),
        },
    ];
    s
}

/// Feeders of equal amplitude with feeder 2 leading by 8°.
pub fn case3() -> Scenario {
    let mut s = base(
        "case3",
        "feeder 2 leads by 8 degrees: bypass flow runs 2 -> 1, modules activate at 0.6 s and push 2 kW + j2 kVar per phase into feeder 2",
    );
    s.termination = Termination::Feeder(FeederSpec::balanced(V_PHASE, 8.0, "reference"));
    s.setpoint = Setpoint::Power { p: 2e3, q: 2e3 };
    s.events = vec![Event {
        time: 0.6,
        action: Action::Activate,
        setpoint: None,
    }];
    s
}

/// Unbalanced 200/230/250 V feeder serving a 30 kW + j4.5 kVar load.
pub fn case4() -> Scenario {
    load_case(
        "case4",
        "unbalanced feeder 200/230/250 V with a 30 kW + j4.5 kVar load, modules balance the phase currents from 0.5 s",
        FeederSpec {
            magnitudes: [200.0, 230.0, 250.0],
            angle_deg: 0.0,
            provenance: "reference".into(),
        },
        30e3,
        4.5e3,
        0.5,
    )
}

/// Laboratory demonstrator: equal feeders through a 40 mΩ / 700 µH line.
pub fn bench() -> Scenario {
    let mut s = base(
        "bench",
        "demonstrator parameters: equal feeders, 5 kW per phase forward from 0.3 s, reversed from 0.6 s",
    );
    s.line = Some(LineSpec {
        resistance: 0.04,
        inductance: 700e-6,
        provenance: "reference".into(),
    });
    s.afe.v_dc_ref = 750.0;
    s.afe.provenance = "reference for v_dc_ref; filter and capacitors user".into();
    s.grid.provenance = "reference".into();
    s.setpoint = Setpoint::Power { p: 5e3, q: 0.0 };
    s.events = vec![
        Event {
            time: 0.3,
            action: Action::Activate,
            setpoint: None,
        },
        Event {
            time: 0.6,
            action: Action::Retarget,
            setpoint: Some(Setpoint::Power { p: -5e3, q: 0.0 }),
        },
    ];
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for name in PRESETS {
            Scenario::preset(name).unwrap().validate().unwrap();
        }
        assert!(Scenario::preset("case9").is_err());
    }

    #[test]
    fn case1_load_impedance() {
        let s = case1();
        let Termination::Load(l) = &s.termination else { panic!() };
        let z = l.impedance(s.omega()).unwrap();
        assert!((z.resistance - 3.9225).abs() < 1e-3);
        assert!((z.reactance - 0.5512).abs() < 1e-3);
        let Setpoint::Current { d, q } = s.setpoint else { panic!() };
        assert!((d - 57.735).abs() < 1e-3 && q == 0.0);
        let Setpoint::Current { q, .. } = case4().setpoint else { panic!() };
        assert!((q + 6.495).abs() < 1e-3);
    }

    #[test]
    fn rejects_unsorted_events() {
        let mut s = case2();
        s.events.swap(0, 1);
        assert!(matches!(s.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn rejects_non_integer_control_ratio() {
        let mut s = case2();
        s.control_period = 25e-6;
        s.step = 10e-6;
        assert!(s.validate().is_err());
    }
}
