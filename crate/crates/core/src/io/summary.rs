use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::{pq_load_operating_region, two_feeder_operating_region};
use crate::sim::{
    mode_at, predict_steady_state, steady_state_check, tail_metrics, FaultRecord, IntervalMetrics, PowerAudit,
    Scenario, SetpointCheck, Setpoint, SimResult, SteadyStateReport, Termination, Verdict,
};

pub const SUMMARY_VERSION: u32 = 1;

/// JSON schema every summary validates against.
pub const SUMMARY_SCHEMA: &str = include_str!("../../schema/summary.schema.json");

/// Tolerance of the tail-versus-phasor comparison.
const STEADY_TOLERANCE: f64 = 0.01;

/// Operating-area verdict for one phase.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionVerdict {
    pub phase: String,
    /// `load` or `feeders`.
    pub kind: String,
    pub load_angle_limit_deg: f64,
    pub amplitude_limit: f64,
    /// Load angle in degrees for `load`, `V1·cos Δθ − V2` in volts for `feeders`.
    pub operating_value: f64,
    pub feasible: bool,
}

/// Region verdict per phase for the bypass operating point of `s`.
pub fn region_verdicts(s: &Scenario) -> Result<Vec<RegionVerdict>> {
    let v1 = s.feeder1.phasors();
    let mut out = Vec::new();
    for k in 0..3 {
        let phase = ["a", "b", "c"][k].to_string();
        let v1k = v1[k];
        if v1k.magnitude() == 0.0 {
            continue;
        }
        let v = match &s.termination {
            Termination::Load(l) => {
                let r = pq_load_operating_region(s.series.v_dc, v1k.magnitude())?;
                RegionVerdict {
                    phase,
                    kind: "load".into(),
                    load_angle_limit_deg: r.load_angle_limit.to_degrees(),
                    amplitude_limit: r.amplitude_limit,
                    operating_value: l.q.atan2(l.p).to_degrees(),
                    feasible: r.admits_load(l.p, l.q),
                }
            }
            Termination::Feeder(f) => {
                let v2k = f.phasors()[k];
                if v2k.magnitude() == 0.0 {
                    continue;
                }
                let d = v1k.angle() - v2k.angle();
                let r = two_feeder_operating_region(s.series.v_dc, v1k.magnitude(), v2k.magnitude(), d)?;
                RegionVerdict {
                    phase,
                    kind: "feeders".into(),
                    load_angle_limit_deg: r.region.load_angle_limit.to_degrees(),
                    amplitude_limit: r.region.amplitude_limit,
                    operating_value: r.amplitude_difference,
                    feasible: r.feasible,
                }
            }
        };
        out.push(v);
    }
    Ok(out)
}

/// Tail comparison against the phasor model of the mode then in force.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteadyStateEntry {
    pub label: String,
    pub setpoint: Option<Setpoint>,
    /// The setpoint needs more than the modulation limit, so the modules
    /// are expected to saturate and the prediction does not apply.
    pub expected_bypass: bool,
    pub report: SteadyStateReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditInterval {
    pub start: f64,
    pub end: f64,
    pub audit: PowerAudit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub schema_version: u32,
    pub scenario: String,
    pub description: String,
    pub duration: f64,
    pub step: f64,
    pub control_period: f64,
    pub record_interval: f64,
    pub steps: usize,
    pub end_time: f64,
    pub records: usize,
    pub healthy: bool,
    pub fault: Option<FaultRecord>,
    pub warnings: Vec<String>,
    pub setpoint_checks: Vec<SetpointCheck>,
    pub regions: Vec<RegionVerdict>,
    pub intervals: Vec<IntervalMetrics>,
    pub steady_state: Vec<SteadyStateEntry>,
    pub audit: PowerAudit,
    /// Ledger of each stretch between events.
    pub audit_intervals: Vec<AuditInterval>,
    pub v_dc_min: f64,
    pub v_dc_max: f64,
    pub v_bus_min: f64,
    pub v_bus_max: f64,
}

impl Summary {
    pub fn from_result(r: &SimResult) -> Result<Self> {
        let s = &r.scenario;
        let o = &r.outcome;
        let intervals = tail_metrics(s, &r.records);
        let mut steady = Vec::new();
        for m in &intervals {
            let sp = mode_at(s, m.end + 1e-9);
            let pred = predict_steady_state(s, sp.as_ref())?;
            let tail: Vec<_> = r
                .records
                .iter()
                .filter(|x| x.time >= m.start - 1e-9 && x.time <= m.end + 1e-9)
                .cloned()
                .collect();
            let mut report = steady_state_check(&tail, &pred, STEADY_TOLERANCE);
            let expected_bypass = sp.is_some_and(|sp| o.checks.iter().any(|c| c.setpoint == sp && !c.feasible));
            if expected_bypass {
                report.verdict = Verdict::Inconclusive;
            }
            steady.push(SteadyStateEntry {
                label: m.label.clone(),
                setpoint: sp,
                expected_bypass,
                report,
            });
        }

        let mut audit_intervals = Vec::new();
        let mut prev = (0.0, PowerAudit::default());
        for mark in &o.audit_marks {
            audit_intervals.push(AuditInterval {
                start: prev.0,
                end: mark.time,
                audit: mark.audit.since(&prev.1),
            });
            prev = (mark.time, mark.audit.clone());
        }
        audit_intervals.push(AuditInterval {
            start: prev.0,
            end: o.end_time,
            audit: o.audit.since(&prev.1),
        });

        let fold = |f: &dyn Fn(&crate::sim::TimeSeriesRecord) -> Vec<f64>, min: bool| {
            let it = r.records.iter().flat_map(f);
            if min {
                it.fold(f64::INFINITY, f64::min)
            } else {
                it.fold(f64::NEG_INFINITY, f64::max)
            }
        };
        Ok(Summary {
            schema_version: SUMMARY_VERSION,
            scenario: s.name.clone(),
            description: s.description.clone(),
            duration: s.duration,
            step: s.step,
            control_period: s.control_period,
            record_interval: s.record_interval,
            steps: o.steps,
            end_time: o.end_time,
            records: r.records.len(),
            healthy: o.fault.is_none(),
            fault: o.fault.clone(),
            warnings: o.warnings.clone(),
            setpoint_checks: o.checks.clone(),
            regions: region_verdicts(s)?,
            intervals,
            steady_state: steady,
            audit: o.audit.clone(),
            audit_intervals,
            v_dc_min: fold(&|x| x.v_dc.to_vec(), true),
            v_dc_max: fold(&|x| x.v_dc.to_vec(), false),
            v_bus_min: fold(&|x| vec![x.v_bus], true),
            v_bus_max: fold(&|x| vec![x.v_bus], false),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }
}
