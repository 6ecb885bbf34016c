//! Tail metrics and cross-checks against the phasor model.

use serde::Serialize;

use super::engine::PhasorPrediction;
use super::record::TimeSeriesRecord;
use super::scenario::{Action, Scenario, Setpoint};

/// Length of the averaging tail: five grid cycles at 50 Hz.
pub const TAIL: f64 = 0.1;

/// rms variation below which a tail counts as settled.
pub const SETTLED_VARIATION: f64 = 0.005;

/// Averages over one window of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalMetrics {
    pub label: String,
    pub start: f64,
    pub end: f64,
    pub p1: f64,
    pub q1: f64,
    pub p2: f64,
    pub q2: f64,
    pub i_rms: [f64; 3],
    pub vs_rms: [f64; 3],
    /// (max − min)/mean of the phase currents.
    pub current_spread: f64,
    /// Series apparent power over line apparent power, per phase.
    pub partial_power: [f64; 3],
    pub v_dc_min: f64,
    pub v_dc_max: f64,
    /// Largest relative peak-to-peak of a phase rms current over the window.
    pub rms_variation: f64,
    pub settled: bool,
}

fn window(records: &[TimeSeriesRecord], start: f64, end: f64) -> &[TimeSeriesRecord] {
    let eps = 1e-9;
    let a = records.partition_point(|r| r.time < start - eps);
    let b = records.partition_point(|r| r.time <= end + eps);
    &records[a..b.max(a)]
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

fn variation(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    let min = xs.clone().fold(f64::INFINITY, f64::min);
    let m = mean(xs);
    if m.abs() < 1e-9 {
        if max - min < 1e-9 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (max - min) / m.abs()
    }
}

/// Metrics over `[start, end]`, or `None` when no record falls inside.
pub fn interval_metrics(records: &[TimeSeriesRecord], label: &str, start: f64, end: f64) -> Option<IntervalMetrics> {
    let w = window(records, start, end);
    if w.is_empty() {
        return None;
    }
    let per = |f: &dyn Fn(&TimeSeriesRecord, usize) -> f64| [0, 1, 2].map(|k| mean(w.iter().map(|r| f(r, k))));
    let i_rms = per(&|r, k| r.i_rms[k]);
    let vs_rms = per(&|r, k| r.vs_rms[k]);
    let v1_rms = per(&|r, k| r.v1_rms[k]);
    let i_mean = mean(i_rms.iter().copied());
    let spread = if i_mean > 1e-6 {
        (i_rms.iter().cloned().fold(f64::MIN, f64::max) - i_rms.iter().cloned().fold(f64::MAX, f64::min)) / i_mean
    } else {
        0.0
    };
    let partial = [0, 1, 2].map(|k| if v1_rms[k] > 0.0 { vs_rms[k] / v1_rms[k] } else { 0.0 });
    let rms_variation = (0..3)
        .map(|k| variation(w.iter().map(move |r| r.i_rms[k])))
        .fold(0.0, f64::max);
    Some(IntervalMetrics {
        label: label.into(),
        start,
        end,
        p1: mean(w.iter().map(TimeSeriesRecord::p1_total)),
        q1: mean(w.iter().map(TimeSeriesRecord::q1_total)),
        p2: mean(w.iter().map(TimeSeriesRecord::p2_total)),
        q2: mean(w.iter().map(TimeSeriesRecord::q2_total)),
        i_rms,
        vs_rms,
        current_spread: spread,
        partial_power: partial,
        v_dc_min: w.iter().flat_map(|r| r.v_dc).fold(f64::INFINITY, f64::min),
        v_dc_max: w.iter().flat_map(|r| r.v_dc).fold(f64::NEG_INFINITY, f64::max),
        rms_variation,
        settled: rms_variation < SETTLED_VARIATION,
    })
}

/// Tail metrics before each event and at the end of the run.
pub fn tail_metrics(s: &Scenario, records: &[TimeSeriesRecord]) -> Vec<IntervalMetrics> {
    let Some(last) = records.last() else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for e in &s.events {
        if e.time <= last.time && e.time >= TAIL {
            let label = format!("before {:?} at {} s", e.action, e.time).to_lowercase();
            out.extend(interval_metrics(records, &label, e.time - TAIL, e.time));
        }
    }
    out.extend(interval_metrics(records, "end", (last.time - TAIL).max(0.0), last.time));
    out
}

/// Setpoint in force just before `t`, `None` while bypassed.
pub fn mode_at(s: &Scenario, t: f64) -> Option<Setpoint> {
    let mut active = false;
    let mut sp = s.setpoint;
    for e in s.events.iter().take_while(|e| e.time < t - 1e-9) {
        match e.action {
            Action::Activate => active = true,
            Action::Bypass => active = false,
            Action::Retarget => {}
        }
        if let Some(x) = e.setpoint {
            sp = x;
        }
    }
    active.then_some(sp)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// Time-domain tail against phasor algebra. Power errors are relative to the
/// predicted three-phase |S|, current errors to each predicted |I|.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteadyStateReport {
    pub verdict: Verdict,
    pub settled: bool,
    pub p_error: f64,
    pub q_error: f64,
    pub i_error: [f64; 3],
    pub tolerance: f64,
}

impl SteadyStateReport {
    pub fn worst(&self) -> f64 {
        self.i_error.iter().fold(self.p_error.max(self.q_error), |a, &b| a.max(b))
    }
}

fn relative(err: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        err.abs() / scale
    } else {
        err.abs()
    }
}

/// Compares the window `tail` (already settled or not) with `pred`.
pub fn steady_state_check(tail: &[TimeSeriesRecord], pred: &PhasorPrediction, tolerance: f64) -> SteadyStateReport {
    let Some(m) = tail
        .first()
        .zip(tail.last())
        .and_then(|(a, b)| interval_metrics(tail, "tail", a.time, b.time))
    else {
        return SteadyStateReport {
            verdict: Verdict::Inconclusive,
            settled: false,
            p_error: f64::NAN,
            q_error: f64::NAN,
            i_error: [f64::NAN; 3],
            tolerance,
        };
    };
    let s1: num_complex::Complex64 = (0..3).map(|k| pred.s1(k)).sum();
    let p_error = relative(m.p1 - s1.re, s1.norm());
    let q_error = relative(m.q1 - s1.im, s1.norm());
    let i_error = [0, 1, 2].map(|k| {
        let want = pred.current[k].magnitude();
        relative(m.i_rms[k] - want, want)
    });
    let mut report = SteadyStateReport {
        verdict: Verdict::Inconclusive,
        settled: m.settled,
        p_error,
        q_error,
        i_error,
        tolerance,
    };
    if m.settled {
        report.verdict = if report.worst() <= tolerance { Verdict::Pass } else { Verdict::Fail };
    }
    report
}

/// Records in the last [`TAIL`] seconds before `end`.
pub fn tail_before(records: &[TimeSeriesRecord], end: f64) -> &[TimeSeriesRecord] {
    window(records, end - TAIL, end)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(t: f64, i: f64) -> TimeSeriesRecord {
        TimeSeriesRecord {
            time: t,
            v1: [0.0; 3],
            v2: [0.0; 3],
            i: [0.0; 3],
            vs: [0.0; 3],
            v1_rms: [230.0; 3],
            v2_rms: [230.0; 3],
            i_rms: [i, i, 1.01 * i],
            vs_rms: [23.0; 3],
            p1: [100.0; 3],
            q1: [0.0; 3],
            p2: [0.0; 3],
            q2: [0.0; 3],
            ps: [0.0; 3],
            qs: [0.0; 3],
            v_dc: [50.0, 49.0, 51.0],
            v_bus: 800.0,
            phi: [0.0; 3],
            series_saturated: [false; 3],
            afe_saturated: false,
            mab_saturated: false,
            active: true,
        }
    }

    #[test]
    fn window_metrics() {
        let rs: Vec<_> = (0..=10).map(|k| rec(k as f64 * 0.01, 10.0)).collect();
        let m = interval_metrics(&rs, "x", 0.05, 0.1).unwrap();
        assert_eq!(m.p1, 300.0);
        assert!((m.current_spread - 0.1 / 10.0333).abs() < 1e-4);
        assert!((m.partial_power[0] - 0.1).abs() < 1e-12);
        assert_eq!((m.v_dc_min, m.v_dc_max), (49.0, 51.0));
        assert!(m.settled);
        assert!(interval_metrics(&rs, "x", 2.0, 3.0).is_none());
    }

    #[test]
    fn mode_follows_events() {
        let s = crate::sim::case2();
        assert_eq!(mode_at(&s, 0.3), None);
        assert_eq!(mode_at(&s, 0.6), Some(Setpoint::Power { p: 5e3, q: 0.0 }));
        assert_eq!(mode_at(&s, 1.0), Some(Setpoint::Power { p: -5e3, q: 0.0 }));
    }

    #[test]
    fn drifting_tail_is_inconclusive() {
        let rs: Vec<_> = (0..=10).map(|k| rec(k as f64 * 0.01, 10.0 + k as f64)).collect();
        let pred = PhasorPrediction {
            current: [crate::Phasor::ZERO; 3],
            vs: [crate::Phasor::ZERO; 3],
            v1: [crate::Phasor::ZERO; 3],
            v2: [crate::Phasor::ZERO; 3],
        };
        assert_eq!(steady_state_check(&rs, &pred, 0.01).verdict, Verdict::Inconclusive);
        assert_eq!(steady_state_check(&[], &pred, 0.01).verdict, Verdict::Inconclusive);
    }
}
