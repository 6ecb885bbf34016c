#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use pfcsim::io::CsvSink;
use pfcsim::sim::{interval_metrics, run_scenario, IntervalMetrics, Scenario, SimResult, TimeSeriesRecord, TAIL};
use sha2::{Digest, Sha256};

/// Preset runs are shared by every test in one binary.
pub fn preset(name: &str) -> &'static SimResult {
    static CACHE: OnceLock<Mutex<HashMap<String, &'static SimResult>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = cache.lock().unwrap().get(name) {
        return r;
    }
    let r = run_scenario(&Scenario::preset(name).unwrap()).unwrap();
    assert!(r.fault().is_none(), "{name} faulted: {:?}", r.fault());
    let r: &'static SimResult = Box::leak(Box::new(r));
    cache.lock().unwrap().insert(name.into(), r);
    r
}

/// Metrics over the last [`TAIL`] seconds before `end`.
pub fn tail(records: &[TimeSeriesRecord], end: f64) -> IntervalMetrics {
    interval_metrics(records, "tail", end - TAIL, end).expect("records in the tail window")
}

pub fn csv_bytes(records: &[TimeSeriesRecord]) -> Vec<u8> {
    let mut sink = CsvSink::new(Vec::new()).unwrap();
    for r in records {
        sink.push(r).unwrap();
    }
    sink.finish().unwrap()
}

pub fn sha256(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Largest change of tail P and Q between two runs, relative to the tail
/// apparent power of the first.
pub fn tail_shift(a: &IntervalMetrics, b: &IntervalMetrics) -> f64 {
    let s = a.p1.hypot(a.q1).max(a.p2.hypot(a.q2));
    [a.p1 - b.p1, a.q1 - b.q1, a.p2 - b.p2, a.q2 - b.q2]
        .iter()
        .fold(0.0f64, |m, d| m.max(d.abs()))
        / s
}
