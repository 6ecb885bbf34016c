//! Time-domain simulation of the full router: series modules, MAB and AFE.

mod analysis;
mod engine;
mod measure;
mod record;
mod scenario;

pub use engine::{
    predict_steady_state, reference_current, run_scenario, run_scenario_with, FaultRecord, PhasorPrediction,
    SetpointCheck, SimOutcome, SimResult,
};
pub use analysis::{
    interval_metrics, mode_at, steady_state_check, tail_before, tail_metrics, IntervalMetrics, SteadyStateReport, Verdict,
    SETTLED_VARIATION, TAIL,
};
pub use measure::{SlidingMean, SlidingPhasor};
pub use record::{AuditMark, PowerAudit, TimeSeriesRecord};
pub use scenario::*;
