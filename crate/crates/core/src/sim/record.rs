use serde::Serialize;

/// One decimated output row. Per-phase arrays are ordered a, b, c.
///
/// `v2` is feeder 2's voltage, or the load terminal voltage in load cases.
/// Powers are one-cycle DFT values: `p1`/`q1` leave feeder 1 into the line,
/// `p2`/`q2` enter feeder 2 (or the load), `ps`/`qs` are injected by the
/// series modules.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSeriesRecord {
    pub time: f64,
    pub v1: [f64; 3],
    pub v2: [f64; 3],
    pub i: [f64; 3],
    pub vs: [f64; 3],
    pub v1_rms: [f64; 3],
    pub v2_rms: [f64; 3],
    pub i_rms: [f64; 3],
    pub vs_rms: [f64; 3],
    pub p1: [f64; 3],
    pub q1: [f64; 3],
    pub p2: [f64; 3],
    pub q2: [f64; 3],
    pub ps: [f64; 3],
    pub qs: [f64; 3],
    pub v_dc: [f64; 3],
    pub v_bus: f64,
    pub phi: [f64; 3],
    pub series_saturated: [bool; 3],
    pub afe_saturated: bool,
    pub mab_saturated: bool,
    pub active: bool,
}

const PHASES: [&str; 3] = ["a", "b", "c"];

impl TimeSeriesRecord {
    /// Column names in output order.
    pub fn columns() -> Vec<String> {
        let mut c = vec!["time".to_string()];
        for group in [
            "v1", "v2", "i", "vs", "v1_rms", "v2_rms", "i_rms", "vs_rms", "p1", "q1", "p2", "q2", "ps", "qs", "v_dc",
        ] {
            c.extend(PHASES.iter().map(|p| format!("{group}_{p}")));
        }
        c.push("v_bus".into());
        c.extend(PHASES.iter().map(|p| format!("phi_{p}")));
        c.extend(PHASES.iter().map(|p| format!("series_sat_{p}")));
        c.extend(["afe_sat", "mab_sat", "active"].map(String::from));
        c
    }

    /// Values matching [`columns`](Self::columns); flags become 0 or 1.
    pub fn values(&self) -> Vec<f64> {
        let mut v = vec![self.time];
        for group in [
            &self.v1,
            &self.v2,
            &self.i,
            &self.vs,
            &self.v1_rms,
            &self.v2_rms,
            &self.i_rms,
            &self.vs_rms,
            &self.p1,
            &self.q1,
            &self.p2,
            &self.q2,
            &self.ps,
            &self.qs,
            &self.v_dc,
        ] {
            v.extend_from_slice(group);
        }
        v.push(self.v_bus);
        v.extend_from_slice(&self.phi);
        v.extend(self.series_saturated.map(|b| b as u8 as f64));
        v.extend([self.afe_saturated, self.mab_saturated, self.active].map(|b| b as u8 as f64));
        v
    }

    pub fn p1_total(&self) -> f64 {
        self.p1.iter().sum()
    }

    pub fn q1_total(&self) -> f64 {
        self.q1.iter().sum()
    }

    pub fn p2_total(&self) -> f64 {
        self.p2.iter().sum()
    }

    pub fn q2_total(&self) -> f64 {
        self.q2.iter().sum()
    }
}

/// Energy ledger of a run, joules. Each `*_imbalance` closes one stage; a
/// lossless averaged model drives all of them to rounding level.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PowerAudit {
    /// Energy leaving feeder 1 into the line.
    pub feeder1: f64,
    /// Energy delivered to feeder 2 or the load.
    pub feeder2: f64,
    /// Energy injected into the line by the series modules.
    pub series_injection: f64,
    pub line_resistive: f64,
    pub line_inductor_delta: f64,
    /// Change of energy stored in the three series dc links.
    pub series_link_delta: f64,
    /// Energy the MAB secondaries delivered into the series links.
    pub mab_secondary: f64,
    /// Energy the MAB primary drew from the AFE bus.
    pub mab_primary: f64,
    /// Energy drawn from the grid by the AFE.
    pub afe_grid: f64,
    pub afe_filter_resistive: f64,
    pub afe_inductor_delta: f64,
    pub afe_bus_delta: f64,
    pub line_imbalance: f64,
    pub series_link_imbalance: f64,
    pub mab_imbalance: f64,
    pub afe_imbalance: f64,
    /// Sum of the absolute stage flows, the scale for the imbalances.
    pub gross: f64,
}

impl PowerAudit {
    pub(crate) fn close(&mut self) {
        self.line_imbalance =
            self.feeder1 + self.series_injection - self.feeder2 - self.line_resistive - self.line_inductor_delta;
        self.series_link_imbalance = self.mab_secondary - self.series_injection - self.series_link_delta;
        self.mab_imbalance = self.mab_primary - self.mab_secondary;
        self.afe_imbalance =
            self.afe_grid - self.afe_filter_resistive - self.afe_inductor_delta - self.afe_bus_delta - self.mab_primary;
        self.gross = [
            self.feeder1,
            self.feeder2,
            self.series_injection,
            self.mab_secondary,
            self.mab_primary,
            self.afe_grid,
        ]
        .iter()
        .map(|x| x.abs())
        .sum();
    }

    /// Flows accumulated after `earlier`, a snapshot of the same run.
    pub fn since(&self, earlier: &PowerAudit) -> PowerAudit {
        let mut d = PowerAudit {
            feeder1: self.feeder1 - earlier.feeder1,
            feeder2: self.feeder2 - earlier.feeder2,
            series_injection: self.series_injection - earlier.series_injection,
            line_resistive: self.line_resistive - earlier.line_resistive,
            line_inductor_delta: self.line_inductor_delta - earlier.line_inductor_delta,
            series_link_delta: self.series_link_delta - earlier.series_link_delta,
            mab_secondary: self.mab_secondary - earlier.mab_secondary,
            mab_primary: self.mab_primary - earlier.mab_primary,
            afe_grid: self.afe_grid - earlier.afe_grid,
            afe_filter_resistive: self.afe_filter_resistive - earlier.afe_filter_resistive,
            afe_inductor_delta: self.afe_inductor_delta - earlier.afe_inductor_delta,
            afe_bus_delta: self.afe_bus_delta - earlier.afe_bus_delta,
            ..PowerAudit::default()
        };
        d.close();
        d
    }

    pub fn total_imbalance(&self) -> f64 {
        self.line_imbalance + self.series_link_imbalance + self.mab_imbalance + self.afe_imbalance
    }

    /// Largest stage imbalance relative to the gross flow (0 for an idle run).
    pub fn relative_imbalance(&self) -> f64 {
        let worst = [self.line_imbalance, self.series_link_imbalance, self.mab_imbalance, self.afe_imbalance]
            .iter()
            .fold(0.0f64, |a, x| a.max(x.abs()));
        if self.gross > 0.0 {
            worst / self.gross
        } else {
            worst
        }
    }
}

/// Cumulative audit at an event time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditMark {
    pub time: f64,
    pub audit: PowerAudit,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn audit_difference_closes() {
        let mut a = PowerAudit {
            feeder1: 10.0,
            series_injection: 2.0,
            feeder2: 11.0,
            line_resistive: 1.0,
            mab_secondary: 2.0,
            mab_primary: 2.0,
            afe_grid: 2.0,
            ..PowerAudit::default()
        };
        a.close();
        let zero = PowerAudit::default();
        assert_eq!(a.since(&zero), a);
        assert_eq!(a.since(&a).gross, 0.0);
        assert_eq!(a.total_imbalance(), 0.0);
    }

    #[test]
    fn columns_match_values() {
        let r = TimeSeriesRecord {
            time: 0.0,
            v1: [0.0; 3],
            v2: [0.0; 3],
            i: [0.0; 3],
            vs: [0.0; 3],
            v1_rms: [0.0; 3],
            v2_rms: [0.0; 3],
            i_rms: [0.0; 3],
            vs_rms: [0.0; 3],
            p1: [0.0; 3],
            q1: [0.0; 3],
            p2: [0.0; 3],
            q2: [0.0; 3],
            ps: [0.0; 3],
            qs: [0.0; 3],
            v_dc: [0.0; 3],
            v_bus: 0.0,
            phi: [0.0; 3],
            series_saturated: [false; 3],
            afe_saturated: false,
            mab_saturated: false,
            active: true,
        };
        assert_eq!(TimeSeriesRecord::columns().len(), r.values().len());
        assert_eq!(*r.values().last().unwrap(), 1.0);
    }
}
