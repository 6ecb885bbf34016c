//! Semiconductor loss accounting, the MAB versus three-DAB comparison, and
//! the Bertotti core-loss bandwidth estimate.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwitchParams {
    pub r_on: f64,
    pub c_oss: f64,
    /// Turn-on plus turn-off time.
    pub t_switch: f64,
    pub v_dc: f64,
    pub f_sw: f64,
    pub i_rms: f64,
    pub i_avg: f64,
    pub count: u32,
}

impl SwitchParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [self.r_on, self.c_oss, self.t_switch, self.v_dc, self.f_sw, self.i_rms, self.i_avg];
        if fields.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::param("switch", "all device parameters must be finite and >= 0"));
        }
        Ok(())
    }

    pub fn conduction(&self) -> f64 {
        self.r_on * self.i_rms * self.i_rms * self.count as f64
    }

    pub fn switching(&self) -> f64 {
        let overlap = 0.5 * self.v_dc * self.i_avg * self.t_switch * self.f_sw;
        let coss = 0.5 * self.c_oss * self.v_dc * self.v_dc * self.f_sw;
        (overlap + coss) * self.count as f64
    }
}

/// Conduction plus switching loss of `p.count` identical devices.
pub fn switch_loss(p: &SwitchParams) -> f64 {
    p.conduction() + p.switching()
}

/// Average of a rectified sine with the given rms value.
pub fn sine_average(i_rms: f64) -> f64 {
    SQRT_2 * i_rms / PI
}

/// Loss entries by stage. The total is the sum of the entries in order and
/// cannot be set independently.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossBreakdown {
    entries: Vec<(String, f64)>,
    total: f64,
}

impl LossBreakdown {
    pub fn new(entries: Vec<(String, f64)>) -> Self {
        let total = entries.iter().map(|(_, w)| *w).sum();
        LossBreakdown { entries, total }
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    pub fn get(&self, stage: &str) -> Option<f64> {
        self.entries.iter().find(|(s, _)| s == stage).map(|(_, w)| *w)
    }

    pub fn total(&self) -> f64 {
        self.total
    }
}

pub const SERIES: &str = "series";
pub const MAB_SEMICONDUCTORS: &str = "mab_semiconductors";
pub const MAB_TRANSFORMER: &str = "mab_transformer";
pub const AFE: &str = "afe";
pub const FILTERS: &str = "filters";

/// Stage totals quoted for the 15 kW operating point.
pub const REFERENCE_SERIES_W: f64 = 293.4;
pub const REFERENCE_MAB_TOTAL_W: f64 = 558.48;
pub const REFERENCE_MAB_TRANSFORMER_W: f64 = 36.5;
pub const REFERENCE_AFE_W: f64 = 183.84;
pub const REFERENCE_FILTER_W: f64 = 145.2;
pub const UPFC_TRANSFORMER_W: f64 = 269.0;
pub const UPFC_CONVERTERS_W: f64 = 515.2;

/// Device groups of each converter stage plus the fixed magnetics entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageDevices {
    pub series: Vec<SwitchParams>,
    pub mab: Vec<SwitchParams>,
    pub afe: Vec<SwitchParams>,
    pub mab_transformer: f64,
    pub filters: f64,
}

impl StageDevices {
    /// Datasheet-typical devices at the 15 kW point: 140 A line current,
    /// 50 V module links, 800 V bus, 100 kHz, two devices conducting per
    /// leg pair so each carries `I_line/√2`.
    pub fn typical() -> Self {
        let lv = |i_rms: f64, count| SwitchParams {
            r_on: 1.5e-3,
            c_oss: 2.7e-9,
            t_switch: 30e-9,
            v_dc: 50.0,
            f_sw: 100e3,
            i_rms,
            i_avg: sine_average(i_rms),
            count,
        };
        let hv = |i_rms: f64, count| SwitchParams {
            r_on: 40e-3,
            c_oss: 100e-12,
            t_switch: 30e-9,
            v_dc: 800.0,
            f_sw: 100e3,
            i_rms,
            i_avg: sine_average(i_rms),
            count,
        };
        let afe_line = 15e3 / (3.0 * 230.0);
        StageDevices {
            series: vec![lv(140.0 / SQRT_2, 12)],
            mab: vec![hv(33.0, 2), lv(222.0, 6)],
            afe: vec![hv(afe_line / SQRT_2, 6)],
            mab_transformer: REFERENCE_MAB_TRANSFORMER_W,
            filters: REFERENCE_FILTER_W,
        }
    }

    /// [`typical`](Self::typical) with each stage's on-resistances scaled so
    /// the stage total matches the quoted figure. Back-fitted values, not
    /// datasheet data.
    pub fn calibrated() -> Self {
        let mut s = Self::typical();
        calibrate_stage(&mut s.series, REFERENCE_SERIES_W).expect("series calibration");
        calibrate_stage(&mut s.mab, REFERENCE_MAB_TOTAL_W - REFERENCE_MAB_TRANSFORMER_W).expect("mab calibration");
        calibrate_stage(&mut s.afe, REFERENCE_AFE_W).expect("afe calibration");
        s
    }

    pub fn zero() -> Self {
        StageDevices {
            series: Vec::new(),
            mab: Vec::new(),
            afe: Vec::new(),
            mab_transformer: 0.0,
            filters: 0.0,
        }
    }
}

/// Scales every `r_on` in `devices` by one factor so the group dissipates
/// `target` watts. Fails if switching loss alone already exceeds it.
pub fn calibrate_stage(devices: &mut [SwitchParams], target: f64) -> Result<f64> {
    let cond: f64 = devices.iter().map(SwitchParams::conduction).sum();
    let sw: f64 = devices.iter().map(SwitchParams::switching).sum();
    if cond <= 0.0 {
        return Err(Error::param("r_on", "no conduction loss to scale"));
    }
    let k = (target - sw) / cond;
    if k < 0.0 {
        return Err(Error::param("r_on", format!("switching loss {sw:.2} W already exceeds {target:.2} W")));
    }
    devices.iter_mut().for_each(|d| d.r_on *= k);
    Ok(k)
}

fn group_loss(devices: &[SwitchParams]) -> Result<f64> {
    devices.iter().try_fold(0.0, |acc, d| {
        d.validate()?;
        Ok(acc + switch_loss(d))
    })
}

pub fn system_loss_report(stages: &StageDevices) -> Result<LossBreakdown> {
    Ok(LossBreakdown::new(vec![
        (SERIES.into(), group_loss(&stages.series)?),
        (MAB_SEMICONDUCTORS.into(), group_loss(&stages.mab)?),
        (MAB_TRANSFORMER.into(), stages.mab_transformer),
        (AFE.into(), group_loss(&stages.afe)?),
        (FILTERS.into(), stages.filters),
    ]))
}

/// The quoted stage figures used as fixed constants.
pub fn reference_loss_report() -> LossBreakdown {
    LossBreakdown::new(vec![
        (SERIES.into(), REFERENCE_SERIES_W),
        (MAB_SEMICONDUCTORS.into(), REFERENCE_MAB_TOTAL_W - REFERENCE_MAB_TRANSFORMER_W),
        (MAB_TRANSFORMER.into(), REFERENCE_MAB_TRANSFORMER_W),
        (AFE.into(), REFERENCE_AFE_W),
        (FILTERS.into(), REFERENCE_FILTER_W),
    ])
}

/// Transformer-coupled UPFC of the same rating.
pub fn upfc_loss_report() -> LossBreakdown {
    LossBreakdown::new(vec![
        ("injection_transformer".into(), UPFC_TRANSFORMER_W),
        ("inverters_and_filters".into(), UPFC_CONVERTERS_W),
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RouterColumn {
    pub hv_switches: u32,
    pub lv_switches: u32,
    pub hv_capacitors: u32,
    pub lv_capacitors: u32,
    pub hv_switch_rms_a: f64,
    pub lv_switch_rms_a: f64,
    pub transformers: u32,
    pub weight_g: f64,
    pub volume_cm3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopologyComparison {
    pub rating_w: f64,
    pub mab: RouterColumn,
    pub three_dab: RouterColumn,
    pub weight_ratio: f64,
    pub volume_ratio: f64,
    pub hv_switch_ratio: f64,
}

/// One MAB against three DABs at 15 kW.
pub fn topology_comparison() -> TopologyComparison {
    let mab = RouterColumn {
        hv_switches: 2,
        lv_switches: 6,
        hv_capacitors: 2,
        lv_capacitors: 6,
        hv_switch_rms_a: 33.0,
        lv_switch_rms_a: 222.0,
        transformers: 1,
        weight_g: 960.0,
        volume_cm3: 1932.0,
    };
    let three_dab = RouterColumn {
        hv_switches: 12,
        lv_switches: 12,
        hv_capacitors: 3,
        lv_capacitors: 3,
        hv_switch_rms_a: 7.0,
        lv_switch_rms_a: 111.0,
        transformers: 3,
        weight_g: 3.0 * 1250.0,
        volume_cm3: 3.0 * 2226.0,
    };
    TopologyComparison {
        rating_w: 15e3,
        weight_ratio: mab.weight_g / three_dab.weight_g,
        volume_ratio: mab.volume_cm3 / three_dab.volume_cm3,
        hv_switch_ratio: mab.hv_switches as f64 / three_dab.hv_switches as f64,
        mab,
        three_dab,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BertottiParams {
    /// Hysteresis constant, A·m/(V·s).
    pub eta: f64,
    pub b_m: f64,
    pub thickness: f64,
    pub resistivity: f64,
    pub volume: f64,
    pub p_in: f64,
}

/// Share of input power a 3 dB bandwidth allows the core to dissipate.
pub const THREE_DB_LOSS_FRACTION: f64 = 1.0 - std::f64::consts::FRAC_1_SQRT_2;
/// Bandwidth roots above this are reported as unbounded.
pub const BANDWIDTH_CEILING_HZ: f64 = 10e6;

impl BertottiParams {
    /// Grain-oriented sheet at 1.5 T and the core volume back-fitted so a
    /// 15 kW transformer reaches its 3 dB point at 1 kHz.
    pub fn calibrated() -> Self {
        let mut p = BertottiParams {
            eta: 15.0,
            b_m: 1.5,
            thickness: 27e-6,
            resistivity: 0.48e-6,
            volume: 1.0,
            p_in: 15e3,
        };
        p.volume = THREE_DB_LOSS_FRACTION * p.p_in / bertotti_density(1e3, &p);
        p
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.eta, self.b_m, self.thickness, self.resistivity, self.p_in];
        if all.iter().any(|v| !(*v > 0.0)) || !(self.volume >= 0.0) {
            return Err(Error::param("bertotti", "material constants and P_in must be > 0, volume >= 0"));
        }
        Ok(())
    }

    pub fn hysteresis_coefficient(&self) -> f64 {
        self.eta * self.b_m * self.b_m
    }

    pub fn eddy_coefficient(&self) -> f64 {
        PI * PI * self.thickness * self.thickness * self.b_m * self.b_m / (6.0 * self.resistivity)
    }

    /// Frequency at which eddy and hysteresis densities are equal.
    pub fn crossover_frequency(&self) -> f64 {
        self.hysteresis_coefficient() / self.eddy_coefficient()
    }
}

/// Core loss density in W/m³.
pub fn bertotti_density(f: f64, p: &BertottiParams) -> f64 {
    p.hysteresis_coefficient() * f + p.eddy_coefficient() * f * f
}

/// `|(P_in − P_core)/P_in|`.
pub fn transformer_gain(f: f64, p: &BertottiParams) -> f64 {
    ((p.p_in - bertotti_density(f, p) * p.volume) / p.p_in).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bandwidth {
    /// `inf` when unbounded.
    pub frequency: f64,
    pub unbounded: bool,
}

/// Frequency at which core loss takes `1 − 1/√2` of the input power.
pub fn transformer_bandwidth(p: &BertottiParams) -> Result<Bandwidth> {
    p.validate()?;
    let a = p.eddy_coefficient() * p.volume;
    let b = p.hysteresis_coefficient() * p.volume;
    let c = THREE_DB_LOSS_FRACTION * p.p_in;
    let unbounded = Bandwidth {
        frequency: f64::INFINITY,
        unbounded: true,
    };
    if a == 0.0 && b == 0.0 {
        return Ok(unbounded);
    }
    // positive root of a·f² + b·f − c = 0 without cancellation
    let f = 2.0 * c / (b + (b * b + 4.0 * a * c).sqrt());
    if f > BANDWIDTH_CEILING_HZ {
        return Ok(unbounded);
    }
    Ok(Bandwidth {
        frequency: f,
        unbounded: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResonanceVerdict {
    pub pass: bool,
    /// `f_res / (f_sampling / 3)`; above 1 passes.
    pub margin: f64,
}

/// Filter resonance must sit strictly above a third of the sampling rate.
pub fn filter_resonance_check(f_res: f64, f_sampling: f64) -> Result<ResonanceVerdict> {
    if !(f_res > 0.0) || !(f_sampling > 0.0) {
        return Err(Error::param("f_res", "frequencies must be > 0"));
    }
    Ok(ResonanceVerdict {
        pass: f_res > f_sampling / 3.0,
        margin: f_res / (f_sampling / 3.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> SwitchParams {
        SwitchParams {
            r_on: 1.5e-3,
            c_oss: 5e-9,
            t_switch: 20e-9,
            v_dc: 50.0,
            f_sw: 50e3,
            i_rms: 100.0,
            i_avg: 90.0,
            count: 1,
        }
    }

    #[test]
    fn switch_loss_hand_value() {
        assert!((switch_loss(&example()) - 17.5625).abs() < 1e-12);
        let mut idle = example();
        idle.i_rms = 0.0;
        idle.i_avg = 0.0;
        idle.c_oss = 0.0;
        assert_eq!(switch_loss(&idle), 0.0);
    }

    #[test]
    fn frequency_scales_switching_only() {
        let a = example();
        let mut b = a;
        b.f_sw *= 2.0;
        assert!((b.conduction() - a.conduction()).abs() < 1e-15);
        assert!((b.switching() - 2.0 * a.switching()).abs() < 1e-12);
    }

    #[test]
    fn reference_preset_sums() {
        let r = reference_loss_report();
        assert!((r.total() - 1180.92).abs() < 1e-9);
        assert!((r.get(MAB_SEMICONDUCTORS).unwrap() + r.get(MAB_TRANSFORMER).unwrap() - 558.48).abs() < 1e-9);
        assert!((upfc_loss_report().total() - 784.2).abs() < 1e-9);
        assert_eq!(system_loss_report(&StageDevices::zero()).unwrap().total(), 0.0);
    }

    #[test]
    fn calibrated_devices_reproduce_stage_totals() {
        let r = system_loss_report(&StageDevices::calibrated()).unwrap();
        let p = reference_loss_report();
        for (stage, w) in p.entries() {
            assert!((r.get(stage).unwrap() - w).abs() < 1e-9, "{stage}");
        }
    }

    #[test]
    fn comparison_ratios() {
        let t = topology_comparison();
        assert!((t.weight_ratio - 0.256).abs() < 1e-12);
        assert!((t.volume_ratio - 1932.0 / 6678.0).abs() < 1e-15);
        assert!((t.volume_ratio - 0.289).abs() < 5e-4);
        assert!((t.hv_switch_ratio - 2.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn bertotti_hand_values() {
        let p = BertottiParams::calibrated();
        assert_eq!(bertotti_density(0.0, &p), 0.0);
        assert!((p.hysteresis_coefficient() - 33.75).abs() < 1e-12);
        assert!((p.eddy_coefficient() - 5.621e-3).abs() < 1e-6);
        assert!((bertotti_density(50.0, &p) - 1701.6).abs() < 0.1);
        assert!((p.crossover_frequency() - 6004.0).abs() < 2.0);
    }

    #[test]
    fn calibrated_bandwidth_is_one_kilohertz() {
        let p = BertottiParams::calibrated();
        assert!((p.volume - 0.1116).abs() < 1e-3);
        let bw = transformer_bandwidth(&p).unwrap();
        assert!((bw.frequency - 1e3).abs() < 1e-6);
        assert!((transformer_gain(bw.frequency, &p) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-10);
        let mut big = p;
        big.volume *= 2.0;
        assert!(transformer_bandwidth(&big).unwrap().frequency < bw.frequency);
        let mut none = p;
        none.volume = 0.0;
        assert!(transformer_bandwidth(&none).unwrap().unbounded);
    }

    #[test]
    fn resonance_rule_is_strict() {
        assert!(filter_resonance_check(4e3, 10e3).unwrap().pass);
        assert!(!filter_resonance_check(3e3, 10e3).unwrap().pass);
        assert!(!filter_resonance_check(10e3 / 3.0, 10e3).unwrap().pass);
    }
}
