use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::magnetics::MabMagnetics;
use crate::error::{Error, Result};

/// Dc-side state of every bridge. Index 0 is the primary, whose phase is
/// the reference and must be zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MabOperatingPoint {
    pub voltages: Vec<f64>,
    pub phases: Vec<f64>,
    pub capacitances: Vec<f64>,
    /// Equivalent dc load per bridge; `inf` for an unloaded link.
    pub loads: Vec<f64>,
}

impl MabOperatingPoint {
    pub fn new(voltages: Vec<f64>, phases: Vec<f64>, capacitances: Vec<f64>, loads: Vec<f64>) -> Result<Self> {
        let op = MabOperatingPoint {
            voltages,
            phases,
            capacitances,
            loads,
        };
        op.validate()?;
        Ok(op)
    }

    /// Point with the given voltages and phases, 200 µF links and no load.
    pub fn unloaded(voltages: Vec<f64>, phases: Vec<f64>) -> Result<Self> {
        let n = voltages.len();
        Self::new(voltages, phases, vec![200e-6; n], vec![f64::INFINITY; n])
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.voltages.len();
        if self.phases.len() != n || self.capacitances.len() != n || self.loads.len() != n {
            return Err(Error::param("phases", "all per-bridge vectors must have equal length"));
        }
        if self.phases.first().copied().unwrap_or(0.0) != 0.0 {
            return Err(Error::param("phases", "primary phase is the reference and must be 0"));
        }
        if self.capacitances.iter().any(|&c| !(c > 0.0)) {
            return Err(Error::param("capacitances", "must be > 0"));
        }
        if self.loads.iter().any(|&r| !(r > 0.0)) {
            return Err(Error::param("loads", "must be > 0 (use inf for no load)"));
        }
        Ok(())
    }
}

/// Per-pair transfer coefficients `c_ij = n_ij / (8π²·f_sw·L_ij)`, with
/// `L_ij` referred to winding `i`, so that `I_i = Σ_j c_ij·V_j·g(φ_i − φ_j)`
/// and `g(x) = x·(π − |x|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCoefficients {
    n: usize,
    c: Vec<f64>,
}

impl PairCoefficients {
    pub fn new(mag: &MabMagnetics) -> Self {
        let n = mag.windings();
        let delta = mag.delta_inductances();
        let k = 8.0 * PI * PI * mag.f_sw;
        let mut c = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    c[i * n + j] = mag.turn_ratio(i, j) / (k * mag.referred(&delta, i, j));
                }
            }
        }
        PairCoefficients { n, c }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.c[i * self.n + j]
    }

    /// Bridge currents; `phases[0]` is taken as given (normally 0).
    pub fn currents(&self, voltages: &[f64], phases: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        check_lengths(n, voltages, phases)?;
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                if i == j {
                    continue;
                }
                let x = phases[i] - phases[j];
                if !(x.abs() < PI) {
                    return Err(Error::domain(format!(
                        "phase difference between bridges {i} and {j} is {x:.6} rad, outside (-pi, pi)"
                    )));
                }
                acc += self.get(i, j) * voltages[j] * shape(x);
            }
            out[i] = acc;
        }
        Ok(out)
    }

    pub fn powers(&self, voltages: &[f64], phases: &[f64]) -> Result<Vec<f64>> {
        let mut p = self.currents(voltages, phases)?;
        for (p, v) in p.iter_mut().zip(voltages) {
            *p *= v;
        }
        Ok(p)
    }

    /// Largest power bridge `i` can exchange with the rest of the mesh when
    /// every pair sits at `π/2`.
    pub fn pair_limit(&self, voltages: &[f64], i: usize, j: usize) -> f64 {
        voltages[i] * self.get(i, j) * voltages[j] * PI * PI / 4.0
    }
}

fn check_lengths(n: usize, voltages: &[f64], phases: &[f64]) -> Result<()> {
    if voltages.len() != n || phases.len() != n {
        return Err(Error::param("phases", "one voltage and one phase per winding required"));
    }
    Ok(())
}

/// `x·(π − |x|)`, the phase-shift modulation shape.
pub fn shape(x: f64) -> f64 {
    x * (PI - x.abs())
}

/// Average power of every bridge over one switching period. Positive means
/// power leaving the bridge into the transformer.
pub fn bridge_powers(op: &MabOperatingPoint, mag: &MabMagnetics) -> Result<Vec<f64>> {
    PairCoefficients::new(mag).powers(&op.voltages, &op.phases)
}

/// Average dc-side current of every bridge; `V_i·I_i = P_i`.
pub fn bridge_currents(op: &MabOperatingPoint, mag: &MabMagnetics) -> Result<Vec<f64>> {
    PairCoefficients::new(mag).currents(&op.voltages, &op.phases)
}
