use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Multi-winding high-frequency transformer in star form.
///
/// Winding 0 is the primary. Every inductance is referred to the primary;
/// [`MabMagnetics::referred`] refers a delta inductance to another winding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MabMagnetics {
    /// Star-branch leakage inductance per winding, referred to the primary.
    pub leakage: Vec<f64>,
    /// Magnetizing inductance referred to the primary. `inf` is allowed.
    pub magnetizing: f64,
    /// Turns per winding; `n_ij = turns[i] / turns[j]`.
    pub turns: Vec<f64>,
    pub f_sw: f64,
}

/// Symmetric matrix of delta-model inductances referred to the primary.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaInductances {
    n: usize,
    values: Vec<f64>,
}

impl DeltaInductances {
    pub fn size(&self) -> usize {
        self.n
    }

    /// `L_ij`; the diagonal is not defined and returns `inf`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }
}

impl MabMagnetics {
    pub fn new(leakage: Vec<f64>, magnetizing: f64, turns: Vec<f64>, f_sw: f64) -> Result<Self> {
        let m = MabMagnetics {
            leakage,
            magnetizing,
            turns,
            f_sw,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.leakage.len() < 2 {
            return Err(Error::param("leakage", "need at least two windings"));
        }
        if self.turns.len() != self.leakage.len() {
            return Err(Error::param("turns", "one entry per winding required"));
        }
        if self.leakage.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return Err(Error::param("leakage", "all leakage inductances must be finite and > 0"));
        }
        if !(self.magnetizing > 0.0) {
            return Err(Error::param("magnetizing", "must be > 0"));
        }
        if self.turns.iter().any(|&n| !(n > 0.0) || !n.is_finite()) {
            return Err(Error::param("turns", "all turn counts must be finite and > 0"));
        }
        if !(self.f_sw > 0.0) {
            return Err(Error::param("f_sw", "must be > 0"));
        }
        Ok(())
    }

    /// Star leakages chosen so every delta inductance equals `delta_l`
    /// (primary referred) for the given magnetizing inductance.
    pub fn symmetric(delta_l: f64, magnetizing: f64, turns: Vec<f64>, f_sw: f64) -> Result<Self> {
        let m = turns.len() as f64;
        if !(delta_l > 0.0) {
            return Err(Error::param("delta_l", "must be > 0"));
        }
        // L²/L_m + m·L − delta = 0
        let l = if magnetizing.is_infinite() {
            delta_l / m
        } else {
            let b = m * magnetizing;
            2.0 * delta_l * magnetizing / (b + (b * b + 4.0 * delta_l * magnetizing).sqrt())
        };
        Self::new(vec![l; turns.len()], magnetizing, turns, f_sw)
    }

    /// Router parameters of the reference design: 800 V primary, three
    /// 50 V secondaries, 15 µH primary-to-secondary delta inductance,
    /// 100 kHz switching.
    pub fn reference_design() -> Self {
        Self::symmetric(15e-6, 2e-3, vec![16.0, 1.0, 1.0, 1.0], 100e3).expect("reference magnetics are valid")
    }

    pub fn windings(&self) -> usize {
        self.leakage.len()
    }

    pub fn turn_ratio(&self, i: usize, j: usize) -> f64 {
        self.turns[i] / self.turns[j]
    }

    /// Star-to-delta reduction `L_ij = L_i·L_j·(1/L_m + Σ_k 1/L_k)`, `k` over
    /// every star branch.
    pub fn delta_inductances(&self) -> DeltaInductances {
        let n = self.windings();
        let sum_inv: f64 = self.leakage.iter().map(|l| 1.0 / l).sum::<f64>() + 1.0 / self.magnetizing;
        let mut values = vec![f64::INFINITY; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    values[i * n + j] = self.leakage[i] * self.leakage[j] * sum_inv;
                }
            }
        }
        DeltaInductances { n, values }
    }

    /// Delta inductance between `i` and `j` referred to winding `i`.
    pub fn referred(&self, delta: &DeltaInductances, i: usize, j: usize) -> f64 {
        let k = self.turns[i] / self.turns[0];
        delta.get(i, j) * k * k
    }
}
