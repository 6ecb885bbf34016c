use std::f64::consts::PI;

use num_complex::Complex64;

use super::magnetics::MabMagnetics;
use super::steady::{MabOperatingPoint, PairCoefficients};
use crate::error::{Error, Result};

/// Linearised phase-to-current gains around an operating point.
///
/// `K_φi = ∂I_i/∂φ_i` and `K_φij = −∂I_i/∂φ_j`, both in A/rad. The voltage
/// gains attach the dc-link impedance `Z_i = R_i/(R_i·C_i·s + 1)`; their sign
/// is the magnitude relation of the current path. In this crate a positive
/// bridge current leaves the link, so a controller acting on `v_i` applies
/// the minus sign itself.
#[derive(Debug, Clone, PartialEq)]
pub struct MabGainMatrix {
    n: usize,
    pub k_diag: Vec<f64>,
    k_cross: Vec<f64>,
    pub resistances: Vec<f64>,
    pub capacitances: Vec<f64>,
}

impl MabGainMatrix {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn k_phi(&self, i: usize) -> f64 {
        self.k_diag[i]
    }

    pub fn k_phi_ij(&self, i: usize, j: usize) -> f64 {
        self.k_cross[i * self.n + j]
    }

    /// Dc-link impedance of bridge `i` at angular frequency `omega`.
    pub fn impedance(&self, i: usize, omega: f64) -> Complex64 {
        link_impedance(self.resistances[i], self.capacitances[i], omega)
    }

    pub fn g_vi(&self, i: usize, omega: f64) -> Complex64 {
        self.impedance(i, omega) * self.k_diag[i]
    }

    pub fn g_vij(&self, i: usize, j: usize, omega: f64) -> Complex64 {
        self.impedance(i, omega) * self.k_phi_ij(i, j)
    }
}

/// `R/(jωRC + 1)`, falling back to `1/(jωC)` for an unloaded link.
pub fn link_impedance(r: f64, c: f64, omega: f64) -> Complex64 {
    if r.is_infinite() {
        Complex64::new(0.0, -1.0 / (omega * c))
    } else {
        Complex64::new(r, 0.0) / Complex64::new(1.0, omega * r * c)
    }
}

pub(crate) fn gains_from(coeffs: &PairCoefficients, voltages: &[f64], phases: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = coeffs.size();
    let mut diag = vec![0.0; n];
    let mut cross = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            // one-sided convention at the kink: |0| = 0 gives the printed π
            let k = coeffs.get(i, j) * voltages[j] * (PI - 2.0 * (phases[i] - phases[j]).abs());
            cross[i * n + j] = k;
            diag[i] += k;
        }
    }
    (diag, cross)
}

pub fn small_signal_gains(op: &MabOperatingPoint, mag: &MabMagnetics) -> Result<MabGainMatrix> {
    op.validate()?;
    let coeffs = PairCoefficients::new(mag);
    if coeffs.size() != op.voltages.len() {
        return Err(Error::param("voltages", "operating point and magnetics disagree on winding count"));
    }
    let (k_diag, k_cross) = gains_from(&coeffs, &op.voltages, &op.phases);
    Ok(MabGainMatrix {
        n: coeffs.size(),
        k_diag,
        k_cross,
        resistances: op.loads.clone(),
        capacitances: op.capacitances.clone(),
    })
}

/// Decoupling correction for every secondary (`1..n`), given the phase
/// vector of all bridges: `Δφ_i = Σ_{j≠i} (K_φij/K_φi)·φ_j`.
pub fn decoupling_terms(gains: &MabGainMatrix, phases: &[f64]) -> Result<Vec<f64>> {
    let n = gains.size();
    if phases.len() != n {
        return Err(Error::param("phases", "one phase per winding required"));
    }
    (1..n)
        .map(|i| {
            let k = gains.k_phi(i);
            if k == 0.0 || !k.is_finite() {
                return Err(Error::Degenerate(format!("K_phi of bridge {i} is {k}")));
            }
            Ok((0..n).filter(|&j| j != i).map(|j| gains.k_phi_ij(i, j) / k * phases[j]).sum())
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MabPiTuning {
    pub kp: f64,
    pub ti: f64,
    pub omega_c: f64,
    /// Design conditions that do not hold at this point.
    pub warnings: Vec<String>,
}

/// Closed-form tuning: `ω_c = (π − φ_m)/T_d`, `K_P = C·ω_c/K_φ`,
/// `τ_i = 10/ω_c`. The shortcut assumes the link behaves as a pure
/// capacitor; use [`exact_crossover`] when the actual margin matters.
pub fn mab_pi_tuning(k_phi: f64, t_d: f64, phase_margin: f64, c: f64, r: f64) -> Result<MabPiTuning> {
    if !(t_d > 0.0) {
        return Err(Error::param("t_d", "must be > 0"));
    }
    if phase_margin >= PI {
        return Err(Error::domain("phase margin must be below pi"));
    }
    if !(k_phi > 0.0) || !(c > 0.0) {
        return Err(Error::param("k_phi", "gain and capacitance must be > 0"));
    }
    let omega_c = (PI - phase_margin) / t_d;
    let kp = c * omega_c / k_phi;
    let ti = 10.0 / omega_c;
    let mut warnings = Vec::new();
    let rc_w = r * c * omega_c;
    if rc_w < 10.0 {
        let msg = format!("R·C·ω_c = {rc_w:.3} is not much greater than 1");
        log::warn!("{msg}");
        warnings.push(msg);
    }
    Ok(MabPiTuning {
        kp,
        ti,
        omega_c,
        warnings,
    })
}

/// The `K_φ` that makes [`mab_pi_tuning`] return `kp`.
pub fn implied_k_phi(c: f64, omega_c: f64, kp: f64) -> f64 {
    c * omega_c / kp
}

/// Crossover at which the full loop `PI·e^{−sT_d}·Z` has phase margin
/// `phase_margin` with `τ_i·ω_c = 10`. `r = inf` is the unloaded worst case.
pub fn exact_crossover(t_d: f64, phase_margin: f64, r: f64, c: f64) -> Result<f64> {
    if !(t_d > 0.0) || !(c > 0.0) {
        return Err(Error::param("t_d", "delay and capacitance must be > 0"));
    }
    let budget = PI - phase_margin - (0.1f64).atan();
    let lag = |w: f64| w * t_d + plant_lag(r, c, w);
    if lag(0.0) >= budget {
        return Err(Error::domain("requested phase margin is not reachable"));
    }
    let (mut lo, mut hi) = (0.0, 1.0 / t_d);
    while lag(hi) < budget {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if lag(mid) < budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn plant_lag(r: f64, c: f64, w: f64) -> f64 {
    if r.is_infinite() {
        PI / 2.0
    } else {
        (r * c * w).atan()
    }
}

/// Proportional gain that puts the loop magnitude at unity at `omega_c`.
pub fn scheduled_kp(k_phi: f64, omega_c: f64, ti: f64, r: f64, c: f64) -> f64 {
    let pi_mag = Complex64::new(1.0, -1.0 / (omega_c * ti)).norm();
    1.0 / (pi_mag * k_phi * link_impedance(r, c, omega_c).norm())
}

/// `G_OL(jω) = K_P(1 + 1/(jωτ_i))·e^{−jωT_d}·K_φ·Z(jω)`.
pub fn loop_gain(kp: f64, ti: f64, t_d: f64, k_phi: f64, r: f64, c: f64, omega: f64) -> Complex64 {
    let pi = Complex64::new(1.0, -1.0 / (omega * ti)) * kp;
    pi * Complex64::from_polar(1.0, -omega * t_d) * k_phi * link_impedance(r, c, omega)
}

/// Phase margin (rad) of [`loop_gain`]; `None` if the magnitude never
/// crosses unity in `[1e-2, 1e8]` rad/s.
pub fn phase_margin(kp: f64, ti: f64, t_d: f64, k_phi: f64, r: f64, c: f64) -> Option<f64> {
    let mag = |w: f64| loop_gain(kp, ti, t_d, k_phi, r, c, w).norm();
    let (mut lo, mut hi) = (1e-2f64, 1e8f64);
    if mag(lo) < 1.0 || mag(hi) > 1.0 {
        return None;
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if mag(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let w = (lo * hi).sqrt();
    // phase assembled term by term so no unwrapping is needed
    let phase = -(1.0 / (w * ti)).atan() - w * t_d - plant_lag(r, c, w);
    Some(PI + phase)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(phases: Vec<f64>) -> MabOperatingPoint {
        MabOperatingPoint::unloaded(vec![800.0, 50.0, 50.0, 50.0], phases).unwrap()
    }

    #[test]
    fn central_difference_matches_analytic() {
        let mag = MabMagnetics::reference_design();
        let coeffs = PairCoefficients::new(&mag);
        let op = point(vec![0.0, 0.31, -0.22, 0.47]);
        let g = small_signal_gains(&op, &mag).unwrap();
        let h = 1e-6;
        for i in 1..4 {
            let mut up = op.phases.clone();
            let mut dn = op.phases.clone();
            up[i] += h;
            dn[i] -= h;
            let iu = coeffs.currents(&op.voltages, &up).unwrap();
            let id = coeffs.currents(&op.voltages, &dn).unwrap();
            let fd = (iu[i] - id[i]) / (2.0 * h);
            assert!((fd - g.k_phi(i)).abs() < 1e-8 * g.k_phi(i).abs(), "{fd} vs {}", g.k_phi(i));
            for j in 0..4 {
                if j != i {
                    let fd = -(iu[j] - id[j]) / (2.0 * h);
                    let k = g.k_phi_ij(j, i);
                    assert!((fd - k).abs() < 1e-8 * k.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn balanced_point_uses_pi() {
        let mag = MabMagnetics::reference_design();
        let coeffs = PairCoefficients::new(&mag);
        let op = point(vec![0.0; 4]);
        let g = small_signal_gains(&op, &mag).unwrap();
        for i in 0..4 {
            let expect: f64 = (0..4).filter(|&j| j != i).map(|j| coeffs.get(i, j) * op.voltages[j] * PI).sum();
            assert!((g.k_phi(i) - expect).abs() < 1e-12 * expect);
        }
    }

    #[test]
    fn cross_gains_sum_to_diagonal() {
        let mag = MabMagnetics::reference_design();
        let g = small_signal_gains(&point(vec![0.0, 0.2, 0.2, 0.2]), &mag).unwrap();
        for i in 0..4 {
            let s: f64 = (0..4).filter(|&j| j != i).map(|j| g.k_phi_ij(i, j)).sum();
            assert!((s - g.k_phi(i)).abs() < 1e-12 * g.k_phi(i));
        }
    }

    #[test]
    fn decoupling_examples() {
        let mag = MabMagnetics::reference_design();
        let g = small_signal_gains(&point(vec![0.0; 4]), &mag).unwrap();
        assert_eq!(decoupling_terms(&g, &[0.0; 4]).unwrap(), vec![0.0; 3]);
        let x = 0.1;
        let d = decoupling_terms(&g, &[0.0, x, x, x]).unwrap();
        for (k, di) in d.iter().enumerate() {
            let i = k + 1;
            let s: f64 = (1..4).filter(|&j| j != i).map(|j| g.k_phi_ij(i, j)).sum();
            assert!((di - x * s / g.k_phi(i)).abs() < 1e-15);
        }
    }

    #[test]
    fn decoupling_rejects_zero_gain() {
        let mag = MabMagnetics::reference_design();
        let mut g = small_signal_gains(&point(vec![0.0; 4]), &mag).unwrap();
        g.k_diag[2] = 0.0;
        assert!(matches!(decoupling_terms(&g, &[0.0; 4]), Err(Error::Degenerate(_))));
    }

    #[test]
    fn printed_tuning_arithmetic() {
        let t = mab_pi_tuning(50.0, 150e-6, PI / 3.0, 200e-6, f64::INFINITY).unwrap();
        assert!((t.omega_c - 13962.634).abs() < 1e-3);
        assert!((t.ti - 10.0 / t.omega_c).abs() < 1e-18);
        let half = mab_pi_tuning(50.0, 75e-6, PI / 3.0, 200e-6, f64::INFINITY).unwrap();
        assert!((half.omega_c - 2.0 * t.omega_c).abs() < 1e-9);
        assert!((half.kp - 2.0 * t.kp).abs() < 1e-12);
        assert!(mab_pi_tuning(50.0, 150e-6, PI, 200e-6, 1.0).is_err());
    }

    #[test]
    fn low_rc_product_warns() {
        let t = mab_pi_tuning(50.0, 150e-6, PI / 3.0, 200e-6, 0.1).unwrap();
        assert_eq!(t.warnings.len(), 1);
    }

    #[test]
    fn exact_crossover_meets_margin() {
        let (td, pm, c, k) = (150e-6, PI / 3.0, 200e-6, 60.0);
        let w = exact_crossover(td, pm, f64::INFINITY, c).unwrap();
        let ti = 10.0 / w;
        let kp = scheduled_kp(k, w, ti, f64::INFINITY, c);
        assert!((loop_gain(kp, ti, td, k, f64::INFINITY, c, w).norm() - 1.0).abs() < 1e-9);
        let m = phase_margin(kp, ti, td, k, f64::INFINITY, c).unwrap();
        assert!((m - pm).abs() < 1e-6);
    }
}
