use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};

use super::gains::gains_from;
use super::magnetics::MabMagnetics;
use super::steady::PairCoefficients;
use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 50;
const MAX_HALVINGS: usize = 8;
/// Convergence threshold on the residual ∞-norm, relative to the rated
/// power of the mesh.
pub const RELATIVE_TOLERANCE: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSolution {
    /// Every bridge, primary first (always 0).
    pub phases: Vec<f64>,
    /// Forward-map powers at `phases`; `powers[0]` balances the secondaries.
    pub powers: Vec<f64>,
    /// Final residual ∞-norm in watts.
    pub residual: f64,
    pub iterations: usize,
}

impl PhaseSolution {
    pub fn secondary_phases(&self) -> &[f64] {
        &self.phases[1..]
    }

    pub fn primary_power(&self) -> f64 {
        self.powers[0]
    }
}

/// Power a bridge would exchange with all others at `π/2`; the scale for
/// the convergence test.
pub fn rated_power(coeffs: &PairCoefficients, voltages: &[f64]) -> f64 {
    let n = coeffs.size();
    (0..n)
        .map(|i| (0..n).filter(|&j| j != i).map(|j| coeffs.pair_limit(voltages, i, j)).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Phase shifts of the secondaries that deliver `targets` (watts, positive
/// out of the bridge), starting from zero.
pub fn solve_phase_shifts(targets: &[f64], mag: &MabMagnetics, voltages: &[f64]) -> Result<PhaseSolution> {
    let coeffs = PairCoefficients::new(mag);
    solve_from(&coeffs, targets, voltages, &vec![0.0; targets.len()])
}

/// Newton–Raphson on the `|φ_i − φ_j| ≤ π/2` branch with a backtracking line
/// search, starting from `initial` (secondaries only).
pub fn solve_from(coeffs: &PairCoefficients, targets: &[f64], voltages: &[f64], initial: &[f64]) -> Result<PhaseSolution> {
    let n = coeffs.size();
    let m = n - 1;
    if targets.len() != m || initial.len() != m || voltages.len() != n {
        return Err(Error::param("targets", "one target per secondary and one voltage per winding required"));
    }
    let tol = RELATIVE_TOLERANCE * rated_power(coeffs, voltages);
    let mut x = vec![0.0; n];
    x[1..].copy_from_slice(initial);
    if !in_branch(&x) {
        x.iter_mut().for_each(|v| *v = 0.0);
    }

    let residual = |x: &[f64]| -> Result<(Vec<f64>, Vec<f64>, f64)> {
        let p = coeffs.powers(voltages, x)?;
        let f: Vec<f64> = (0..m).map(|k| p[k + 1] - targets[k]).collect();
        let norm = f.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        Ok((p, f, norm))
    };

    let (mut p, mut f, mut norm) = residual(&x)?;
    let mut iterations = 0;
    while norm > tol {
        if iterations == MAX_ITERATIONS {
            return Err(Error::Infeasible {
                iterations,
                residual: norm,
            });
        }
        iterations += 1;

        let (diag, cross) = gains_from(coeffs, voltages, &x);
        let jac = DMatrix::from_fn(m, m, |r, c| {
            let (i, k) = (r + 1, c + 1);
            let g = if i == k { diag[i] } else { -cross[i * n + k] };
            voltages[i] * g
        });
        let rhs = DVector::from_iterator(m, f.iter().map(|v| -v));
        let dx = jac
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Degenerate("singular Jacobian in phase-shift solve".into()))?;
        if dx.iter().any(|v| !v.is_finite()) {
            return Err(Error::Degenerate("non-finite Newton step".into()));
        }

        let mut step = vec![0.0; n];
        step[1..].copy_from_slice(dx.as_slice());
        let mut alpha = branch_step_limit(&x, &step);
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let cand: Vec<f64> = x.iter().zip(&step).map(|(a, b)| a + alpha * b).collect();
            let r = residual(&cand)?;
            if r.2 < norm {
                accepted = Some((cand, r));
                break;
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((cand, (pn, fnew, nn))) => {
                x = cand;
                p = pn;
                f = fnew;
                norm = nn;
            }
            None => {
                return Err(Error::Infeasible {
                    iterations,
                    residual: norm,
                })
            }
        }
    }
    Ok(PhaseSolution {
        phases: x,
        powers: p,
        residual: norm,
        iterations,
    })
}

fn in_branch(x: &[f64]) -> bool {
    x.iter().all(|a| x.iter().all(|b| (a - b).abs() <= FRAC_PI_2))
}

/// Largest `α ≤ 1` keeping `x + α·dx` on the monotone branch.
fn branch_step_limit(x: &[f64], dx: &[f64]) -> f64 {
    let mut alpha = 1.0f64;
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            let d = x[i] - x[j];
            let dd = dx[i] - dx[j];
            if dd > 0.0 {
                alpha = alpha.min((FRAC_PI_2 - d) / dd);
            } else if dd < 0.0 {
                alpha = alpha.min((-FRAC_PI_2 - d) / dd);
            }
        }
    }
    alpha.max(0.0)
}
