//! Averaged R-L branch integrated on the complex (α + jβ) signal.
//!
//! The real part is the physical branch current. The imaginary part is a
//! fictitious orthogonal copy driven by the β components of the sources; it
//! gives the single-phase regulators an undelayed β current, which a
//! quarter-period delay line cannot provide inside a fast current loop.

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RlBranch {
    pub inductance: f64,
    pub resistance: f64,
    pub current: Complex64,
}

impl RlBranch {
    pub fn new(inductance: f64, resistance: f64) -> Self {
        RlBranch {
            inductance,
            resistance,
            current: Complex64::new(0.0, 0.0),
        }
    }

    /// `di/dt` for driving voltage `v`.
    pub fn derivative(&self, v: Complex64) -> Complex64 {
        (v - self.current * self.resistance) / self.inductance
    }

    /// Trapezoidal step of `L·di/dt = v − R·i` over `h`, with the driving
    /// voltage `v0` at the start and `v1` at the end of the step.
    pub fn step(&mut self, v0: Complex64, v1: Complex64, h: f64) {
        let a = self.inductance / h;
        let b = 0.5 * self.resistance;
        self.current = (self.current * (a - b) + (v0 + v1) * 0.5) / (a + b);
    }

    /// Magnetic energy of the physical (real) current.
    pub fn energy(&self) -> f64 {
        0.5 * self.inductance * self.current.re * self.current.re
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn converges_to_phasor_steady_state() {
        let w = 2.0 * PI * 50.0;
        let (l, r) = (259e-6, 0.025);
        let mut br = RlBranch::new(l, r);
        let h = 1e-5;
        let v = |t: f64| Complex64::from_polar(100.0, w * t);
        let mut t = 0.0;
        for _ in 0..200_000 {
            br.step(v(t), v(t + h), h);
            t += h;
        }
        let expect = v(t) / Complex64::new(r, w * l);
        assert!((br.current - expect).norm() / expect.norm() < 1e-4);
    }
}
