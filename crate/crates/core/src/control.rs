//! Discrete PI regulator shared by the series, shunt and MAB loops.

use serde::{Deserialize, Serialize};

/// Parallel-form PI `K_P·(e + (1/τ_i)∫e)` discretised with forward Euler at
/// sample period `T_s`.
///
/// Anti-windup is conditional integration: when the caller's output stage
/// saturates it calls [`PiController::hold`], which reverts the increment of
/// the current sample so the integral stays frozen while saturated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiController {
    pub kp: f64,
    /// Integral time constant. `f64::INFINITY` disables the integral path.
    pub ti: f64,
    pub ts: f64,
    pub out_min: f64,
    pub out_max: f64,
    integral: f64,
    last_increment: f64,
}

impl PiController {
    pub fn new(kp: f64, ti: f64, ts: f64) -> Self {
        Self::with_limits(kp, ti, ts, f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn with_limits(kp: f64, ti: f64, ts: f64, out_min: f64, out_max: f64) -> Self {
        PiController {
            kp,
            ti,
            ts,
            out_min,
            out_max,
            integral: 0.0,
            last_increment: 0.0,
        }
    }

    /// Integral state in units of the error signal.
    pub fn integral(&self) -> f64 {
        self.integral
    }

    pub fn set_integral(&mut self, value: f64) {
        self.integral = value;
        self.last_increment = 0.0;
    }

    pub fn reset(&mut self) {
        self.set_integral(0.0);
    }

    /// Advances one sample. The result is clamped to `[out_min, out_max]`;
    /// the integral is frozen on samples where that clamp is active.
    pub fn step(&mut self, error: f64) -> f64 {
        let inc = if self.ti.is_finite() && self.ti > 0.0 {
            error * self.ts / self.ti
        } else {
            0.0
        };
        self.integral += inc;
        self.last_increment = inc;
        let raw = self.kp * (error + self.integral);
        let out = raw.clamp(self.out_min, self.out_max);
        if out != raw {
            self.hold();
        }
        out
    }

    /// Output for `error` without touching the state.
    pub fn peek(&self, error: f64) -> f64 {
        (self.kp * (error + self.integral)).clamp(self.out_min, self.out_max)
    }

    /// Undoes the integration performed by the most recent [`step`](Self::step).
    pub fn hold(&mut self) {
        self.integral -= self.last_increment;
        self.last_increment = 0.0;
    }
}

/// Scales `(d, q)` onto the circle of radius `limit` if it lies outside.
/// Returns the possibly scaled vector and whether scaling happened.
pub fn vector_clamp(d: f64, q: f64, limit: f64) -> (f64, f64, bool) {
    let m = d.hypot(q);
    if m > limit && m > 0.0 {
        let k = limit.max(0.0) / m;
        (d * k, q * k, true)
    } else {
        (d, q, false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_and_freezes_on_saturation() {
        let mut pi = PiController::with_limits(1.0, 1e-3, 1e-4, -1.0, 1.0);
        let y = pi.step(0.5);
        assert!((y - (0.5 + 0.05)).abs() < 1e-15);
        // a large error saturates; integral must not grow
        let before = pi.integral();
        let y = pi.step(10.0);
        assert!((pi.integral() - before).abs() < 1e-15);
        assert_eq!(y, 1.0);
    }

    #[test]
    fn vector_clamp_preserves_angle() {
        let (d, q, sat) = vector_clamp(30.0, 40.0, 10.0);
        assert!(sat);
        assert!((d.hypot(q) - 10.0).abs() < 1e-12);
        assert!((q / d - 4.0 / 3.0).abs() < 1e-12);
        assert_eq!(vector_clamp(1.0, 1.0, 10.0), (1.0, 1.0, false));
    }
}
