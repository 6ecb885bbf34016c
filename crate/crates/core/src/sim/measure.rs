//! One-cycle sliding-window measurements.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;

/// Fundamental phasor (rms) of a real signal over the last `n` samples,
/// where `n` samples span exactly one grid period.
#[derive(Debug, Clone)]
pub struct SlidingPhasor {
    buf: Vec<Complex64>,
    idx: usize,
    sum: Complex64,
    filled: usize,
}

impl SlidingPhasor {
    pub fn new(n: usize) -> Self {
        SlidingPhasor {
            buf: vec![Complex64::new(0.0, 0.0); n.max(1)],
            idx: 0,
            sum: Complex64::new(0.0, 0.0),
            filled: 0,
        }
    }

    /// Adds sample `x` taken when the reference rotor `e^{jωt}` equals `rot`.
    pub fn push(&mut self, x: f64, rot: Complex64) {
        let v = rot.conj() * x;
        let old = std::mem::replace(&mut self.buf[self.idx], v);
        self.sum += v - old;
        self.idx += 1;
        if self.idx == self.buf.len() {
            self.idx = 0;
            // drop accumulated rounding once per window
            self.sum = self.buf.iter().sum();
        }
        self.filled = (self.filled + 1).min(self.buf.len());
    }

    pub fn phasor(&self) -> Complex64 {
        self.sum * (SQRT_2 / self.buf.len() as f64)
    }

    /// True once a full window has been seen.
    pub fn ready(&self) -> bool {
        self.filled == self.buf.len()
    }
}

/// Mean of a real signal over the last `n` samples.
#[derive(Debug, Clone)]
pub struct SlidingMean {
    buf: Vec<f64>,
    idx: usize,
    sum: f64,
}

impl SlidingMean {
    pub fn new(n: usize) -> Self {
        SlidingMean {
            buf: vec![0.0; n.max(1)],
            idx: 0,
            sum: 0.0,
        }
    }

    pub fn push(&mut self, x: f64) {
        let old = std::mem::replace(&mut self.buf[self.idx], x);
        self.sum += x - old;
        self.idx += 1;
        if self.idx == self.buf.len() {
            self.idx = 0;
            self.sum = self.buf.iter().sum();
        }
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.buf.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn recovers_rms_phasor() {
        let n = 2000;
        let w = 2.0 * PI * 50.0;
        let h = 0.02 / n as f64;
        let x = Complex64::from_polar(100.0, 0.3);
        let mut m = SlidingPhasor::new(n);
        for k in 0..3 * n {
            let t = k as f64 * h;
            let rot = Complex64::from_polar(1.0, w * t);
            m.push(SQRT_2 * (x * rot).re, rot);
        }
        assert!(m.ready());
        assert!((m.phasor() - x).norm() < 1e-9);
    }

    #[test]
    fn mean_of_constant() {
        let mut m = SlidingMean::new(4);
        for _ in 0..10 {
            m.push(2.5);
        }
        assert_eq!(m.mean(), 2.5);
    }
}
