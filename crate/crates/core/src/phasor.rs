//! Complex rms phasors, three-phase containers and the single-phase
//! synchronous-frame transform.
//!
//! Conventions used across the crate:
//!
//! * [`Phasor`] values are **rms** quantities.
//! * d-q samples are **peak** (amplitude-invariant): a phasor `X` seen in a
//!   frame of angle `θ₀` maps to `d + jq = √2·X·e^{-jθ₀}`. The `√2` is
//!   applied only by [`Phasor::to_dq`] / [`Phasor::from_dq`] and
//!   [`Phasor::instantaneous`].
//! * The stationary pair `(α, β)` carries the measured signal in `α` and a
//!   copy lagging by 90° in `β`, so `(cos θ, sin θ)` maps to `(d, q) = (1, 0)`.

use std::collections::VecDeque;
use std::f64::consts::{PI, SQRT_2, TAU};
use std::ops::{Add, Div, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Wraps an angle into `(-π, π]`. `-π` itself maps to `+π`.
pub fn normalize_angle(angle: f64) -> f64 {
    if !angle.is_finite() {
        return angle;
    }
    let mut a = angle.rem_euclid(TAU);
    if a > PI {
        a -= TAU;
    }
    if a <= -PI {
        a += TAU;
    }
    a
}

/// Complex rms phasor.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Phasor(pub Complex64);

impl Phasor {
    pub const ZERO: Phasor = Phasor(Complex64 { re: 0.0, im: 0.0 });

    /// Builds a phasor from rms magnitude and angle in radians. A negative
    /// magnitude is folded into the angle.
    pub fn from_polar(magnitude: f64, angle: f64) -> Self {
        Phasor(Complex64::from_polar(magnitude, angle))
    }

    pub fn from_polar_deg(magnitude: f64, angle_deg: f64) -> Self {
        Self::from_polar(magnitude, angle_deg.to_radians())
    }

    pub fn new(re: f64, im: f64) -> Self {
        Phasor(Complex64::new(re, im))
    }

    pub fn re(self) -> f64 {
        self.0.re
    }

    pub fn im(self) -> f64 {
        self.0.im
    }

    pub fn magnitude(self) -> f64 {
        self.0.norm()
    }

    /// Angle in `(-π, π]`.
    pub fn angle(self) -> f64 {
        normalize_angle(self.0.arg())
    }

    pub fn conj(self) -> Self {
        Phasor(self.0.conj())
    }

    pub fn complex(self) -> Complex64 {
        self.0
    }

    /// `√2·Re(X·e^{jωt})`.
    pub fn instantaneous(self, omega: f64, t: f64) -> f64 {
        SQRT_2 * (self.0 * Complex64::from_polar(1.0, omega * t)).re
    }

    /// Peak-scaled d-q components of this phasor in a frame rotated by
    /// `frame_angle` relative to the phasor reference.
    pub fn to_dq(self, frame_angle: f64) -> DqSample {
        let z = SQRT_2 * self.0 * Complex64::from_polar(1.0, -frame_angle);
        DqSample {
            d: z.re,
            q: z.im,
            theta: frame_angle,
        }
    }

    /// Inverse of [`Phasor::to_dq`].
    pub fn from_dq(sample: DqSample) -> Self {
        Phasor(Complex64::new(sample.d, sample.q) * Complex64::from_polar(1.0, sample.theta) / SQRT_2)
    }
}

impl Add for Phasor {
    type Output = Phasor;
    fn add(self, rhs: Phasor) -> Phasor {
        Phasor(self.0 + rhs.0)
    }
}

impl Sub for Phasor {
    type Output = Phasor;
    fn sub(self, rhs: Phasor) -> Phasor {
        Phasor(self.0 - rhs.0)
    }
}

impl Mul for Phasor {
    type Output = Phasor;
    fn mul(self, rhs: Phasor) -> Phasor {
        Phasor(self.0 * rhs.0)
    }
}

impl Mul<f64> for Phasor {
    type Output = Phasor;
    fn mul(self, rhs: f64) -> Phasor {
        Phasor(self.0 * rhs)
    }
}

impl Div for Phasor {
    type Output = Phasor;
    fn div(self, rhs: Phasor) -> Phasor {
        Phasor(self.0 / rhs.0)
    }
}

impl Neg for Phasor {
    type Output = Phasor;
    fn neg(self) -> Phasor {
        Phasor(-self.0)
    }
}

/// Series impedance `R + jX` at angular frequency `omega`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Impedance {
    pub resistance: f64,
    pub reactance: f64,
    pub omega: f64,
}

impl Impedance {
    pub fn new(resistance: f64, reactance: f64, omega: f64) -> Result<Self> {
        if !(resistance >= 0.0) {
            return Err(Error::param("resistance", format!("must be >= 0, got {resistance}")));
        }
        if !(omega > 0.0) {
            return Err(Error::param("omega", format!("must be > 0, got {omega}")));
        }
        Ok(Impedance {
            resistance,
            reactance,
            omega,
        })
    }

    /// Impedance of a series R-L branch.
    pub fn from_rl(resistance: f64, inductance: f64, omega: f64) -> Result<Self> {
        Self::new(resistance, omega * inductance, omega)
    }

    pub fn complex(&self) -> Complex64 {
        Complex64::new(self.resistance, self.reactance)
    }

    pub fn magnitude(&self) -> f64 {
        self.complex().norm()
    }

    /// Load angle `atan2(X, R)`.
    pub fn angle(&self) -> f64 {
        self.reactance.atan2(self.resistance)
    }

    pub fn inductance(&self) -> f64 {
        self.reactance / self.omega
    }

    /// Series combination. Both operands must share the same `omega`.
    pub fn series(&self, other: &Impedance) -> Impedance {
        debug_assert!((self.omega - other.omega).abs() <= 1e-9 * self.omega);
        Impedance {
            resistance: self.resistance + other.resistance,
            reactance: self.reactance + other.reactance,
            omega: self.omega,
        }
    }

    /// Constant impedance that draws complex power `s` (per phase) at rms
    /// voltage `v_rms`.
    pub fn from_power(p: f64, q: f64, v_rms: f64, omega: f64) -> Result<Self> {
        let s = Complex64::new(p, q);
        if s.norm() == 0.0 {
            return Err(Error::domain("zero power load has no finite impedance"));
        }
        let z = Complex64::new(v_rms * v_rms, 0.0) / s.conj();
        Self::new(z.re, z.im, omega)
    }
}

/// Per-phase triple `(a, b, c)`. No balance is implied.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ThreePhaseSet<T> {
    pub a: T,
    pub b: T,
    pub c: T,
}

impl<T> ThreePhaseSet<T> {
    pub fn new(a: T, b: T, c: T) -> Self {
        ThreePhaseSet { a, b, c }
    }

    pub fn from_fn(mut f: impl FnMut(usize) -> T) -> Self {
        ThreePhaseSet {
            a: f(0),
            b: f(1),
            c: f(2),
        }
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> ThreePhaseSet<U> {
        ThreePhaseSet {
            a: f(&self.a),
            b: f(&self.b),
            c: f(&self.c),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        [&self.a, &self.b, &self.c].into_iter()
    }

    pub fn as_array(&self) -> [&T; 3] {
        [&self.a, &self.b, &self.c]
    }
}

impl<T: Clone> ThreePhaseSet<T> {
    pub fn splat(v: T) -> Self {
        ThreePhaseSet {
            a: v.clone(),
            b: v.clone(),
            c: v,
        }
    }
}

impl<T> Index<usize> for ThreePhaseSet<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        match i {
            0 => &self.a,
            1 => &self.b,
            2 => &self.c,
            _ => panic!("phase index {i} out of range"),
        }
    }
}

impl<T> IndexMut<usize> for ThreePhaseSet<T> {
    fn index_mut(&mut self, i: usize) -> &mut T {
        match i {
            0 => &mut self.a,
            1 => &mut self.b,
            2 => &mut self.c,
            _ => panic!("phase index {i} out of range"),
        }
    }
}

impl ThreePhaseSet<Phasor> {
    /// Symmetric positive-sequence set with phase `a` at angle `angle_a`.
    pub fn balanced(magnitude: f64, angle_a: f64) -> Self {
        Self::from_magnitudes([magnitude; 3], angle_a)
    }

    /// Positive-sequence angles (0, −120°, +120°) with arbitrary magnitudes.
    pub fn from_magnitudes(magnitudes: [f64; 3], angle_a: f64) -> Self {
        let step = TAU / 3.0;
        ThreePhaseSet::from_fn(|k| Phasor::from_polar(magnitudes[k], normalize_angle(angle_a - step * k as f64)))
    }
}

/// Synchronous-frame sample, peak scaled.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DqSample {
    pub d: f64,
    pub q: f64,
    /// Frame angle the sample was taken at.
    pub theta: f64,
}

impl DqSample {
    pub fn new(d: f64, q: f64, theta: f64) -> Self {
        DqSample { d, q, theta }
    }

    pub fn magnitude(&self) -> f64 {
        self.d.hypot(self.q)
    }

    pub fn complex(&self) -> Complex64 {
        Complex64::new(self.d, self.q)
    }
}

/// Rotates a stationary `(α, β)` pair into the frame at angle `theta`.
pub fn to_dq(alpha: f64, beta: f64, theta: f64) -> DqSample {
    let (s, c) = theta.sin_cos();
    DqSample {
        d: alpha * c + beta * s,
        q: -alpha * s + beta * c,
        theta,
    }
}

/// Inverse of [`to_dq`].
pub fn from_dq(sample: DqSample) -> (f64, f64) {
    let (s, c) = sample.theta.sin_cos();
    (sample.d * c - sample.q * s, sample.d * s + sample.q * c)
}

/// Ideal quarter-period delay line producing the orthogonal (lagging)
/// companion of a single-phase signal at a known fundamental.
///
/// The output equals the input delayed by `T/4`, so it is exact for a pure
/// fundamental once the buffer is filled. Until then it returns whatever was
/// used to prefill the buffer (zeros by default).
#[derive(Debug, Clone)]
pub struct QuadratureDelay {
    buf: VecDeque<f64>,
    delay: usize,
}

impl QuadratureDelay {
    /// `step` must divide a quarter period `π/(2ω)` into a whole number of
    /// samples (relative tolerance `1e-9`).
    pub fn new(omega: f64, step: f64) -> Result<Self> {
        if !(omega > 0.0) || !(step > 0.0) {
            return Err(Error::domain("quadrature delay needs positive omega and step"));
        }
        let quarter = PI / (2.0 * omega);
        let n = quarter / step;
        let delay = n.round();
        if delay < 1.0 || (n - delay).abs() > 1e-9 * n.max(1.0) {
            return Err(Error::domain(format!(
                "step {step} s does not divide the quarter period {quarter} s"
            )));
        }
        let delay = delay as usize;
        Ok(QuadratureDelay {
            buf: std::iter::repeat_n(0.0, delay).collect(),
            delay,
        })
    }

    /// Fills the history with `f(k)` for the sample `k` steps in the past,
    /// `k = delay ..= 1`.
    pub fn prefill(&mut self, mut history: impl FnMut(usize) -> f64) {
        self.buf.clear();
        for k in (1..=self.delay).rev() {
            self.buf.push_back(history(k));
        }
    }

    pub fn delay_samples(&self) -> usize {
        self.delay
    }

    /// Pushes the current sample and returns the one from a quarter period
    /// ago.
    pub fn push(&mut self, x: f64) -> f64 {
        self.buf.push_back(x);
        self.buf.pop_front().unwrap_or(0.0)
    }

    /// Output that the next `push` would return.
    pub fn peek(&self) -> f64 {
        self.buf.front().copied().unwrap_or(0.0)
    }
}

/// Runs [`QuadratureDelay`] over a whole sample stream (zero initial
/// history).
pub fn quadrature_of(signal: &[f64], omega: f64, step: f64) -> Result<Vec<f64>> {
    let mut delay = QuadratureDelay::new(omega, step)?;
    Ok(signal.iter().map(|&x| delay.push(x)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const W: f64 = TAU * 50.0;

    #[test]
    fn angle_normalisation_ties_to_plus_pi() {
        assert_eq!(normalize_angle(-PI), PI);
        assert_eq!(normalize_angle(PI), PI);
        assert!((normalize_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((normalize_angle(-0.5) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn frame_aligned_unit_signal() {
        for &th in &[0.0, 0.3, -2.0, 3.1] {
            let s = to_dq(f64::cos(th), f64::sin(th), th);
            assert!((s.d - 1.0).abs() < 1e-15);
            assert!(s.q.abs() < 1e-15);
        }
        let z = to_dq(0.0, 0.0, 1.234);
        assert_eq!((z.d, z.q), (0.0, 0.0));
        assert_eq!(from_dq(DqSample::new(1.0, 0.0, 0.0)), (1.0, 0.0));
        assert_eq!(from_dq(DqSample::new(0.0, 0.0, 2.0)), (0.0, 0.0));
    }

    #[test]
    fn rms_phasor_maps_to_peak_d_axis() {
        let v = Phasor::from_polar(230.0, 0.4);
        let s = v.to_dq(0.4);
        assert!((s.d - 230.0 * SQRT_2).abs() < 1e-12);
        assert!(s.q.abs() < 1e-12);
        // the same through the time-domain route
        let t = 0.0123;
        let th = W * t + 0.4;
        let alpha = v.instantaneous(W, t);
        let beta = v.instantaneous(W, t - 0.25 / 50.0);
        let s2 = to_dq(alpha, beta, th);
        assert!((s2.d - 230.0 * SQRT_2).abs() < 1e-9);
        assert!(s2.q.abs() < 1e-9);
        let back = Phasor::from_dq(s);
        assert!((back - v).magnitude() < 1e-12);
    }

    #[test]
    fn impedance_from_power_reproduces_power() {
        let z = Impedance::from_power(13_333.0, 1_873.7, 230.94, W).unwrap();
        let i = Phasor::new(230.94, 0.0) / Phasor(z.complex());
        let s = Phasor::new(230.94, 0.0) * i.conj();
        assert!((s.re() - 13_333.0).abs() < 1e-9);
        assert!((s.im() - 1_873.7).abs() < 1e-9);
        assert!(Impedance::new(-1.0, 0.0, W).is_err());
    }

    #[test]
    fn quadrature_lags_by_quarter_period() {
        let step = 1e-5;
        let n = 4000;
        let x: Vec<f64> = (0..n).map(|k| (W * k as f64 * step).cos()).collect();
        let y = quadrature_of(&x, W, step).unwrap();
        for k in 500..n {
            let expect = (W * k as f64 * step).sin();
            assert!((y[k] - expect).abs() < 1e-9, "k={k}");
        }
        let zeros = quadrature_of(&[0.0; 100], W, step).unwrap();
        assert!(zeros.iter().all(|&v| v == 0.0));
        assert!(QuadratureDelay::new(W, 3e-5).is_err());
    }
}
