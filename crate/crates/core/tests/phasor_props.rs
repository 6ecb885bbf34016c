use std::f64::consts::TAU;

use num_complex::Complex64;
use pfcsim::phasor::{from_dq, quadrature_of, to_dq};
use pfcsim::{DqSample, Phasor};
use proptest::prelude::*;

const W: f64 = TAU * 50.0;

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}

fn phasor() -> impl Strategy<Value = Phasor> {
    (-1e3..1e3f64, -1e3..1e3f64).prop_map(|(re, im)| Phasor::new(re, im))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn park_preserves_magnitude(a in -1e4..1e4f64, b in -1e4..1e4f64, theta in -20.0..20.0f64) {
        let s = to_dq(a, b, theta);
        let want = a * a + b * b;
        prop_assert!((s.d * s.d + s.q * s.q - want).abs() <= 1e-12 * want.max(1.0));
    }

    #[test]
    fn park_round_trip(d in -1e4..1e4f64, q in -1e4..1e4f64, theta in -20.0..20.0f64) {
        let (a, b) = from_dq(DqSample::new(d, q, theta));
        let back = to_dq(a, b, theta);
        prop_assert!((back.d - d).abs() < 1e-12 * (1.0 + d.abs().max(q.abs())));
        prop_assert!((back.q - q).abs() < 1e-12 * (1.0 + d.abs().max(q.abs())));
    }

    #[test]
    fn phasor_dq_round_trip(p in phasor(), theta in -10.0..10.0f64) {
        let back = Phasor::from_dq(p.to_dq(theta));
        prop_assert!(close(back.complex(), p.complex(), 1e-12));
    }

    #[test]
    fn field_axioms(x in phasor(), y in phasor(), z in phasor()) {
        let (a, b, c) = (x.complex(), y.complex(), z.complex());
        let scale = 1e6;
        prop_assert!(close((a + b) + c, a + (b + c), 1e-12));
        prop_assert!(close(a * (b + c), a * b + a * c, 1e-12 * scale));
        prop_assert!(close((a * b) * c, a * (b * c), 1e-12 * scale));
        if b.norm() > 1e-3 {
            prop_assert!(close((a / b) * b, a, 1e-12));
        }
        prop_assert!(close(a - b + b, a, 1e-12));
    }
}

#[test]
fn quadrature_then_park_is_constant() {
    let h = 1e-5;
    let amp = 230.0 * 2f64.sqrt();
    let x: Vec<f64> = (0..6000).map(|k| amp * (W * k as f64 * h + 0.3).cos()).collect();
    let beta = quadrature_of(&x, W, h).unwrap();
    let quarter = 500;
    let dq: Vec<DqSample> = (quarter..x.len()).map(|k| to_dq(x[k], beta[k], W * k as f64 * h)).collect();
    let d_max = dq.iter().map(|s| s.d).fold(f64::MIN, f64::max);
    let d_min = dq.iter().map(|s| s.d).fold(f64::MAX, f64::min);
    let q_max = dq.iter().map(|s| s.q).fold(f64::MIN, f64::max);
    let q_min = dq.iter().map(|s| s.q).fold(f64::MAX, f64::min);
    assert!((d_max - d_min) < 1e-3 * amp, "d ripple {}", d_max - d_min);
    assert!((q_max - q_min) < 1e-3 * amp, "q ripple {}", q_max - q_min);
    // d + jq = A·e^{j0.3}
    assert!((dq[0].d - amp * 0.3f64.cos()).abs() < 1e-6 * amp);
    assert!((dq[0].q - amp * 0.3f64.sin()).abs() < 1e-6 * amp);
}
