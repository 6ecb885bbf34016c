use pfcsim::afe::{afe_gains, design_a, gains_for_a};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn kp_rises_with_inductance_and_falls_with_sampling_time_and_a(
        l in 1e-5..5e-3f64, r in 1e-3..1.0f64, ts in 1e-6..1e-3f64, a in 0.5..10.0f64, k in 1.01..4.0f64,
    ) {
        let (kp, ti) = gains_for_a(l, r, ts, a).unwrap();
        prop_assert!(gains_for_a(l * k, r, ts, a).unwrap().0 > kp);
        prop_assert!(gains_for_a(l, r, ts * k, a).unwrap().0 < kp);
        prop_assert!(gains_for_a(l, r, ts, a * k).unwrap().0 < kp);
        prop_assert!((ti - l / r).abs() <= 1e-15 * ti);
    }

    #[test]
    fn larger_margin_means_lower_gain(pm in 0.0..1.5f64, dpm in 1e-3..0.05f64) {
        let lo = afe_gains(500e-6, 0.1, 1e-4, pm).unwrap().0;
        let hi = afe_gains(500e-6, 0.1, 1e-4, (pm + dpm).min(1.5699)).unwrap().0;
        prop_assert!(hi <= lo);
    }
}

#[test]
fn reference_filter_gains() {
    let a = design_a(std::f64::consts::FRAC_PI_4).unwrap();
    assert!((a - 4.0 / std::f64::consts::PI).abs() < 1e-12);
    let (kp, ti) = afe_gains(500e-6, 0.1, 100e-6, std::f64::consts::FRAC_PI_4).unwrap();
    assert!((kp - 2.618).abs() < 1e-3);
    assert!((ti - 5e-3).abs() < 1e-15);
    assert!(design_a(std::f64::consts::FRAC_PI_2).is_err());
}
