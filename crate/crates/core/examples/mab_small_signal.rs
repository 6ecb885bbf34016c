//! Linearised MAB around an operating point and the PI tuning built on it.

use pfcsim::mab::*;

fn main() -> pfcsim::Result<()> {
    let mag = MabMagnetics::reference_design();
    let v = vec![800.0, 50.0, 50.0, 50.0];
    let sol = solve_phase_shifts(&[-2e3, -1e3, -3e3], &mag, &v)?;
    let op = MabOperatingPoint::unloaded(v, sol.phases.clone())?;
    let g = small_signal_gains(&op, &mag)?;

    for i in 1..4 {
        let cross: Vec<String> = (1..4).filter(|j| *j != i).map(|j| format!("{:.1}", g.k_phi_ij(i, j))).collect();
        println!("link {i}: K_φ {:.1} A/rad, couplings [{}]", g.k_phi(i), cross.join(", "));
    }
    println!("decoupling offsets {:?}", decoupling_terms(&g, &sol.phases)?);

    let params = MabControlParams::default();
    let ctl = MabController::new(&mag, params.clone())?;
    let printed = mab_pi_tuning(g.k_phi(1), params.t_d, params.phase_margin, params.capacitance, f64::INFINITY)?;
    println!("printed tuning: ω_c {:.0} rad/s, K_P {:.4}", printed.omega_c, printed.kp);

    let kp = scheduled_kp(g.k_phi(1), ctl.omega_c(), ctl.ti(), f64::INFINITY, params.capacitance);
    let pm = phase_margin(kp, ctl.ti(), params.t_d, g.k_phi(1), f64::INFINITY, params.capacitance);
    println!(
        "used: ω_c {:.0} rad/s, τ_i {:.2} ms, K_P {kp:.2e} rad/V, margin {:.1}°",
        ctl.omega_c(),
        ctl.ti() * 1e3,
        pm.unwrap_or(f64::NAN).to_degrees()
    );
    Ok(())
}
