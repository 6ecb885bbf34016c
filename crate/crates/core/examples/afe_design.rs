//! Current and bus-voltage loop design of the shunt front end.

use pfcsim::afe::{design_a, DcBusController};
use pfcsim::sim::case1;

fn main() -> pfcsim::Result<()> {
    let p = case1().afe_params();
    let (kp, ti) = p.current_loop_gains()?;
    println!("L_f {:.0} µH, R_f {} Ω, T_s {} µs", p.l_f * 1e6, p.r_f, p.t_s * 1e6);
    println!("a = {:.3} for {:.0}° margin", design_a(p.phase_margin)?, p.phase_margin.to_degrees());
    println!("current loop: K_P {kp:.3} Ω, τ_i {:.2} ms, crossover {:.0} rad/s", ti * 1e3, p.current_loop_crossover()?);

    let u_sum = 3.0 * 230.0 * 2f64.sqrt();
    let bus = DcBusController::design(&p, u_sum)?;
    println!("bus loop: crossover {:.0} rad/s, K_P {:.4}", bus.crossover, bus.pi.kp);
    Ok(())
}
