//! Series voltage commands for the two textbook uses of the stage.

use std::f64::consts::TAU;

use pfcsim::series::{
    pq_load_power, reactive_compensation_command, two_feeder_command, two_feeder_injected_power,
};
use pfcsim::{Impedance, Phasor};

fn main() -> pfcsim::Result<()> {
    let w = TAU * 50.0;

    // cancel the reactive power of a 40 kW / 5.6 kvar load
    let v1 = Phasor::from_polar(230.0, 0.0);
    let load = Impedance::from_power(40e3 / 3.0, 5.621e3 / 3.0, 230.0, w)?;
    let cmd = reactive_compensation_command(load.angle());
    let (p, q) = pq_load_power(v1, cmd, &load)?;
    println!("load case: r = {:.4}, γ = {:.1}°  ->  P {:.0} W, Q {:.2e} var per phase", cmd.r, cmd.gamma.to_degrees(), p, q);

    // push 5 kW per phase against a 1° angle between feeders
    let v1 = Phasor::from_polar_deg(230.9, -1.0);
    let v2 = Phasor::from_polar(219.4, 0.0);
    let x_g = 0.05;
    for (p, q) in [(5e3, 0.0), (-5e3, 0.0), (2e3, 2e3)] {
        let cmd = two_feeder_command(v1, v2, x_g, p, q)?;
        let (pp, qq) = two_feeder_injected_power(v1, v2, cmd, x_g)?;
        let vs = cmd.to_phasor(v1);
        println!(
            "two feeders: want {p:>6.0} W {q:>6.0} var, |Vs| = {:6.2} V at {:7.2}°, got {pp:.1} W {qq:.1} var",
            vs.magnitude(),
            vs.angle().to_degrees()
        );
    }
    Ok(())
}
