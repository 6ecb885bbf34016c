//! Phasors, Park frames and the quarter-period quadrature copy.

use std::f64::consts::TAU;

use pfcsim::phasor::{quadrature_of, to_dq};
use pfcsim::{Phasor, ThreePhaseSet};

fn main() -> pfcsim::Result<()> {
    let w = TAU * 50.0;
    let v = Phasor::from_polar_deg(230.0, 20.0);
    let dq = v.to_dq(0.0);
    println!("230 V at 20° -> d {:.2}, q {:.2} (peak)", dq.d, dq.q);
    let back = Phasor::from_dq(dq);
    println!("back: {:.2} V at {:.2}°", back.magnitude(), back.angle().to_degrees());

    let set = ThreePhaseSet::<Phasor>::from_magnitudes([200.0, 230.0, 250.0], 0.0);
    for (k, p) in set.iter().enumerate() {
        println!("phase {k}: {:.0} V at {:>7.2}°", p.magnitude(), p.angle().to_degrees());
    }

    // a sampled cosine, its delayed quadrature and the resulting d-q pair
    let h = 1e-4;
    let x: Vec<f64> = (0..400).map(|k| 325.0 * (w * k as f64 * h).cos()).collect();
    let beta = quadrature_of(&x, w, h)?;
    for k in [50, 150, 300] {
        let s = to_dq(x[k], beta[k], w * k as f64 * h);
        println!("t = {:>4.1} ms: d {:7.2}, q {:7.2}", k as f64 * h * 1e3, s.d, s.q);
    }
    Ok(())
}
