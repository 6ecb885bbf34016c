//! Where can a 50 V series module still compensate?
//!
//!     cargo run --example operating_region

use pfcsim::series::{pq_load_operating_region, two_feeder_operating_region};

fn main() -> pfcsim::Result<()> {
    let r = pq_load_operating_region(50.0, 230.0)?;
    println!("load angle limit ±{:.2}°", r.load_angle_limit.to_degrees());
    println!("injection limit {:.2} V rms", r.amplitude_limit);

    for (p, q) in [(40e3, 5.621e3), (40e3, 6.5e3), (10e3, -3e3)] {
        let verdict = if r.admits_load(p, q) { "ok" } else { "bypass" };
        println!("  load {:>6.0} W {:>+6.0} var  {:>5.2}°  {verdict}", p, q, q.atan2(p).to_degrees());
    }

    // 400 V against 380 V line-to-line
    let (v1, v2) = (400.0 / 3f64.sqrt(), 380.0 / 3f64.sqrt());
    for angle in [0.0, 5.0, 12.0] {
        let t = two_feeder_operating_region(50.0, v1, v2, f64::to_radians(angle))?;
        println!(
            "feeders {v1:.1}/{v2:.1} V at {angle:>4.1}°: ΔV {:.2} V -> {}",
            t.amplitude_difference,
            if t.feasible { "feasible" } else { "bypass" }
        );
    }
    Ok(())
}
