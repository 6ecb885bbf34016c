//! Phase shifts that route given powers through the reference MAB.

use pfcsim::mab::{solve_phase_shifts, MabMagnetics};

fn main() -> pfcsim::Result<()> {
    let mag = MabMagnetics::reference_design();
    let v = [800.0, 50.0, 50.0, 50.0];
    let d = mag.delta_inductances();
    println!("primary-referred L_01 = {:.2} µH", d.get(0, 1) * 1e6);

    // negative: the secondary link is charged
    for targets in [[-1e3, -1e3, -1e3], [-5e3, 2e3, 0.0], [1e3, -3e3, 500.0]] {
        let s = solve_phase_shifts(&targets, &mag, &v)?;
        let deg: Vec<String> = s.phases.iter().map(|p| format!("{:6.3}", p.to_degrees())).collect();
        println!(
            "{targets:?} W -> φ = [{}]°, primary {:.0} W, {} iterations",
            deg.join(", "),
            s.primary_power(),
            s.iterations
        );
    }

    match solve_phase_shifts(&[-1e6, 0.0, 0.0], &mag, &v) {
        Ok(_) => println!("1 MW solved?"),
        Err(e) => println!("1 MW: {e}"),
    }
    Ok(())
}
