//! Simulate a preset and write its CSV, summary and plots.
//!
//!     cargo run --release --example run_case -- case3

use std::path::PathBuf;

use pfcsim::io::write_bundle;
use pfcsim::sim::{run_scenario, tail_metrics, Scenario};

fn main() -> pfcsim::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "case1".into());
    let s = Scenario::preset(&name)?;
    println!("{}: {}", s.name, s.description);

    let r = run_scenario(&s)?;
    if let Some(f) = r.fault() {
        println!("fault at {} s: {}", f.time, f.cause);
    }
    for m in tail_metrics(&s, &r.records) {
        println!(
            "{:<26} P1 {:>9.0} W  Q1 {:>8.0} var  P2 {:>9.0} W  Q2 {:>8.0} var",
            m.label, m.p1, m.q1, m.p2, m.q2
        );
    }
    println!("energy audit closes to {:.1e}", r.outcome.audit.relative_imbalance());

    let dir = std::env::var_os("PFCSIM_OUT").map(PathBuf::from).unwrap_or_else(|| "pfcsim-out".into());
    let paths = write_bundle(&r, &dir, true)?;
    println!("wrote {} and {} plots", paths.csv.display(), paths.plots.len());
    Ok(())
}
