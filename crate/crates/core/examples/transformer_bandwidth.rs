//! Core-loss limited bandwidth of the MAB transformer.

use pfcsim::loss::{bertotti_density, transformer_bandwidth, transformer_gain, BertottiParams};

fn main() -> pfcsim::Result<()> {
    let p = BertottiParams::calibrated();
    let bw = transformer_bandwidth(&p)?;
    println!("3 dB point {:.1} Hz (core volume {:.4} m³)", bw.frequency, p.volume);
    // past the point where core loss exceeds P_in the absolute value folds back up
    for f in [50.0, 200.0, 500.0, 1e3, 1.5e3] {
        println!("  {f:>6} Hz: {:>10.1} W/m³, gain {:.4}", bertotti_density(f, &p), transformer_gain(f, &p));
    }

    let thin = BertottiParams { thickness: p.thickness / 2.0, ..p };
    println!("half-thickness laminations: {:.1} Hz", transformer_bandwidth(&thin)?.frequency);
    Ok(())
}
