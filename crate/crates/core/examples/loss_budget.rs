//! Loss budget of the router against a UPFC, plus the hardware comparison.

use pfcsim::loss::*;

fn show(title: &str, b: &LossBreakdown) {
    println!("{title}");
    for (stage, w) in b.entries() {
        println!("  {stage:<20} {w:>8.2} W");
    }
    println!("  {:<20} {:>8.2} W", "total", b.total());
}

fn main() -> pfcsim::Result<()> {
    show("quoted figures", &reference_loss_report());
    show("UPFC", &upfc_loss_report());
    show("device model, calibrated", &system_loss_report(&StageDevices::calibrated())?);

    let one = SwitchParams {
        r_on: 1.5e-3,
        c_oss: 5e-9,
        t_switch: 20e-9,
        v_dc: 50.0,
        f_sw: 50e3,
        i_rms: 100.0,
        i_avg: 90.0,
        count: 1,
    };
    println!("one switch: {:.2} W conduction + {:.4} W switching", one.conduction(), one.switching());

    let c = topology_comparison();
    println!("MAB vs three DABs: weight {:.3}, volume {:.3}, HV switches {:.3}", c.weight_ratio, c.volume_ratio, c.hv_switch_ratio);
    Ok(())
}
