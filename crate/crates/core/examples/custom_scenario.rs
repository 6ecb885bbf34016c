//! Start from a preset, edit it as TOML, and stream the run to CSV.

use pfcsim::io::{parse_scenario, scenario_to_toml, CsvSink};
use pfcsim::sim::{case2, run_scenario_with};

fn main() -> pfcsim::Result<()> {
    let text = scenario_to_toml(&case2())?;
    println!("{}", text.lines().take(12).collect::<Vec<_>>().join("\n"));
    println!("...");

    // a weaker dc link and a shorter run
    let text = text.replace("v_dc = 50.0", "v_dc = 40.0").replace("duration = 1.0", "duration = 0.8");
    let mut s = parse_scenario(&text)?;
    s.name = "case2_40V".into();
    println!("series link now {} V, run {} s", s.series.v_dc, s.duration);

    let mut sink = CsvSink::new(Vec::new())?;
    let mut failed = None;
    let out = run_scenario_with(&s, |rec| {
        if let Err(e) = sink.push(rec) {
            failed.get_or_insert(e);
        }
    })?;
    if let Some(e) = failed {
        return Err(e);
    }
    let bytes = sink.finish()?;
    println!("{}: {} CSV bytes, ended at {} s", s.name, bytes.len(), out.end_time);
    for w in &out.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
