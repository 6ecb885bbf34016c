//! Scenario files and result bundles.

mod csv_out;
mod scenario_file;
mod summary;
mod svg;

pub use csv_out::{write_csv, CsvSink, CSV_SCHEMA};
pub use scenario_file::{load_scenario, parse_scenario, resolve_scenario, scenario_to_toml};
pub use summary::{region_verdicts, RegionVerdict, SteadyStateEntry, Summary, SUMMARY_SCHEMA, SUMMARY_VERSION};
pub use svg::{render_plots, PlotFile};

use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::sim::SimResult;

/// Files written for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct BundlePaths {
    pub csv: PathBuf,
    pub summary: PathBuf,
    pub plots: Vec<PathBuf>,
}

/// Writes `<name>.csv`, `<name>.summary.json` and, with `svg`, one plot per
/// figure group into `dir`.
pub fn write_bundle(result: &SimResult, dir: &Path, svg: bool) -> Result<BundlePaths> {
    std::fs::create_dir_all(dir)?;
    let name = &result.scenario.name;
    let csv = dir.join(format!("{name}.csv"));
    write_csv(&csv, &result.records)?;
    let summary = dir.join(format!("{name}.summary.json"));
    let s = Summary::from_result(result)?;
    std::fs::write(&summary, s.to_json()?)?;
    let mut plots = Vec::new();
    if svg {
        for p in render_plots(result) {
            let path = dir.join(format!("{name}_{}.svg", p.group));
            std::fs::write(&path, p.svg)?;
            plots.push(path);
        }
    }
    Ok(BundlePaths { csv, summary, plots })
}
