//! `pfcsim` command line.
//!
//! Exit codes: 0 success, 1 configuration or input error, 2 simulation fault
//! or solver non-convergence.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io::{resolve_scenario, write_bundle, Summary};
use crate::loss::{
    reference_loss_report, system_loss_report, topology_comparison, upfc_loss_report, LossBreakdown, StageDevices,
};
use crate::mab::{solve_phase_shifts, MabMagnetics};
use crate::series::{pq_load_operating_region, two_feeder_operating_region};
use crate::sim::{run_scenario, Scenario, SimResult, PRESETS};

#[derive(Debug, Parser)]
#[command(name = "pfcsim", version, about = "Series power-flow controller simulator and design calculators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a preset (case1..case4, bench) or a scenario TOML file.
    Run(RunArgs),
    /// Operating area of the series modules.
    Opregion(OpregionArgs),
    /// Solve MAB phase shifts for secondary power targets.
    MabSolve(MabSolveArgs),
    /// Loss breakdown of the router.
    Loss(LossArgs),
    /// One MAB against three DABs.
    Compare(FormatArg),
    /// Run several scenarios in parallel.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output directory.
    #[arg(long, env = "PFCSIM_OUT", default_value = "pfcsim-out")]
    pub out: PathBuf,
    /// Also write SVG plots.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Preset name or path to a scenario file.
    pub scenario: String,
    /// Integration step, seconds.
    #[arg(long)]
    pub step: Option<f64>,
    /// Simulated time, seconds.
    #[arg(long)]
    pub duration: Option<f64>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct OpregionArgs {
    /// Series module dc-link voltage.
    #[arg(long, allow_negative_numbers = true)]
    pub vdc: f64,
    /// Feeder 1 phase voltage, rms.
    #[arg(long, allow_negative_numbers = true)]
    pub v1: f64,
    /// Feeder 2 phase voltage, rms.
    #[arg(long, allow_negative_numbers = true)]
    pub v2: Option<f64>,
    /// Angle of feeder 1 relative to feeder 2, degrees.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub angle: f64,
    /// Candidate load active power (with --q).
    #[arg(long, allow_negative_numbers = true)]
    pub p: Option<f64>,
    /// Candidate load reactive power (with --p).
    #[arg(long, allow_negative_numbers = true)]
    pub q: Option<f64>,
}

#[derive(Debug, Args)]
pub struct MabSolveArgs {
    /// Secondary power targets in watts, positive out of the bridge.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub targets: Vec<f64>,
    /// Magnetics TOML file; defaults to the reference design.
    #[arg(long)]
    pub magnetics: Option<PathBuf>,
    /// Winding dc voltages, primary first.
    #[arg(long, value_delimiter = ',')]
    pub voltages: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LossPreset {
    Reference,
    Upfc,
    Typical,
    Calibrated,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct FormatArg {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct LossArgs {
    #[arg(long, value_enum, default_value_t = LossPreset::Reference, conflicts_with = "devices")]
    pub preset: LossPreset,
    /// Device TOML file (stage device lists plus fixed magnetics losses).
    #[arg(long)]
    pub devices: Option<PathBuf>,
    #[command(flatten)]
    pub format: FormatArg,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Presets or scenario files; all presets when empty.
    pub scenarios: Vec<String>,
    /// Integration steps to try for every scenario.
    #[arg(long, value_delimiter = ',')]
    pub steps: Vec<f64>,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return 1;
            }
            let _ = write!(out, "{e}");
            return 0;
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(&a, out),
        Command::Opregion(a) => cmd_opregion(&a, out),
        Command::MabSolve(a) => cmd_mab_solve(&a, out),
        Command::Loss(a) => cmd_loss(&a, out),
        Command::Compare(a) => cmd_compare(a.format, out),
        Command::Sweep(a) => cmd_sweep(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::Infeasible { .. } | Error::Degenerate(_) => 2,
                _ => 1,
            }
        }
    }
}

/// Entry point of the binary.
pub fn main() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    run_cli(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr())
}

fn prepare(name: &str, step: Option<f64>, duration: Option<f64>) -> Result<Scenario> {
    let mut s = resolve_scenario(name)?;
    if let Some(h) = step {
        s.step = h;
    }
    if let Some(d) = duration {
        s.duration = d;
        s.events.retain(|e| e.time < d);
    }
    s.validate()?;
    Ok(s)
}

fn report_run(r: &SimResult, dir: &Path, svg: bool, out: &mut dyn Write) -> Result<i32> {
    let paths = write_bundle(r, dir, svg)?;
    let summary = Summary::from_result(r)?;
    writeln!(out, "{}: {} records, {} steps", r.scenario.name, summary.records, summary.steps)?;
    for w in &summary.warnings {
        writeln!(out, "  warning: {w}")?;
    }
    for m in &summary.intervals {
        writeln!(
            out,
            "  {:<28} P1 {:>10.1} W  Q1 {:>10.1} var  P2 {:>10.1} W  I {:>7.2?} A  links {:.2}..{:.2} V",
            m.label, m.p1, m.q1, m.p2, m.i_rms, m.v_dc_min, m.v_dc_max
        )?;
    }
    writeln!(out, "  audit imbalance {:.3e} of gross", r.outcome.audit.relative_imbalance())?;
    writeln!(out, "  wrote {}", paths.csv.display())?;
    writeln!(out, "  wrote {}", paths.summary.display())?;
    for p in &paths.plots {
        writeln!(out, "  wrote {}", p.display())?;
    }
    Ok(match r.fault() {
        Some(f) => {
            writeln!(out, "  FAULT at t = {} s: {}", f.time, f.cause)?;
            2
        }
        None => 0,
    })
}

fn cmd_run(a: &RunArgs, out: &mut dyn Write) -> Result<i32> {
    let s = prepare(&a.scenario, a.step, a.duration)?;
    let r = run_scenario(&s)?;
    report_run(&r, &a.out.out, a.out.svg, out)
}

fn cmd_opregion(a: &OpregionArgs, out: &mut dyn Write) -> Result<i32> {
    if !(a.vdc >= 0.0) || !(a.v1 > 0.0) || a.v2.is_some_and(|v| !(v > 0.0)) {
        return Err(Error::Config("need --vdc >= 0 and positive --v1/--v2".into()));
    }
    let r = pq_load_operating_region(a.vdc, a.v1)?;
    writeln!(out, "load angle limit: ±{:.2}°", r.load_angle_limit.to_degrees())?;
    writeln!(out, "amplitude limit: {:.2} V rms", r.amplitude_limit)?;
    writeln!(out, "phase limit: ±{:.2}°", r.phase_limit.to_degrees())?;
    if r.unrestricted {
        writeln!(out, "injection exceeds the feeder voltage: every load angle is reachable")?;
    }
    if let Some(v2) = a.v2 {
        let t = two_feeder_operating_region(a.vdc, a.v1, v2, a.angle.to_radians())?;
        writeln!(
            out,
            "feeders: ΔV = {:.2} V, Δθ = {:.2}° -> {}",
            t.amplitude_difference.abs(),
            a.angle,
            if t.feasible { "feasible" } else { "bypass" }
        )?;
    }
    match (a.p, a.q) {
        (Some(p), Some(q)) => {
            let angle = q.atan2(p).to_degrees();
            writeln!(
                out,
                "load {p} W + j{q} var: angle {angle:.2}° -> {}",
                if r.admits_load(p, q) { "feasible" } else { "bypass" }
            )?;
        }
        (None, None) => {}
        _ => return Err(Error::Config("--p and --q go together".into())),
    }
    Ok(0)
}

fn read_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_path_to_error::deserialize(toml::Deserializer::new(&text))
        .map_err(|e| Error::Config(format!("{}: {}: {}", path.display(), e.path(), e.inner().message().trim())))
}

fn cmd_mab_solve(a: &MabSolveArgs, out: &mut dyn Write) -> Result<i32> {
    let mag = match &a.magnetics {
        Some(p) => read_toml::<MabMagnetics>(p)?,
        None => MabMagnetics::reference_design(),
    };
    mag.validate()?;
    let n = mag.windings();
    let voltages = match &a.voltages {
        Some(v) => v.clone(),
        None => std::iter::once(800.0).chain(std::iter::repeat(50.0)).take(n).collect(),
    };
    if a.targets.len() + 1 != n || voltages.len() != n {
        return Err(Error::Config(format!(
            "{n} windings need {} targets and {n} voltages",
            n - 1
        )));
    }
    match solve_phase_shifts(&a.targets, &mag, &voltages) {
        Ok(sol) => {
            let deg: Vec<String> = sol.phases.iter().map(|p| format!("{:.6}", p.to_degrees() + 0.0)).collect();
            writeln!(out, "phases (deg): {}", deg.join(","))?;
            writeln!(out, "phases (rad): {}", join(&sol.phases))?;
            writeln!(out, "powers (W): {}", join(&sol.powers))?;
            writeln!(out, "primary power (W): {}", sol.primary_power())?;
            writeln!(out, "residual (W): {:e}", sol.residual)?;
            writeln!(out, "iterations: {}", sol.iterations)?;
            Ok(0)
        }
        Err(e @ (Error::Infeasible { .. } | Error::Degenerate(_))) => {
            writeln!(out, "no solution on the |Δφ| <= π/2 branch")?;
            writeln!(out, "targets (W): {}", join(&a.targets))?;
            Err(e)
        }
        Err(e) => Err(e),
    }
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{}", x + 0.0)).collect::<Vec<_>>().join(",")
}

fn print_breakdown(b: &LossBreakdown, f: Format, out: &mut dyn Write) -> Result<()> {
    match f {
        Format::Text => {
            for (name, w) in b.entries() {
                writeln!(out, "{name:<24} {w:>10.2} W")?;
            }
            writeln!(out, "{:<24} {:>10.2} W", "total", b.total())?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            let csv_err = |e: csv::Error| Error::Io(e.to_string());
            w.write_record(["stage", "watts"]).map_err(csv_err)?;
            for (name, v) in b.entries() {
                w.write_record([name.clone(), format!("{v}")]).map_err(csv_err)?;
            }
            w.write_record(["total".to_string(), format!("{}", b.total())]).map_err(csv_err)?;
            w.flush()?;
        }
        Format::Json => {
            writeln!(out, "{}", serde_json::to_string_pretty(b).map_err(|e| Error::Io(e.to_string()))?)?;
        }
    }
    Ok(())
}

fn cmd_loss(a: &LossArgs, out: &mut dyn Write) -> Result<i32> {
    let b = match (&a.devices, a.preset) {
        (Some(p), _) => system_loss_report(&read_toml::<StageDevices>(p)?)?,
        (None, LossPreset::Reference) => reference_loss_report(),
        (None, LossPreset::Upfc) => upfc_loss_report(),
        (None, LossPreset::Typical) => system_loss_report(&StageDevices::typical())?,
        (None, LossPreset::Calibrated) => system_loss_report(&StageDevices::calibrated())?,
        (None, LossPreset::Zero) => system_loss_report(&StageDevices::zero())?,
    };
    print_breakdown(&b, a.format.format, out)?;
    Ok(0)
}

fn cmd_compare(f: Format, out: &mut dyn Write) -> Result<i32> {
    let c = topology_comparison();
    match f {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&c).map_err(|e| Error::Io(e.to_string()))?)?,
        _ => {
            let rows: [(&str, f64, f64); 9] = [
                ("HV switches", c.mab.hv_switches as f64, c.three_dab.hv_switches as f64),
                ("LV switches", c.mab.lv_switches as f64, c.three_dab.lv_switches as f64),
                ("HV capacitors", c.mab.hv_capacitors as f64, c.three_dab.hv_capacitors as f64),
                ("LV capacitors", c.mab.lv_capacitors as f64, c.three_dab.lv_capacitors as f64),
                ("HV switch rms (A)", c.mab.hv_switch_rms_a, c.three_dab.hv_switch_rms_a),
                ("LV switch rms (A)", c.mab.lv_switch_rms_a, c.three_dab.lv_switch_rms_a),
                ("transformers", c.mab.transformers as f64, c.three_dab.transformers as f64),
                ("weight (g)", c.mab.weight_g, c.three_dab.weight_g),
                ("volume (cm3)", c.mab.volume_cm3, c.three_dab.volume_cm3),
            ];
            if f == Format::Csv {
                writeln!(out, "quantity,mab,three_dab")?;
                for (n, a, b) in rows {
                    writeln!(out, "{n},{a},{b}")?;
                }
            } else {
                writeln!(out, "{:<20} {:>10} {:>10}", "", "MAB", "3 x DAB")?;
                for (n, a, b) in rows {
                    writeln!(out, "{n:<20} {a:>10} {b:>10}")?;
                }
                writeln!(out, "weight ratio {:.3}, volume ratio {:.3}, HV switch ratio {:.3}", c.weight_ratio, c.volume_ratio, c.hv_switch_ratio)?;
            }
        }
    }
    Ok(0)
}

fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write) -> Result<i32> {
    let names: Vec<String> = if a.scenarios.is_empty() {
        PRESETS.iter().map(|s| s.to_string()).collect()
    } else {
        a.scenarios.clone()
    };
    let mut jobs = Vec::new();
    for n in &names {
        if a.steps.is_empty() {
            jobs.push(prepare(n, None, None)?);
        } else {
            for &h in &a.steps {
                let mut s = prepare(n, Some(h), None)?;
                s.name = format!("{}_h{h:e}", s.name);
                jobs.push(s);
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let results: Vec<Result<SimResult>> = pool.install(|| jobs.par_iter().map(run_scenario).collect());
    let mut code = 0;
    writeln!(out, "{:<20} {:>8} {:>12} {:>12} {:>8} {:>8}", "scenario", "status", "P1 end (W)", "Q1 end (var)", "spread", "links")?;
    for r in results {
        let r = r?;
        let mut sink = Vec::new();
        let c = report_run(&r, &a.out.out, a.out.svg, &mut sink)?;
        code = code.max(c);
        let summary = Summary::from_result(&r)?;
        let end = summary.intervals.last();
        writeln!(
            out,
            "{:<20} {:>8} {:>12.1} {:>12.1} {:>8.4} {:>4.1}..{:.1}",
            r.scenario.name,
            if c == 0 { "ok" } else { "fault" },
            end.map_or(f64::NAN, |m| m.p1),
            end.map_or(f64::NAN, |m| m.q1),
            end.map_or(f64::NAN, |m| m.current_spread),
            summary.v_dc_min,
            summary.v_dc_max
        )?;
    }
    writeln!(out, "bundles in {}", a.out.out.display())?;
    Ok(code)
}
