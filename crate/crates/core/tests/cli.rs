use std::process::Command;

use pfcsim::cli::run_cli;
use pfcsim::io::SUMMARY_SCHEMA;

fn cli(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("pfcsim").chain(args.iter().copied());
    let code = run_cli(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn opregion_reports_the_load_angle_limit() {
    let (code, out, _) = cli(&["opregion", "--vdc", "50", "--v1", "230"]);
    assert_eq!(code, 0);
    assert!(out.contains("load angle limit: ±8.84°"), "{out}");
    assert!(out.contains("amplitude limit: 35.36 V rms"), "{out}");
}

#[test]
fn opregion_checks_feeder_pairs_and_loads() {
    let (code, out, _) = cli(&["opregion", "--vdc", "50", "--v1", "230.9", "--v2", "219.4"]);
    assert_eq!(code, 0);
    assert!(out.contains("ΔV = 11.50 V") && out.contains("-> feasible"), "{out}");

    let (_, out, _) = cli(&["opregion", "--vdc", "50", "--v1", "230", "--p", "40000", "--q", "20000"]);
    assert!(out.contains("-> bypass"), "{out}");

    let (code, _, err) = cli(&["opregion", "--vdc", "50", "--v1", "230", "--p", "1"]);
    assert_eq!(code, 1);
    assert!(err.contains("--p and --q"), "{err}");
}

#[test]
fn mab_solve_round_trips_and_flags_infeasible_targets() {
    let (code, out, _) = cli(&["mab-solve", "--targets", "-1000,2000,500"]);
    assert_eq!(code, 0);
    let powers = out.lines().find_map(|l| l.strip_prefix("powers (W): ")).unwrap();
    let p: Vec<f64> = powers.split(',').map(|x| x.parse().unwrap()).collect();
    for (got, want) in p[1..].iter().zip([-1000.0, 2000.0, 500.0]) {
        assert!((got - want).abs() < 1e-6, "{out}");
    }
    assert!((p.iter().sum::<f64>()).abs() < 1e-6);

    let (code, out, err) = cli(&["mab-solve", "--targets", "1e6,0,0"]);
    assert_eq!(code, 2);
    assert!(out.contains("no solution"), "{out}");
    assert!(err.contains("infeasible"), "{err}");

    let (code, _, _) = cli(&["mab-solve", "--targets", "1,2"]);
    assert_eq!(code, 1);
}

#[test]
fn loss_presets_print_their_totals() {
    let (_, out, _) = cli(&["loss"]);
    assert!(out.lines().last().unwrap().contains("1180.92 W"), "{out}");
    let (_, out, _) = cli(&["loss", "--preset", "upfc"]);
    assert!(out.lines().last().unwrap().contains("784.20 W"), "{out}");

    let (_, out, _) = cli(&["loss", "--format", "csv"]);
    let mut rd = csv::Reader::from_reader(out.as_bytes());
    let rows: Vec<(String, f64)> = rd.deserialize().map(|r| r.unwrap()).collect();
    let (parts, total) = rows.split_at(rows.len() - 1);
    assert_eq!(total[0].0, "total");
    assert!((parts.iter().map(|r| r.1).sum::<f64>() - total[0].1).abs() < 1e-9);
}

#[test]
fn compare_reports_ratios() {
    let (code, out, _) = cli(&["compare"]);
    assert_eq!(code, 0);
    assert!(out.contains("weight ratio 0.256, volume ratio 0.289"), "{out}");
    let (_, out, _) = cli(&["compare", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!((v["weight_ratio"].as_f64().unwrap() - 960.0 / 3750.0).abs() < 1e-12);
}

#[test]
fn missing_scenario_file_is_a_config_error() {
    let (code, _, err) = cli(&["run", "no/such/scenario.toml"]);
    assert_eq!(code, 1);
    assert!(err.contains("no such file"), "{err}");
    let (code, _, _) = cli(&["run", "case1", "--step", "-1"]);
    assert_eq!(code, 1);
}

#[test]
fn run_writes_a_valid_bundle_under_pfcsim_out() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_pfcsim"))
        .args(["run", "case1", "--svg"])
        .env("PFCSIM_OUT", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let csv = std::fs::read_to_string(dir.path().join("case1.csv")).unwrap();
    assert!(csv.starts_with("#schema="));
    // schema line, header, then 1 s at one row per 0.1 ms
    assert_eq!(csv.lines().count(), 2 + 10001);

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("case1.summary.json")).unwrap()).unwrap();
    let schema: serde_json::Value = serde_json::from_str(SUMMARY_SCHEMA).unwrap();
    let validator = jsonschema::JSONSchema::compile(&schema).unwrap();
    if let Err(errors) = validator.validate(&summary) {
        let msgs: Vec<String> = errors.map(|e| e.to_string()).collect();
        panic!("summary does not match its schema: {msgs:?}");
    }
    for plot in ["voltages", "currents", "pq", "dc_links"] {
        let svg = std::fs::read_to_string(dir.path().join(format!("case1_{plot}.svg"))).unwrap();
        assert!(svg.contains("<svg"), "{plot}");
    }
}

#[test]
fn sweep_runs_every_step_size() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let (code, out, err) = cli(&["sweep", "case1", "--steps", "1e-5,2e-5", "--out", d]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("case1_h1e-5") && out.contains("case1_h2e-5"), "{out}");
    assert!(dir.path().join("case1_h2e-5.csv").exists());
}
