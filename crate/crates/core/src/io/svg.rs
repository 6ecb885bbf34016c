//! Self-contained SVG line plots, one file per figure group.

use std::fmt::Write;

use crate::sim::{SimResult, TimeSeriesRecord};

const WIDTH: f64 = 900.0;
const PANEL_H: f64 = 240.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 130.0;
const TOP: f64 = 40.0;
const GAP: f64 = 50.0;
const MAX_POINTS: usize = 2000;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

pub struct PlotFile {
    /// `voltages`, `currents`, `pq` or `dc_links`.
    pub group: &'static str,
    pub svg: String,
}

type Getter = fn(&TimeSeriesRecord) -> f64;

struct Panel {
    ylabel: &'static str,
    series: Vec<(&'static str, Getter)>,
}

fn nice_range(lo: f64, hi: f64) -> (f64, f64) {
    if !(lo.is_finite() && hi.is_finite()) {
        return (-1.0, 1.0);
    }
    if hi - lo < 1e-9 * (1.0 + hi.abs()) {
        let pad = 1.0f64.max(hi.abs() * 0.05);
        return (lo - pad, hi + pad);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn tick(v: f64) -> String {
    let a = v.abs();
    if a >= 1000.0 {
        format!("{v:.0}")
    } else if a >= 10.0 {
        format!("{v:.2}")
    } else {
        format!("{v:.3}")
    }
}

fn render(title: &str, records: &[TimeSeriesRecord], panels: &[Panel]) -> String {
    let height = TOP + panels.len() as f64 * (PANEL_H + GAP);
    let plot_w = WIDTH - LEFT - RIGHT;
    let stride = (records.len() / MAX_POINTS).max(1);
    let pts: Vec<&TimeSeriesRecord> = records.iter().step_by(stride).collect();
    let (t0, t1) = match (records.first(), records.last()) {
        (Some(a), Some(b)) if b.time > a.time => (a.time, b.time),
        _ => (0.0, 1.0),
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" font-size="15" text-anchor="middle">{title}</text>"#, WIDTH / 2.0);

    for (n, panel) in panels.iter().enumerate() {
        let y0 = TOP + n as f64 * (PANEL_H + GAP);
        let vals = pts.iter().flat_map(|r| panel.series.iter().map(move |(_, f)| f(r)));
        let lo = vals.clone().fold(f64::INFINITY, f64::min);
        let hi = vals.fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi) = nice_range(lo, hi);
        let x = |t: f64| LEFT + (t - t0) / (t1 - t0) * plot_w;
        let y = |v: f64| y0 + PANEL_H - (v - lo) / (hi - lo) * PANEL_H;

        let _ = writeln!(
            s,
            r##"<rect x="{LEFT}" y="{y0}" width="{plot_w}" height="{PANEL_H}" fill="none" stroke="#444"/>"##
        );
        for k in 0..=4 {
            let v = lo + (hi - lo) * k as f64 / 4.0;
            let t = t0 + (t1 - t0) * k as f64 / 4.0;
            let _ = writeln!(
                s,
                r##"<line x1="{LEFT}" x2="{}" y1="{yy:.2}" y2="{yy:.2}" stroke="#ddd"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"##,
                LEFT + plot_w,
                LEFT - 6.0,
                y(v) + 4.0,
                tick(v),
                yy = y(v)
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{}" text-anchor="middle">{t:.3}</text>"#,
                x(t),
                y0 + PANEL_H + 16.0
            );
        }
        let _ = writeln!(
            s,
            r#"<text transform="translate(16,{}) rotate(-90)" text-anchor="middle">{}</text>"#,
            y0 + PANEL_H / 2.0,
            panel.ylabel
        );
        for (k, (name, f)) in panel.series.iter().enumerate() {
            let color = COLORS[k % COLORS.len()];
            let mut path = String::new();
            for r in &pts {
                let v = f(r);
                if v.is_finite() {
                    let _ = write!(path, "{:.2},{:.2} ", x(r.time), y(v));
                }
            }
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1" points="{}"/>"#,
                path.trim_end()
            );
            let ly = y0 + 14.0 + 16.0 * k as f64;
            let _ = writeln!(
                s,
                r#"<line x1="{}" x2="{}" y1="{ly}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{name}</text>"#,
                WIDTH - RIGHT + 10.0,
                WIDTH - RIGHT + 30.0,
                WIDTH - RIGHT + 36.0,
                ly + 4.0
            );
        }
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">time (s)</text>"#,
        LEFT + plot_w / 2.0,
        height - 8.0
    );
    s.push_str("</svg>\n");
    s
}

pub fn render_plots(r: &SimResult) -> Vec<PlotFile> {
    let name = &r.scenario.name;
    let recs = &r.records;
    let groups: [(&'static str, &str, Vec<Panel>); 4] = [
        (
            "voltages",
            "feeder and injected voltages",
            vec![
                Panel {
                    ylabel: "v1 (V)",
                    series: vec![("v1 a", |r| r.v1[0]), ("v1 b", |r| r.v1[1]), ("v1 c", |r| r.v1[2])],
                },
                Panel {
                    ylabel: "vs (V)",
                    series: vec![("vs a", |r| r.vs[0]), ("vs b", |r| r.vs[1]), ("vs c", |r| r.vs[2])],
                },
            ],
        ),
        (
            "currents",
            "line currents",
            vec![
                Panel {
                    ylabel: "i (A)",
                    series: vec![("i a", |r| r.i[0]), ("i b", |r| r.i[1]), ("i c", |r| r.i[2])],
                },
                Panel {
                    ylabel: "i rms (A)",
                    series: vec![("a", |r| r.i_rms[0]), ("b", |r| r.i_rms[1]), ("c", |r| r.i_rms[2])],
                },
            ],
        ),
        (
            "pq",
            "three-phase power",
            vec![Panel {
                ylabel: "W, var",
                series: vec![
                    ("P1", TimeSeriesRecord::p1_total),
                    ("Q1", TimeSeriesRecord::q1_total),
                    ("P2", TimeSeriesRecord::p2_total),
                    ("Q2", TimeSeriesRecord::q2_total),
                ],
            }],
        ),
        (
            "dc_links",
            "dc voltages",
            vec![
                Panel {
                    ylabel: "series links (V)",
                    series: vec![("vdc a", |r| r.v_dc[0]), ("vdc b", |r| r.v_dc[1]), ("vdc c", |r| r.v_dc[2])],
                },
                Panel {
                    ylabel: "AFE bus (V)",
                    series: vec![("bus", |r| r.v_bus)],
                },
            ],
        ),
    ];
    groups
        .into_iter()
        .map(|(group, title, panels)| PlotFile {
            group,
            svg: render(&format!("{name}: {title}"), recs, &panels),
        })
        .collect()
}
