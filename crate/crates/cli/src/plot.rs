//! Minimal SVG line charts for the result files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};
use crate::io;

const WIDTH: f64 = 880.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 360.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const MAX_LEGEND: usize = 16;
const PALETTE: [&str; 8] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Tick positions at 1, 2 or 5 times a power of ten.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * step {
        out.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
        t += step;
    }
    out
}

fn label(x: f64) -> String {
    let s = format!("{:.4}", x);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        (lo - 0.5 * lo.abs().max(1.0), hi + 0.5 * hi.abs().max(1.0))
    }
}

impl Chart {
    pub fn to_svg(&self) -> Result<String> {
        let finite: Vec<(f64, f64)> = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().copied())
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .collect();
        if finite.is_empty() {
            return Err(CliError::format(&self.title, "nothing to plot"));
        }
        let (x0, x1) = padded(
            finite.iter().map(|p| p.0).fold(f64::INFINITY, f64::min),
            finite.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max),
        );
        let (y0, y1) = padded(
            finite.iter().map(|p| p.1).fold(f64::INFINITY, f64::min),
            finite.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max),
        );
        let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            LEFT + pw / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
        for t in ticks(x0, x1) {
            let x = sx(t);
            let _ = writeln!(
                s,
                r#"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="black"/><text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                TOP + ph,
                TOP + ph + 5.0,
                TOP + ph + 18.0,
                label(t)
            );
        }
        for t in ticks(y0, y1) {
            let y = sy(t);
            let _ = writeln!(
                s,
                r#"<line x1="{:.1}" y1="{y:.1}" x2="{LEFT}" y2="{y:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
                LEFT - 5.0,
                LEFT - 8.0,
                y + 4.0,
                label(t)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0,
            escape(&self.y_label)
        );
        for (i, series) in self.series.iter().enumerate() {
            let colour = PALETTE[i % PALETTE.len()];
            let dash = if series.dashed { r#" stroke-dasharray="6 3""# } else { "" };
            // Non-finite values break the line.
            let mut segments: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
            for &(x, y) in &series.points {
                if x.is_finite() && y.is_finite() {
                    segments.last_mut().unwrap().push((sx(x), sy(y)));
                } else if !segments.last().unwrap().is_empty() {
                    segments.push(Vec::new());
                }
            }
            for seg in segments.iter().filter(|s| !s.is_empty()) {
                let pts: Vec<String> = seg.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
                let _ = writeln!(
                    s,
                    r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"{dash}/>"#,
                    pts.join(" ")
                );
                if seg.len() == 1 {
                    let _ =
                        writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{colour}"/>"#, seg[0].0, seg[0].1);
                }
            }
            if i < MAX_LEGEND {
                let y = TOP + 10.0 + 16.0 * i as f64;
                let lx = WIDTH - RIGHT + 12.0;
                let _ = writeln!(
                    s,
                    r#"<line x1="{lx:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="{colour}" stroke-width="2"{dash}/><text x="{:.1}" y="{:.1}">{}</text>"#,
                    lx + 20.0,
                    lx + 25.0,
                    y + 4.0,
                    escape(&series.name)
                );
            } else if i == MAX_LEGEND {
                let y = TOP + 10.0 + 16.0 * i as f64;
                let _ = writeln!(
                    s,
                    r#"<text x="{:.1}" y="{:.1}">… {} more</text>"#,
                    WIDTH - RIGHT + 12.0,
                    y + 4.0,
                    self.series.len() - MAX_LEGEND
                );
            }
        }
        s.push_str("</svg>\n");
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
struct RunMeta {
    model: String,
    params: String,
    particles: String,
    resampling: String,
    kernel: String,
    blocking: String,
    blocktime: Option<f64>,
}

impl RunMeta {
    fn group(&self) -> String {
        let mut s = format!("N={} {} {}", self.particles, self.resampling, self.kernel);
        if !self.params.is_empty() {
            s.push(' ');
            s.push_str(&self.params);
        }
        s
    }
}

fn read_runs(path: &Path) -> Result<BTreeMap<usize, RunMeta>> {
    let mut reader = csv::Reader::from_path(path).map_err(|source| CliError::Csv { path: path.into(), source })?;
    let headers = reader.headers().map_err(|source| CliError::Csv { path: path.into(), source })?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| CliError::format(path, format!("missing column `{name}`")))
    };
    let idx = [
        col("run")?,
        col("model")?,
        col("params")?,
        col("particles")?,
        col("resampling")?,
        col("kernel")?,
        col("blocking")?,
        col("blocktime")?,
    ];
    let mut out = BTreeMap::new();
    for record in reader.records() {
        let r = record.map_err(|source| CliError::Csv { path: path.into(), source })?;
        let run: usize = r[idx[0]].parse().map_err(|_| CliError::format(path, "bad run index"))?;
        out.insert(
            run,
            RunMeta {
                model: r[idx[1]].into(),
                params: r[idx[2]].into(),
                particles: r[idx[3]].into(),
                resampling: r[idx[4]].into(),
                kernel: r[idx[5]].into(),
                blocking: r[idx[6]].into(),
                blocktime: r[idx[7]].parse().ok(),
            },
        );
    }
    Ok(out)
}

type Diag = BTreeMap<(usize, String), Vec<(usize, f64, f64)>>;

fn read_diagnostics(path: &Path) -> Result<Diag> {
    let mut reader = csv::Reader::from_path(path).map_err(|source| CliError::Csv { path: path.into(), source })?;
    let headers = reader.headers().map_err(|source| CliError::Csv { path: path.into(), source })?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| CliError::format(path, format!("missing column `{name}`")))
    };
    let idx = [col("run")?, col("quantity")?, col("index")?, col("time")?, col("value")?];
    let mut out: Diag = BTreeMap::new();
    for record in reader.records() {
        let r = record.map_err(|source| CliError::Csv { path: path.into(), source })?;
        let num = |i: usize| {
            r[idx[i]].parse::<f64>().map_err(|_| CliError::format(path, format!("`{}` is not a number", &r[idx[i]])))
        };
        let run = num(0)? as usize;
        let index = num(2)? as usize;
        out.entry((run, r[idx[1]].to_string())).or_default().push((index, num(3)?, num(4)?));
    }
    if out.is_empty() {
        return Err(CliError::format(path, "no diagnostics to plot"));
    }
    Ok(out)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Averages `value(run)` over runs sharing a group, per blocktime.
fn by_blocktime(runs: &BTreeMap<usize, RunMeta>, value: impl Fn(usize) -> Option<f64>) -> Vec<Series> {
    let mut groups: BTreeMap<String, BTreeMap<i64, (f64, Vec<f64>)>> = BTreeMap::new();
    for (&run, meta) in runs {
        let (Some(bt), Some(v)) = (meta.blocktime, value(run)) else { continue };
        let x = bt.log2();
        groups.entry(meta.group()).or_default().entry((x * 1e6).round() as i64).or_insert((x, Vec::new())).1.push(v);
    }
    groups
        .into_iter()
        .map(|(name, pts)| Series {
            name,
            points: pts.into_values().map(|(x, v)| (x, mean(&v))).collect(),
            dashed: false,
        })
        .collect()
}

/// Writes the charts that the result files support and returns their paths.
pub fn emit_plots(dir: &Path) -> Result<Vec<PathBuf>> {
    let runs = read_runs(&dir.join("runs.csv"))?;
    let diag = read_diagnostics(&dir.join("diagnostics.csv"))?;
    let first = runs.values().next().ok_or_else(|| CliError::format(dir.join("runs.csv"), "no runs"))?;
    let model = first.model.clone();
    let mut charts: Vec<(&str, Chart)> = Vec::new();

    let plu = by_blocktime(&runs, |r| {
        diag.get(&(r, "empirical_plu".into())).map(|v| mean(&v.iter().map(|p| p.2).collect::<Vec<_>>()))
    });
    if !plu.is_empty() {
        charts.push((
            "plu_vs_blocktime.svg",
            Chart {
                title: format!("{model}: mean PLU by blocktime"),
                x_label: "log2 blocktime".into(),
                y_label: "mean empirical PLU".into(),
                series: plu,
            },
        ));
    }
    let t0 = diag.values().next().and_then(|v| v.first()).map(|p| p.1).unwrap_or(0.0);
    let iact0 = by_blocktime(&runs, |r| {
        diag.get(&(r, "iact".into())).and_then(|v| v.iter().find(|p| p.0 == 0)).map(|p| p.2.ln())
    });
    if !iact0.is_empty() {
        charts.push((
            "log_iact_vs_blocktime.svg",
            Chart {
                title: format!("{model}: IACT at time {} by blocktime", label(t0)),
                x_label: "log2 blocktime".into(),
                y_label: "log IACT".into(),
                series: iact0,
            },
        ));
    }
    let by_time: Vec<Series> = runs
        .iter()
        .filter_map(|(&r, meta)| {
            diag.get(&(r, "iact".into())).map(|v| Series {
                name: format!("{} {}", meta.group(), meta.blocking),
                points: v.iter().map(|p| (p.1, p.2.ln())).collect(),
                dashed: meta.blocktime.is_none(),
            })
        })
        .collect();
    if !by_time.is_empty() {
        charts.push((
            "log_iact_by_time.svg",
            Chart {
                title: format!("{model}: IACT by time"),
                x_label: "time".into(),
                y_label: "log IACT".into(),
                series: by_time,
            },
        ));
    }
    let (&run0, meta0) = runs.iter().next().expect("runs is non-empty");
    let mut bands: Vec<Series> = diag
        .iter()
        .filter(|((r, q), _)| *r == run0 && (q.starts_with('q') || q == "mean"))
        .map(|((_, q), v)| Series {
            name: q.clone(),
            points: v.iter().map(|p| (p.1, p.2)).collect(),
            dashed: q != "mean" && q != "q0.5",
        })
        .collect();
    let truth_path = dir.join("truth.csv");
    if truth_path.exists() {
        let truth: Vec<(f64, f64)> = io::read_columns(&truth_path, &["run", "time", "x"])?
            .into_iter()
            .filter(|r| r[0] as usize == run0)
            .map(|r| (r[1], r[2]))
            .collect();
        if !truth.is_empty() {
            bands.push(Series { name: "truth".into(), points: truth, dashed: false });
        }
    }
    if !bands.is_empty() {
        charts.push((
            "bands.svg",
            Chart {
                title: format!("{model}: posterior bands, run {run0} ({}, {})", meta0.group(), meta0.blocking),
                x_label: "time".into(),
                y_label: "traced state".into(),
                series: bands,
            },
        ));
    }
    let mut written = Vec::new();
    for (name, chart) in charts {
        let path = dir.join(name);
        io::write_string(&path, &chart.to_svg()?)?;
        written.push(path);
    }
    Ok(written)
}
