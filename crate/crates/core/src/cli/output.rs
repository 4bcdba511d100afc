//! CSV, SVG and manifest emission. Everything is rendered in memory and
//! written once at the end of a run.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::ghost_mc::ScalingCurve;

pub const SCALING_HEADER: [&str; 9] = [
    "mean_photons",
    "raw_mean",
    "raw_std",
    "norm_mean",
    "norm_std",
    "kind",
    "coherent_fraction",
    "shots",
    "seed",
];
pub const SCAN_HEADER: [&str; 3] = ["delay_fs", "mean_signal", "std_signal"];
pub const SPECTRUM_HEADER: [&str; 2] = ["freq_phz", "magnitude"];
pub const GABOR_HEADER: [&str; 6] = [
    "window_label",
    "window_center_fs",
    "mean_photons",
    "norm_mean",
    "norm_std",
    "a_hat",
];
pub const CEP_HEADER: [&str; 3] = ["delay_fs", "locked", "averaged"];

/// Shortest representation that round-trips; locale independent.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// A rendered output file.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

/// Renders a CSV with LF line endings.
pub fn csv_table(name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<Artifact> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let fail = |e: csv::Error| Error::Numeric(format!("rendering {name}: {e}"));
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.write_record(row).map_err(fail)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Numeric(format!("rendering {name}: {e}")))?;
    Ok(Artifact {
        name: name.to_string(),
        contents: String::from_utf8(bytes).expect("csv output is utf-8"),
    })
}

/// Rows of the scaling schema for one curve.
pub fn scaling_rows(
    curve: &ScalingCurve,
    kind: &str,
    coherent_fraction: f64,
    shots: u64,
    seed: u64,
) -> Vec<Vec<String>> {
    curve
        .points
        .iter()
        .map(|p| {
            vec![
                num(p.mean_photons),
                num(p.raw_mean),
                num(p.raw_std),
                num(p.norm_mean),
                num(p.norm_std),
                kind.to_string(),
                num(coherent_fraction),
                shots.to_string(),
                seed.to_string(),
            ]
        })
        .collect()
}

pub fn xy_rows(x: &[f64], ys: &[&[f64]]) -> Vec<Vec<String>> {
    (0..x.len())
        .map(|i| {
            std::iter::once(num(x[i]))
                .chain(ys.iter().map(|y| num(y[i])))
                .collect()
        })
        .collect()
}

/// A named polyline for [`line_plot`].
pub struct Series<'a> {
    pub label: &'a str,
    pub x: &'a [f64],
    pub y: &'a [f64],
}

/// Pairs labels with x/y columns.
pub fn series<'a>(labels: &[&'a str], xs: &'a [Vec<f64>], ys: &'a [Vec<f64>]) -> Vec<Series<'a>> {
    labels
        .iter()
        .zip(xs.iter().zip(ys))
        .map(|(label, (x, y))| Series { label, x, y })
        .collect()
}

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

/// Minimal SVG line plot; `log_x` plots log10 of positive x values.
pub fn line_plot(
    name: &str,
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[Series],
    log_x: bool,
) -> Artifact {
    let (w, h, m) = (640.0, 420.0, 60.0);
    let tx = |x: f64| if log_x { x.log10() } else { x };
    let points: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| {
            s.x.iter()
                .zip(s.y)
                .filter(|(x, y)| y.is_finite() && (!log_x || **x > 0.0))
                .map(|(&x, &y)| (tx(x), y))
                .collect()
        })
        .collect();
    let all = points.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x1 > x0) {
        x1 = x0 + 1.0;
    }
    if !(y1 > y0) {
        y1 = y0 + 1.0;
    }
    let px = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let py = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{m}" y="{m}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - 2.0 * m,
        h - 2.0 * m
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="30" text-anchor="middle" font-size="14">{}</text>"#,
        w / 2.0,
        escape(title)
    );
    let xl = if log_x {
        format!("log10 {x_label}")
    } else {
        x_label.to_string()
    };
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        w / 2.0,
        h - 15.0,
        escape(&xl)
    );
    let _ = writeln!(
        svg,
        r#"<text x="15" y="{}" text-anchor="middle" transform="rotate(-90 15 {})">{}</text>"#,
        h / 2.0,
        h / 2.0,
        escape(y_label)
    );
    for (v, anchor, x, y) in [
        (x0, "start", m, h - m + 15.0),
        (x1, "end", w - m, h - m + 15.0),
    ] {
        let _ = writeln!(
            svg,
            r#"<text x="{x}" y="{y}" text-anchor="{anchor}">{}</text>"#,
            short(v)
        );
    }
    for (v, y) in [(y0, h - m), (y1, m + 10.0)] {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{y}" text-anchor="end">{}</text>"#,
            m - 5.0,
            short(v)
        );
    }
    for (i, (s, pts)) in series.iter().zip(&points).enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            path.join(" ")
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            m + 10.0,
            m + 18.0 + 16.0 * i as f64,
            escape(s.label)
        );
    }
    svg.push_str("</svg>\n");
    Artifact {
        name: name.to_string(),
        contents: svg,
    }
}

fn short(v: f64) -> String {
    format!("{v:.3e}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Writes all artifacts into `dir` (created if missing).
pub fn write_all(dir: &Path, artifacts: &[Artifact]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for a in artifacts {
        let path = dir.join(&a.name);
        std::fs::write(&path, &a.contents).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

/// Reads a scan CSV (`delay_fs,mean_signal,std_signal`).
pub fn read_scan(path: &Path) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| Error::config("input", format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::config("input", format!("{}: {e}", path.display())))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != SCAN_HEADER {
        return Err(Error::config(
            "input",
            format!(
                "{} is not a scan file (expected header {})",
                path.display(),
                SCAN_HEADER.join(",")
            ),
        ));
    }
    let mut cols = (Vec::new(), Vec::new(), Vec::new());
    for (line, record) in reader.records().enumerate() {
        let record =
            record.map_err(|e| Error::config("input", format!("{}: {e}", path.display())))?;
        let field = |i: usize| -> Result<f64> {
            record
                .get(i)
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| {
                    Error::config(
                        "input",
                        format!("{}: bad value on row {}", path.display(), line + 2),
                    )
                })
        };
        cols.0.push(field(0)?);
        cols.1.push(field(1)?);
        cols.2.push(field(2)?);
    }
    Ok(cols)
}
