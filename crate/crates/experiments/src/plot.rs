//! Standalone SVG histogram overlays.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use htt_core::histogram::Histogram;

use crate::error::{HarnessError, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub hist: Histogram,
}

fn density(h: &Histogram, i: usize) -> f64 {
    h.mass[i] / (h.edges[i + 1] - h.edges[i])
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Path data for the bars of `h`; every bin yields a closed rectangle, also
/// when its mass is zero.
fn bars_path(h: &Histogram, x: impl Fn(f64) -> f64, y: impl Fn(f64) -> f64) -> String {
    let mut d = String::new();
    for i in 0..h.bins() {
        let (x0, x1) = (x(h.edges[i]), x(h.edges[i + 1]));
        let (y0, y1) = (y(0.0), y(density(h, i)));
        let _ = write!(d, "M{x0:.3},{y0:.3}H{x1:.3}V{y1:.3}H{x0:.3}Z");
    }
    d
}

/// Density histograms of all series on shared axes, with a legend.
pub fn overlay_svg(series: &[Series], title: &str) -> String {
    let lo = series.iter().map(|s| s.hist.edges[0]).fold(f64::INFINITY, f64::min);
    let hi = series
        .iter()
        .map(|s| *s.hist.edges.last().expect("edges"))
        .fold(f64::NEG_INFINITY, f64::max);
    let top = series
        .iter()
        .flat_map(|s| (0..s.hist.bins()).map(move |i| density(&s.hist, i)))
        .fold(0.0, f64::max);
    let top = if top > 0.0 { top } else { 1.0 };
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let x = |v: f64| LEFT + (v - lo) / (hi - lo).max(f64::MIN_POSITIVE) * pw;
    let y = |v: f64| TOP + ph - v / top * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let _ = writeln!(
            s,
            r#"<path d="{}" fill="{color}" fill-opacity="0.35" stroke="{color}" stroke-width="1"/>"#,
            bars_path(&ser.hist, x, y)
        );
    }
    // axes
    let (x0, x1, y0, y1) = (LEFT, LEFT + pw, TOP + ph, TOP);
    let _ = writeln!(
        s,
        r#"<path d="M{x0},{y1}V{y0}H{x1}" fill="none" stroke="black" stroke-width="1"/>"#
    );
    for v in [lo, 0.5 * (lo + hi), hi] {
        let _ = writeln!(
            s,
            r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">{v:.3}</text>"#,
            x(v),
            y0 + 16.0
        );
    }
    for v in [0.0, top] {
        let _ = writeln!(
            s,
            r#"<text x="{:.3}" y="{:.3}" text-anchor="end">{v:.3}</text>"#,
            x0 - 6.0,
            y(v) + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">eigenvalue</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text transform="translate(16,{:.3}) rotate(-90)" text-anchor="middle">density</text>"#,
        TOP + ph / 2.0
    );
    // legend
    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let lx = x1 - 150.0;
        let _ = writeln!(
            s,
            r#"<rect x="{lx}" y="{}" width="12" height="12" fill="{color}" fill-opacity="0.35" stroke="{color}"/>"#,
            ly - 10.0
        );
        let _ = writeln!(s, r#"<text x="{}" y="{ly}">{}</text>"#, lx + 18.0, escape(&ser.label));
    }
    s.push_str("</svg>\n");
    s
}

/// Reads histogram CSVs and writes their overlay. Labels default to the file
/// stems; the output defaults to `plot.svg` next to the first input.
pub fn emit_plots(
    inputs: &[PathBuf],
    labels: &[String],
    title: &str,
    output: Option<&Path>,
) -> Result<PathBuf> {
    if inputs.is_empty() {
        return Err(HarnessError::config("plot needs at least one input"));
    }
    if !labels.is_empty() && labels.len() != inputs.len() {
        return Err(HarnessError::config("labels must match inputs one to one"));
    }
    let mut series = Vec::with_capacity(inputs.len());
    for (i, path) in inputs.iter().enumerate() {
        let file = std::fs::File::open(path).map_err(|e| HarnessError::io(path, e))?;
        let hist = htt_core::io::read_histogram_csv(file).map_err(|e| match e {
            htt_core::Error::Io(source) => HarnessError::io(path, source),
            other => HarnessError::config(format!("{}: {other}", path.display())),
        })?;
        let label = labels.get(i).cloned().unwrap_or_else(|| {
            path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned())
        });
        series.push(Series { label, hist });
    }
    let out = output.map_or_else(
        || inputs[0].with_file_name("plot.svg"),
        Path::to_path_buf,
    );
    std::fs::write(&out, overlay_svg(&series, title)).map_err(|e| HarnessError::io(&out, e))?;
    Ok(out)
}
