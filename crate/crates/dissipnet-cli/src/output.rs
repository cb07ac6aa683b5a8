//! CSV tables and hand-written SVG plots. Both are byte-stable for equal
//! inputs: numbers use Rust's shortest round-trip formatting and plot
//! coordinates are fixed to two decimals.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::CliError;

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn push_numbers(&mut self, row: &[f64]) {
        self.push(row.iter().map(|x| num(*x)).collect());
    }
}

pub fn num(x: f64) -> String {
    if x == 0.0 {
        // Avoid "-0".
        "0".into()
    } else {
        format!("{x}")
    }
}

pub fn emit_csv(table: &Table, path: &Path) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path).map_err(io)?;
    w.write_record(&table.header).map_err(io)?;
    for row in &table.rows {
        w.write_record(row).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

pub struct LinePlot<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

pub struct Heatmap<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub xs: &'a [f64],
    pub ys: &'a [f64],
    /// `values[i][j]` at `(xs[i], ys[j])`.
    pub values: &'a [Vec<f64>],
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];
const RAMP: [&str; 8] = ["#440154", "#46327e", "#365c8d", "#277f8e", "#1fa187", "#4ac16d", "#a0da39", "#fde725"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str, x_label: &str, y_label: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="14">{}</text>"#, LEFT + (WIDTH - LEFT - RIGHT) / 2.0, escape(title));
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + (WIDTH - LEFT - RIGHT) / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        TOP + (HEIGHT - TOP - BOTTOM) / 2.0,
        TOP + (HEIGHT - TOP - BOTTOM) / 2.0,
        escape(y_label)
    );
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite() && (!log || *v > 0.0)) {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        Self { lo, hi, log }
    }

    fn frac(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn tick_label(&self, t: f64) -> String {
        let v = self.lo + t * (self.hi - self.lo);
        if self.log {
            format!("{:.3e}", 10f64.powf(v))
        } else {
            format!("{v:.3}")
        }
    }
}

fn frame(out: &mut String, x: &Axis, y: &Axis) {
    let (w, h) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let _ = writeln!(out, r#"<rect x="{LEFT}" y="{TOP}" width="{w:.2}" height="{h:.2}" fill="none" stroke="black"/>"#);
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let px = LEFT + t * w;
        let py = TOP + h - t * h;
        let _ = writeln!(out, r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/>"#, TOP + h, TOP + h + 5.0);
        let _ = writeln!(out, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, TOP + h + 18.0, x.tick_label(t));
        let _ = writeln!(out, r#"<line x1="{:.2}" y1="{py:.2}" x2="{LEFT}" y2="{py:.2}" stroke="black"/>"#, LEFT - 5.0);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 8.0, py + 4.0, y.tick_label(t));
    }
}

pub fn line_plot(plot: &LinePlot) -> String {
    let mut out = String::new();
    header(&mut out, plot.title, plot.x_label, plot.y_label);
    let x = Axis::fit(plot.series.iter().flat_map(|s| s.points.iter().map(|p| p.0)), plot.log_x);
    let y = Axis::fit(plot.series.iter().flat_map(|s| s.points.iter().map(|p| p.1)), plot.log_y);
    frame(&mut out, &x, &y);
    let (w, h) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    for (k, s) in plot.series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|(a, b)| a.is_finite() && b.is_finite() && (!plot.log_x || *a > 0.0) && (!plot.log_y || *b > 0.0))
            .map(|&(a, b)| format!("{:.2},{:.2}", LEFT + x.frac(a) * w, TOP + h - y.frac(b) * h))
            .collect();
        let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        let ly = TOP + 10.0 + 18.0 * k as f64;
        let lx = WIDTH - RIGHT + 10.0;
        let _ = writeln!(out, r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 25.0, ly + 4.0, escape(&s.name));
    }
    out.push_str("</svg>\n");
    out
}

pub fn heatmap(map: &Heatmap) -> String {
    let mut out = String::new();
    header(&mut out, map.title, map.x_label, map.y_label);
    let (w, h) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let finite = map.values.iter().flatten().copied().filter(|v| v.is_finite());
    let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let (lo, hi) = if lo.is_finite() { (lo, if hi > lo { hi } else { lo + 1.0 }) } else { (0.0, 1.0) };
    let (nx, ny) = (map.xs.len().max(1), map.ys.len().max(1));
    let (cw, ch) = (w / nx as f64, h / ny as f64);
    for (i, row) in map.values.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let level = if v.is_finite() { ((v - lo) / (hi - lo) * RAMP.len() as f64).floor() as usize } else { 0 };
            let color = RAMP[level.min(RAMP.len() - 1)];
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{cw:.2}" height="{ch:.2}" fill="{color}"/>"#,
                LEFT + i as f64 * cw,
                TOP + h - (j + 1) as f64 * ch
            );
        }
    }
    let x = Axis::fit(map.xs.iter().copied(), false);
    let y = Axis::fit(map.ys.iter().copied(), false);
    frame(&mut out, &x, &y);
    for (k, color) in RAMP.iter().enumerate() {
        let ly = TOP + h - (k + 1) as f64 * h / RAMP.len() as f64;
        let v = lo + (k as f64 + 0.5) / RAMP.len() as f64 * (hi - lo);
        let lx = WIDTH - RIGHT + 10.0;
        let _ = writeln!(out, r#"<rect x="{lx:.2}" y="{ly:.2}" width="16" height="{:.2}" fill="{color}"/>"#, h / RAMP.len() as f64);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}">{v:.4}</text>"#, lx + 22.0, ly + h / RAMP.len() as f64 / 2.0 + 4.0);
    }
    out.push_str("</svg>\n");
    out
}

pub fn emit_svg(svg: &str, path: &Path) -> Result<(), CliError> {
    fs::write(path, svg).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
