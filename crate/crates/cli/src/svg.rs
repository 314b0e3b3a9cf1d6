//! Self-contained log-log rate plots.

use std::fmt::Write;

use anyhow::{bail, Result};

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 600.0;
/// Fraction of the canvas left free on every side of the data.
pub const MARGIN: f64 = 0.05;

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Slopes of reference lines through the first data point.
    pub reference_slopes: Vec<f64>,
}

/// Maps `(log10 x, log10 y)` onto the canvas.
#[derive(Debug, Clone, Copy)]
pub struct Frame {
    x_range: (f64, f64),
    y_range: (f64, f64),
}

impl Frame {
    fn fit(points: &[(f64, f64)]) -> Self {
        let span = |vals: Vec<f64>| {
            let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if hi - lo < 1e-12 {
                (lo - 0.5, hi + 0.5)
            } else {
                (lo, hi)
            }
        };
        Self { x_range: span(points.iter().map(|p| p.0).collect()), y_range: span(points.iter().map(|p| p.1).collect()) }
    }

    pub fn px(&self, lx: f64) -> f64 {
        let m = MARGIN * WIDTH;
        m + (lx - self.x_range.0) / (self.x_range.1 - self.x_range.0) * (WIDTH - 2.0 * m)
    }

    pub fn py(&self, ly: f64) -> f64 {
        let m = MARGIN * HEIGHT;
        HEIGHT - m - (ly - self.y_range.0) / (self.y_range.1 - self.y_range.0) * (HEIGHT - 2.0 * m)
    }
}

fn log_points(series: &[Series]) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for s in series {
        for &(x, y) in &s.points {
            if !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()) {
                bail!("series `{}` has a point ({x}, {y}) that cannot go on a log-log plot", s.label);
            }
            out.push((x.log10(), y.log10()));
        }
    }
    Ok(out)
}

pub fn rate_plot(series: &[Series], spec: &PlotSpec) -> Result<String> {
    let logs = log_points(series)?;
    if logs.len() < 2 {
        bail!("a rate plot needs at least 2 points (got {})", logs.len());
    }
    let frame = Frame::fit(&logs);
    let (mx, my) = (MARGIN * WIDTH, MARGIN * HEIGHT);
    let mut s = String::new();
    let w = &mut s;
    writeln!(w, r##"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}">"##)?;
    writeln!(w, r##"<title>{}</title>"##, escape(&spec.title))?;
    writeln!(w, r##"<defs><clipPath id="plot"><rect x="{mx}" y="{my}" width="{}" height="{}"/></clipPath></defs>"##, WIDTH - 2.0 * mx, HEIGHT - 2.0 * my)?;
    writeln!(w, r##"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"##)?;
    writeln!(w, r##"<rect x="{mx}" y="{my}" width="{}" height="{}" fill="none" stroke="#999" stroke-width="1"/>"##, WIDTH - 2.0 * mx, HEIGHT - 2.0 * my)?;
    for k in decades(frame.x_range) {
        let x = frame.px(k as f64);
        writeln!(w, r##"<line x1="{x:.2}" y1="{my}" x2="{x:.2}" y2="{:.2}" stroke="#ddd"/>"##, HEIGHT - my)?;
        writeln!(w, r##"<text x="{x:.2}" y="{:.2}" font-size="11" text-anchor="middle">1e{k}</text>"##, HEIGHT - my + 12.0)?;
    }
    for k in decades(frame.y_range) {
        let y = frame.py(k as f64);
        writeln!(w, r##"<line x1="{mx}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/>"##, WIDTH - mx)?;
        writeln!(w, r##"<text x="{:.2}" y="{y:.2}" font-size="11" text-anchor="end">1e{k}</text>"##, mx - 2.0)?;
    }
    let (ax, ay) = logs[0];
    for (i, slope) in spec.reference_slopes.iter().enumerate() {
        let (x0, x1) = frame.x_range;
        let (y0, y1) = (ay + slope * (x0 - ax), ay + slope * (x1 - ax));
        writeln!(
            w,
            r##"<line class="reference" data-slope="{slope}" x1="{:.4}" y1="{:.4}" x2="{:.4}" y2="{:.4}" stroke="#555" stroke-dasharray="{}" clip-path="url(#plot)"/>"##,
            frame.px(x0),
            frame.py(y0),
            frame.px(x1),
            frame.py(y1),
            if i % 2 == 0 { "6 4" } else { "2 3" }
        )?;
        writeln!(w, r##"<text x="{:.2}" y="{:.2}" font-size="11" fill="#555">slope {slope}</text>"##, WIDTH - mx - 70.0, my + 14.0 * (i as f64 + 1.0))?;
    }
    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        writeln!(w, r##"<g class="series" fill="{color}">"##)?;
        for &(x, y) in &ser.points {
            writeln!(w, r##"<circle cx="{:.4}" cy="{:.4}" r="4"/>"##, frame.px(x.log10()), frame.py(y.log10()))?;
        }
        writeln!(w, "</g>")?;
        writeln!(w, r##"<text x="{:.2}" y="{:.2}" font-size="11" fill="{color}">{}</text>"##, mx + 6.0, my + 14.0 * (i as f64 + 1.0), escape(&ser.label))?;
    }
    writeln!(w, r##"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">{}</text>"##, WIDTH / 2.0, my - 8.0, escape(&spec.title))?;
    writeln!(w, r##"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"##, WIDTH / 2.0, HEIGHT - 4.0, escape(&spec.x_label))?;
    writeln!(w, r##"<text x="12" y="{:.2}" font-size="11" text-anchor="middle" transform="rotate(-90 12 {:.2})">{}</text>"##, HEIGHT / 2.0, HEIGHT / 2.0, escape(&spec.y_label))?;
    writeln!(w, "</svg>")?;
    Ok(s)
}

fn decades(range: (f64, f64)) -> impl Iterator<Item = i32> {
    (range.0.ceil() as i32)..=(range.1.floor() as i32)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}
