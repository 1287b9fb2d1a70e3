//! Minimal self-contained SVG charts: lines and markers on linear or
//! base-10 logarithmic axes.

use std::fmt::Write as _;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 460.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

#[derive(Debug, Clone)]
pub struct Axis {
    pub label: String,
    pub log: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Line,
    Markers,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub style: Style,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct Chart {
    pub title: String,
    pub x: Axis,
    pub y: Axis,
    pub series: Vec<Series>,
    /// Horizontal reference lines with their labels.
    pub hlines: Vec<(f64, String)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Scale {
    log: bool,
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl Scale {
    fn new(axis: &Axis, values: impl Iterator<Item = f64>, px_lo: f64, px_hi: f64) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let v = if axis.log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if axis.log {
            lo = lo.floor();
            hi = hi.ceil();
        }
        if hi - lo < 1e-12 {
            lo -= 1.0;
            hi += 1.0;
        } else if !axis.log {
            let pad = (hi - lo) * 0.03;
            lo -= pad;
            hi += pad;
        }
        Self { log: axis.log, lo, hi, px_lo, px_hi }
    }

    fn px(&self, v: f64) -> f64 {
        let t = if self.log { v.log10() } else { v };
        self.px_lo + (t - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let (a, b) = (self.lo as i32, self.hi as i32);
            let stride = ((b - a) / 8 + 1).max(1);
            return (a..=b)
                .step_by(stride as usize)
                .map(|e| {
                    let v = 10f64.powi(e);
                    let label = if (-3..=5).contains(&e) { format!("{v}") } else { format!("1e{e}") };
                    (v, label)
                })
                .collect();
        }
        let raw = (self.hi - self.lo) / 6.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
        let first = (self.lo / step).ceil() as i64;
        let last = (self.hi / step).floor() as i64;
        (first..=last)
            .map(|i| {
                let v = i as f64 * step;
                let v = if v.abs() < step * 1e-9 { 0.0 } else { v };
                (v, format!("{}", (v * 1e6).round() / 1e6))
            })
            .collect()
    }
}

fn usable(axis: &Axis, v: f64) -> bool {
    v.is_finite() && (!axis.log || v > 0.0)
}

/// Points that cannot be shown (non-finite, or non-positive on a log axis)
/// are left out. `None` when no series has a drawable point.
pub fn render(chart: &Chart, comment: Option<&str>) -> Option<String> {
    let visible: Vec<Vec<(f64, f64)>> = chart
        .series
        .iter()
        .map(|s| s.points.iter().copied().filter(|&(x, y)| usable(&chart.x, x) && usable(&chart.y, y)).collect())
        .collect();
    if visible.iter().all(Vec::is_empty) {
        return None;
    }
    let all = || visible.iter().flatten();
    let xs = Scale::new(&chart.x, all().map(|p| p.0), LEFT, WIDTH - RIGHT);
    let hl = chart.hlines.iter().map(|h| h.0).filter(|&v| usable(&chart.y, v));
    let ys = Scale::new(&chart.y, all().map(|p| p.1).chain(hl), HEIGHT - BOTTOM, TOP);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"##
    );
    if let Some(c) = comment {
        let _ = writeln!(s, "<!-- {} -->", c.replace("--", "- -"));
    }
    let _ = writeln!(s, r##"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"##);
    let _ = writeln!(s, r##"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"##, (LEFT + WIDTH - RIGHT) / 2.0, escape(&chart.title));

    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);
    let _ = writeln!(s, r##"<g class="grid" stroke="#dddddd" stroke-width="1">"##);
    for (v, _) in xs.ticks() {
        let _ = writeln!(s, r##"<line x1="{0:.2}" y1="{y0:.2}" x2="{0:.2}" y2="{y1:.2}"/>"##, xs.px(v));
    }
    for (v, _) in ys.ticks() {
        let _ = writeln!(s, r##"<line x1="{x0:.2}" y1="{0:.2}" x2="{x1:.2}" y2="{0:.2}"/>"##, ys.px(v));
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r##"<rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"##, x1 - x0, y0 - y1);
    for (v, label) in xs.ticks() {
        let _ = writeln!(s, r##"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"##, xs.px(v), y0 + 16.0, escape(&label));
    }
    for (v, label) in ys.ticks() {
        let _ = writeln!(s, r##"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##, x0 - 6.0, ys.px(v) + 4.0, escape(&label));
    }
    let _ = writeln!(s, r##"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"##, (x0 + x1) / 2.0, HEIGHT - 18.0, escape(&chart.x.label));
    let _ = writeln!(
        s,
        r##"<text x="18" y="{0:.2}" text-anchor="middle" transform="rotate(-90 18 {0:.2})">{1}</text>"##,
        (y0 + y1) / 2.0,
        escape(&chart.y.label)
    );

    for (v, label) in &chart.hlines {
        if !usable(&chart.y, *v) {
            continue;
        }
        let y = ys.px(*v);
        let _ = writeln!(s, r##"<line class="reference" x1="{x0:.2}" y1="{y:.2}" x2="{x1:.2}" y2="{y:.2}" stroke="#555555" stroke-dasharray="6 4"/>"##);
        let _ = writeln!(s, r##"<text x="{:.2}" y="{:.2}" fill="#555555">{}</text>"##, x1 + 6.0, y + 4.0, escape(label));
    }

    for (i, (series, pts)) in chart.series.iter().zip(&visible).enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        match series.style {
            Style::Line => {
                let d: Vec<String> = pts
                    .iter()
                    .enumerate()
                    .map(|(k, &(x, y))| format!("{}{:.2},{:.2}", if k == 0 { "M" } else { "L" }, xs.px(x), ys.px(y)))
                    .collect();
                let _ = writeln!(s, r##"<path class="series" d="{}" fill="none" stroke="{color}" stroke-width="2"/>"##, d.join(" "));
            }
            Style::Markers => {
                let _ = writeln!(s, r##"<g class="series" fill="{color}" fill-opacity="0.7">"##);
                for &(x, y) in pts {
                    let _ = writeln!(s, r##"<circle cx="{:.2}" cy="{:.2}" r="3"/>"##, xs.px(x), ys.px(y));
                }
                let _ = writeln!(s, "</g>");
            }
        }
        let ly = TOP + 14.0 + 20.0 * i as f64;
        let _ = writeln!(s, r##"<rect x="{:.2}" y="{:.2}" width="14" height="4" fill="{color}"/>"##, x1 + 10.0, ly - 6.0);
        let _ = writeln!(s, r##"<text x="{:.2}" y="{:.2}">{}</text>"##, x1 + 30.0, ly, escape(&series.name));
    }
    s.push_str("</svg>\n");
    Some(s)
}
