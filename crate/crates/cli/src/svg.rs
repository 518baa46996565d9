//! Minimal native SVG line plots: one or more stacked panels, each with
//! linear or logarithmic axes, polylines and a legend.

use std::fmt::Write;

const W: f64 = 720.0;
const H: f64 = 360.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub dashed: bool,
    /// Draw open circles instead of a line.
    pub markers: bool,
}

impl Series {
    pub fn line(label: impl Into<String>, xs: Vec<f64>, ys: Vec<f64>) -> Self {
        Series { label: label.into(), xs, ys, dashed: false, markers: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_log: bool,
    pub y_log: bool,
    pub series: Vec<Series>,
}

impl Plot {
    pub fn new(title: impl Into<String>, x_label: impl Into<String>, y_label: impl Into<String>) -> Self {
        Plot {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            x_log: false,
            y_log: false,
            series: Vec::new(),
        }
    }
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Axis {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite() && (!log || *v > 0.0)) {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 * (1.0 + lo.abs()) {
            lo -= 0.5;
            hi += 0.5;
        } else if !log {
            let pad = 0.04 * (hi - lo);
            lo -= pad;
            hi += pad;
        }
        Axis { lo, hi, log }
    }

    fn frac(&self, v: f64) -> Option<f64> {
        if !v.is_finite() || (self.log && v <= 0.0) {
            return None;
        }
        let v = if self.log { v.log10() } else { v };
        Some((v - self.lo) / (self.hi - self.lo))
    }

    /// Tick positions (in data units) and labels.
    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let (a, b) = (self.lo.ceil() as i32, self.hi.floor() as i32);
            let step = ((b - a) / 6).max(1);
            return (a..=b).step_by(step as usize).map(|e| (10f64.powi(e), format!("1e{e}"))).collect();
        }
        let span = self.hi - self.lo;
        let raw = span / 5.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap();
        let mut t = (self.lo / step).ceil() * step;
        let mut out = Vec::new();
        while t <= self.hi + 1e-9 * step {
            if t.abs() < 1e-9 * step {
                t = 0.0;
            }
            let label = if step >= 1.0 && t.abs() < 1e6 {
                format!("{t:.0}")
            } else {
                format!("{t:.prec$}", prec = (-step.log10().floor()).clamp(0.0, 8.0) as usize)
            };
            out.push((t, label));
            t += step;
        }
        out
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn panel(out: &mut String, plot: &Plot, y0: f64) {
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let xa = Axis::fit(plot.series.iter().flat_map(|s| s.xs.iter().copied()), plot.x_log);
    let ya = Axis::fit(plot.series.iter().flat_map(|s| s.ys.iter().copied()), plot.y_log);
    let px = |f: f64| LEFT + f * pw;
    let py = |f: f64| y0 + TOP + (1.0 - f) * ph;
    let _ = writeln!(
        out,
        r#"<rect x="{LEFT}" y="{:.1}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#,
        y0 + TOP
    );
    let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="14">{}</text>"#, LEFT + pw / 2.0, y0 + 24.0, esc(&plot.title));
    for (v, label) in xa.ticks() {
        if let Some(f) = xa.frac(v).filter(|f| (-1e-9..=1.0 + 1e-9).contains(f)) {
            let x = px(f);
            let _ = writeln!(out, r#"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="black"/>"#, py(0.0), py(0.0) + 5.0);
            let _ = writeln!(out, r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle" font-size="11">{label}</text>"#, py(0.0) + 18.0);
        }
    }
    for (v, label) in ya.ticks() {
        if let Some(f) = ya.frac(v).filter(|f| (-1e-9..=1.0 + 1e-9).contains(f)) {
            let y = py(f);
            let _ = writeln!(out, r#"<line x1="{:.1}" y1="{y:.1}" x2="{LEFT}" y2="{y:.1}" stroke="black"/>"#, LEFT - 5.0);
            let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-size="11">{label}</text>"#, LEFT - 8.0, y + 4.0);
        }
    }
    let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12">{}</text>"#, LEFT + pw / 2.0, y0 + H - 10.0, esc(&plot.x_label));
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.1}" text-anchor="middle" font-size="12" transform="rotate(-90 16 {:.1})">{}</text>"#,
        y0 + TOP + ph / 2.0,
        y0 + TOP + ph / 2.0,
        esc(&plot.y_label)
    );
    for (i, s) in plot.series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<Option<(f64, f64)>> = s
            .xs
            .iter()
            .zip(&s.ys)
            .map(|(&x, &y)| Some((px(xa.frac(x)?), py(ya.frac(y)?))))
            .collect();
        if s.markers {
            for (x, y) in pts.iter().flatten() {
                let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="white" stroke="{color}"/>"#);
            }
        } else {
            let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
            // NaN or out-of-domain points split the curve
            for run in pts.split(Option::is_none) {
                if run.len() < 2 {
                    continue;
                }
                let coords: Vec<String> = run.iter().flatten().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
                let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{}"/>"#, coords.join(" "));
            }
        }
        let ly = y0 + TOP + 14.0 + 18.0 * i as f64;
        let lx = W - RIGHT + 12.0;
        let _ = writeln!(out, r#"<line x1="{lx}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" font-size="11">{}</text>"#, lx + 26.0, ly + 4.0, esc(&s.label));
    }
}

/// Renders the plots stacked vertically in one document.
pub fn render(plots: &[Plot]) -> String {
    let total = H * plots.len().max(1) as f64;
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{total}\" viewBox=\"0 0 {W} {total}\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    for (i, p) in plots.iter().enumerate() {
        panel(&mut out, p, H * i as f64);
    }
    out.push_str("</svg>\n");
    out
}
