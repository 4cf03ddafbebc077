//! Minimal static SVG line charts: stacked panels of polylines with axes,
//! ticks and a legend. Long series are decimated to keep files small.

use std::fmt::Write;

/// Upper bound on vertices per polyline.
pub const MAX_POINTS: usize = 2000;

pub const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#555555",
];

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub color: &'static str,
    pub dashed: bool,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>, color: &'static str) -> Self {
        Self {
            label: label.into(),
            points,
            color,
            dashed: false,
        }
    }

    pub fn dashed(mut self) -> Self {
        self.dashed = true;
        self
    }
}

#[derive(Debug, Clone, Default)]
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Same scale on both axes (trajectories).
    pub equal_aspect: bool,
}

impl Panel {
    pub fn new(
        title: impl Into<String>,
        x_label: impl Into<String>,
        y_label: impl Into<String>,
    ) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            ..Default::default()
        }
    }

    pub fn with(mut self, s: Series) -> Self {
        self.series.push(s);
        self
    }
}

#[derive(Debug, Clone)]
pub struct Figure {
    pub panels: Vec<Panel>,
    pub width: f64,
    pub panel_height: f64,
}

const MARGIN_L: f64 = 78.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 34.0;
const MARGIN_B: f64 = 48.0;

impl Figure {
    pub fn new(panels: Vec<Panel>) -> Self {
        Self {
            panels,
            width: 900.0,
            panel_height: 300.0,
        }
    }

    pub fn square(panel: Panel) -> Self {
        Self {
            panels: vec![panel],
            width: 760.0,
            panel_height: 760.0,
        }
    }

    pub fn to_svg(&self) -> String {
        let height = self.panel_height * self.panels.len() as f64;
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{height}" viewBox="0 0 {w} {height}" font-family="sans-serif" font-size="12">"#,
            w = self.width
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        for (i, panel) in self.panels.iter().enumerate() {
            let y0 = i as f64 * self.panel_height;
            render_panel(&mut out, panel, 0.0, y0, self.width, self.panel_height);
        }
        out.push_str("</svg>\n");
        out
    }
}

fn render_panel(out: &mut String, p: &Panel, x0: f64, y0: f64, w: f64, h: f64) {
    let left = x0 + MARGIN_L;
    let top = y0 + MARGIN_T;
    let pw = w - MARGIN_L - MARGIN_R;
    let ph = h - MARGIN_T - MARGIN_B;

    let Some((mut xr, mut yr)) = data_bounds(&p.series) else {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle">{} (no data)</text>"#,
            left + pw / 2.0,
            top + ph / 2.0,
            escape(&p.title)
        );
        return;
    };
    if p.equal_aspect {
        let sx = (xr.1 - xr.0) / pw;
        let sy = (yr.1 - yr.0) / ph;
        let s = sx.max(sy);
        xr = widen(xr, s * pw);
        yr = widen(yr, s * ph);
    }
    let (xt, xr) = ticks(xr);
    let (yt, yr) = ticks(yr);
    let sx = |x: f64| left + (x - xr.0) / (xr.1 - xr.0) * pw;
    let sy = |y: f64| top + ph - (y - yr.0) / (yr.1 - yr.0) * ph;

    let _ = writeln!(
        out,
        r##"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>"##
    );
    for &t in &xt {
        let x = sx(t);
        let _ = writeln!(
            out,
            r##"<line x1="{x:.2}" y1="{top}" x2="{x:.2}" y2="{:.2}" stroke="#e4e4e4"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            top + ph,
            top + ph + 16.0,
            tick_label(t)
        );
    }
    for &t in &yt {
        let y = sy(t);
        let _ = writeln!(
            out,
            r##"<line x1="{left}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e4e4e4"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            left + pw,
            left - 6.0,
            y + 4.0,
            tick_label(t)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="14">{}</text>"#,
        left + pw / 2.0,
        y0 + 22.0,
        escape(&p.title)
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        left + pw / 2.0,
        top + ph + 36.0,
        escape(&p.x_label)
    );
    let (lx, ly) = (x0 + 18.0, top + ph / 2.0);
    let _ = writeln!(
        out,
        r#"<text x="{lx}" y="{ly:.2}" text-anchor="middle" transform="rotate(-90 {lx} {ly:.2})">{}</text>"#,
        escape(&p.y_label)
    );

    let _ = writeln!(
        out,
        r#"<clipPath id="clip{id}"><rect x="{left}" y="{top}" width="{pw}" height="{ph}"/></clipPath><g clip-path="url(#clip{id})">"#,
        id = (y0 as usize)
    );
    for s in &p.series {
        for run in finite_runs(&decimate(&s.points, MAX_POINTS)) {
            let mut pts = String::new();
            for (x, y) in run {
                let _ = write!(pts, "{:.2},{:.2} ", sx(x), sy(y));
            }
            let dash = if s.dashed {
                r#" stroke-dasharray="6 4""#
            } else {
                ""
            };
            let _ = writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"{dash}/>"#,
                pts.trim_end(),
                s.color
            );
        }
    }
    out.push_str("</g>\n");

    // legend, top-right inside the frame
    let mut ly = top + 16.0;
    let lx = left + pw - 150.0;
    for s in p.series.iter().filter(|s| !s.label.is_empty()) {
        let dash = if s.dashed {
            r#" stroke-dasharray="6 4""#
        } else {
            ""
        };
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{}" stroke-width="2"{dash}/><text x="{:.2}" y="{ly:.2}">{}</text>"#,
            ly - 4.0,
            lx + 24.0,
            ly - 4.0,
            s.color,
            lx + 30.0,
            escape(&s.label)
        );
        ly += 16.0;
    }
}

fn data_bounds(series: &[Series]) -> Option<((f64, f64), (f64, f64))> {
    let mut xr = (f64::INFINITY, f64::NEG_INFINITY);
    let mut yr = xr;
    for &(x, y) in series.iter().flat_map(|s| s.points.iter()) {
        if x.is_finite() && y.is_finite() {
            xr = (xr.0.min(x), xr.1.max(x));
            yr = (yr.0.min(y), yr.1.max(y));
        }
    }
    if xr.0 > xr.1 {
        return None;
    }
    Some((pad(xr), pad(yr)))
}

/// Degenerate ranges get a unit (or relative) width.
fn pad((lo, hi): (f64, f64)) -> (f64, f64) {
    if hi - lo > 1e-12 * (lo.abs() + hi.abs()).max(1e-300) {
        return (lo, hi);
    }
    let d = if lo == 0.0 { 1.0 } else { 0.1 * lo.abs() };
    (lo - d, hi + d)
}

fn widen((lo, hi): (f64, f64), span: f64) -> (f64, f64) {
    let mid = 0.5 * (lo + hi);
    (mid - span / 2.0, mid + span / 2.0)
}

/// Tick positions at a 1-2-5 step, and the range widened to whole steps.
pub fn ticks((lo, hi): (f64, f64)) -> (Vec<f64>, (f64, f64)) {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let a = (lo / step).floor();
    let b = (hi / step).ceil();
    let ticks = (0..=((b - a) as i64))
        .map(|k| (a + k as f64) * step)
        .collect();
    (ticks, (a * step, b * step))
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if !(1e-3..1e5).contains(&a) {
        return format!("{v:.1e}");
    }
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

/// Keeps every k-th point plus the last so at most about `max` remain.
pub fn decimate(points: &[(f64, f64)], max: usize) -> Vec<(f64, f64)> {
    if points.len() <= max {
        return points.to_vec();
    }
    let stride = points.len().div_ceil(max);
    let mut out: Vec<_> = points.iter().copied().step_by(stride).collect();
    if (out.len() - 1) * stride != points.len() - 1 {
        out.push(points[points.len() - 1]);
    }
    out
}

fn finite_runs(points: &[(f64, f64)]) -> Vec<Vec<(f64, f64)>> {
    let mut runs = Vec::new();
    let mut cur = Vec::new();
    for &(x, y) in points {
        if x.is_finite() && y.is_finite() {
            cur.push((x, y));
        } else if !cur.is_empty() {
            runs.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        runs.push(cur);
    }
    runs
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
