//! Minimal self-contained SVG charts: fan charts, Murphy diagrams, impulse
//! response grids and coherence heatmaps. Coordinates are printed with fixed
//! precision so output is byte-stable.

use std::fmt::Write;

use crate::compare::MurphyCurve;
use crate::lp::{IrfSurface, Regime};
use crate::wavelet::CoherenceMap;

const PANEL_W: f64 = 320.0;
const PANEL_H: f64 = 200.0;
const MARGIN: f64 = 40.0;

struct Doc {
    body: String,
    width: f64,
    height: f64,
}

impl Doc {
    fn new(width: f64, height: f64) -> Self {
        Doc { body: String::new(), width, height }
    }

    fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{:.0}\" viewBox=\"0 0 {:.0} {:.0}\" font-family=\"sans-serif\" font-size=\"11\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.width, self.height, self.width, self.height, self.body
        )
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, s: &str) {
        let _ = writeln!(self.body, "<text x=\"{x:.2}\" y=\"{y:.2}\" text-anchor=\"{anchor}\">{}</text>", escape(s));
    }

    fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str, width: f64, dash: bool) {
        let mut d = String::new();
        for (x, y) in pts.iter().filter(|(x, y)| x.is_finite() && y.is_finite()) {
            let _ = write!(d, "{x:.2},{y:.2} ");
        }
        let dash = if dash { " stroke-dasharray=\"4 3\"" } else { "" };
        let _ = writeln!(
            self.body,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{width:.1}\"{dash}/>",
            d.trim_end()
        );
    }

    fn polygon(&mut self, pts: &[(f64, f64)], fill: &str, opacity: f64) {
        if pts.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return;
        }
        let mut d = String::new();
        for (x, y) in pts {
            let _ = write!(d, "{x:.2},{y:.2} ");
        }
        let _ = writeln!(self.body, "<polygon points=\"{}\" fill=\"{fill}\" fill-opacity=\"{opacity:.2}\" stroke=\"none\"/>", d.trim_end());
    }

    fn line(&mut self, a: (f64, f64), b: (f64, f64), stroke: &str) {
        let _ = writeln!(
            self.body,
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{stroke}\" stroke-width=\"1\"/>",
            a.0, a.1, b.0, b.1
        );
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str) {
        let _ = writeln!(self.body, "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" fill=\"{fill}\"/>");
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Plot frame mapping data coordinates into a panel at `(x0, y0)`.
struct Frame {
    x0: f64,
    y0: f64,
    xr: (f64, f64),
    yr: (f64, f64),
}

impl Frame {
    fn new(x0: f64, y0: f64, xr: (f64, f64), yr: (f64, f64)) -> Self {
        let pad = |r: (f64, f64)| {
            if !(r.0.is_finite() && r.1.is_finite()) {
                (0.0, 1.0)
            } else if r.1 > r.0 {
                r
            } else {
                (r.0 - 0.5, r.1 + 0.5)
            }
        };
        Frame { x0, y0, xr: pad(xr), yr: pad(yr) }
    }

    fn x(&self, v: f64) -> f64 {
        self.x0 + MARGIN + (v - self.xr.0) / (self.xr.1 - self.xr.0) * (PANEL_W - 1.5 * MARGIN)
    }

    fn y(&self, v: f64) -> f64 {
        self.y0 + PANEL_H - MARGIN + (v - self.yr.0) / (self.yr.1 - self.yr.0) * -(PANEL_H - 1.5 * MARGIN)
    }

    fn axes(&self, doc: &mut Doc, title: &str) {
        let (l, r) = (self.x(self.xr.0), self.x(self.xr.1));
        let (b, t) = (self.y(self.yr.0), self.y(self.yr.1));
        doc.line((l, b), (r, b), "#444");
        doc.line((l, b), (l, t), "#444");
        doc.text((l + r) / 2.0, self.y0 + 14.0, "middle", title);
        doc.text(l - 4.0, b, "end", &short(self.yr.0));
        doc.text(l - 4.0, t + 4.0, "end", &short(self.yr.1));
        doc.text(l, b + 14.0, "middle", &short(self.xr.0));
        doc.text(r, b + 14.0, "middle", &short(self.xr.1));
    }
}

fn short(v: f64) -> String {
    crate::io::fmt_rounded(v)
}

fn range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    vals.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
}

/// One fan panel per variable: band between `lower` and `upper`, point path on top.
pub struct FanSeries<'a> {
    pub name: &'a str,
    pub point: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Recent history plotted at horizons `−len+1..=0`.
    pub history: Vec<f64>,
}

pub fn fan_chart(series: &[FanSeries], gamma: f64) -> String {
    let cols = 2usize.min(series.len().max(1));
    let rows = series.len().div_ceil(cols);
    let mut doc = Doc::new(PANEL_W * cols as f64, PANEL_H * rows as f64);
    for (i, s) in series.iter().enumerate() {
        let h = s.point.len() as f64;
        let nh = s.history.len() as f64;
        let yr = range(s.point.iter().chain(&s.lower).chain(&s.upper).chain(&s.history).copied());
        let f = Frame::new((i % cols) as f64 * PANEL_W, (i / cols) as f64 * PANEL_H, (1.0 - nh, h), yr);
        f.axes(&mut doc, &format!("{} ({:.0}% interval)", s.name, gamma * 100.0));
        let mut band: Vec<(f64, f64)> = s.upper.iter().enumerate().map(|(k, v)| (f.x(k as f64 + 1.0), f.y(*v))).collect();
        band.extend(s.lower.iter().enumerate().rev().map(|(k, v)| (f.x(k as f64 + 1.0), f.y(*v))));
        doc.polygon(&band, "#3b6ea5", 0.3);
        let hist: Vec<(f64, f64)> = s.history.iter().enumerate().map(|(k, v)| (f.x(k as f64 + 1.0 - nh), f.y(*v))).collect();
        doc.polyline(&hist, "#222", 1.2, false);
        let pts: Vec<(f64, f64)> = s.point.iter().enumerate().map(|(k, v)| (f.x(k as f64 + 1.0), f.y(*v))).collect();
        doc.polyline(&pts, "#1f3d66", 1.6, false);
    }
    doc.finish()
}

/// Score-difference curves with their bands, one panel per curve.
pub fn murphy_chart(curves: &[(String, &MurphyCurve)]) -> String {
    let cols = 2usize.min(curves.len().max(1));
    let rows = curves.len().div_ceil(cols).max(1);
    let mut doc = Doc::new(PANEL_W * cols as f64, PANEL_H * rows as f64);
    for (i, (title, c)) in curves.iter().enumerate() {
        let xr = range(c.thetas.iter().copied());
        let yr = range(c.band_lo.iter().chain(&c.band_hi).chain(&c.diff).copied().chain([0.0]));
        let f = Frame::new((i % cols) as f64 * PANEL_W, (i / cols) as f64 * PANEL_H, xr, yr);
        f.axes(&mut doc, title);
        let mut band: Vec<(f64, f64)> = c.thetas.iter().zip(&c.band_hi).map(|(t, v)| (f.x(*t), f.y(*v))).collect();
        band.extend(c.thetas.iter().zip(&c.band_lo).rev().map(|(t, v)| (f.x(*t), f.y(*v))));
        doc.polygon(&band, "#888", 0.3);
        doc.line((f.x(xr.0), f.y(0.0)), (f.x(xr.1), f.y(0.0)), "#999");
        let pts: Vec<(f64, f64)> = c.thetas.iter().zip(&c.diff).map(|(t, v)| (f.x(*t), f.y(*v))).collect();
        doc.polyline(&pts, "#000", 1.4, false);
    }
    doc.finish()
}

/// Grid with responses in rows and shocks in columns; high regime solid
/// red, low regime dashed blue, bands shaded.
pub fn irf_grid(s: &IrfSurface) -> String {
    let (rows, cols) = (s.variables.len(), s.shocks.len());
    let mut doc = Doc::new(PANEL_W * cols as f64, PANEL_H * rows as f64);
    let hmax = s.config.horizon as f64;
    for i in 0..rows {
        for m in 0..cols {
            let (Ok(hi), Ok(lo)) = (s.extract(i, m, Regime::High), s.extract(i, m, Regime::Low)) else {
                continue;
            };
            let yr = range(hi.lo.iter().chain(&hi.hi).chain(&lo.lo).chain(&lo.hi).copied().chain([0.0]));
            let f = Frame::new(m as f64 * PANEL_W, i as f64 * PANEL_H, (0.0, hmax.max(1.0)), yr);
            f.axes(&mut doc, &format!("{} to {}", s.variables[i], s.shocks[m]));
            doc.line((f.x(0.0), f.y(0.0)), (f.x(hmax.max(1.0)), f.y(0.0)), "#999");
            for (prof, colour, dash) in [(&hi, "#b2182b", false), (&lo, "#2166ac", true)] {
                let mut band: Vec<(f64, f64)> = prof.hi.iter().enumerate().map(|(h, v)| (f.x(h as f64), f.y(*v))).collect();
                band.extend(prof.lo.iter().enumerate().rev().map(|(h, v)| (f.x(h as f64), f.y(*v))));
                doc.polygon(&band, colour, 0.15);
                let pts: Vec<(f64, f64)> = prof.point.iter().enumerate().map(|(h, v)| (f.x(h as f64), f.y(*v))).collect();
                doc.polyline(&pts, colour, 1.5, dash);
            }
        }
    }
    doc.finish()
}

/// Piecewise-linear blue-to-yellow colour ramp on `[0, 1]`.
fn ramp(v: f64) -> String {
    const STOPS: [(f64, [f64; 3]); 4] =
        [(0.0, [48.0, 18.0, 59.0]), (0.35, [40.0, 120.0, 180.0]), (0.7, [120.0, 200.0, 90.0]), (1.0, [250.0, 230.0, 40.0])];
    let v = if v.is_finite() { v.clamp(0.0, 1.0) } else { 0.0 };
    let k = STOPS.iter().rposition(|(s, _)| *s <= v).unwrap_or(0).min(STOPS.len() - 2);
    let (a, ca) = STOPS[k];
    let (b, cb) = STOPS[k + 1];
    let w = (v - a) / (b - a);
    let c: Vec<u8> = (0..3).map(|i| (ca[i] + w * (cb[i] - ca[i])).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

/// Time–period heatmap of squared coherence. Cells outside the cone of
/// influence are greyed; significant cells carry phase arrows (rightward in
/// phase, upward when the first series leads).
pub fn coherence_heatmap(map: &CoherenceMap, x_name: &str, y_name: &str) -> String {
    let (nj, nt) = (map.n_scales(), map.n_times());
    let cw = (720.0 / nt as f64).max(1.0);
    let ch = (360.0 / nj as f64).max(1.0);
    let (w, h) = (cw * nt as f64 + 2.0 * MARGIN, ch * nj as f64 + 2.0 * MARGIN);
    let mut doc = Doc::new(w, h);
    // small periods at the top
    let cell_y = |j: usize| MARGIN + j as f64 * ch;
    for j in 0..nj {
        for t in 0..nt {
            let fill = if map.inside_coi(j, t) { ramp(map.r2[(j, t)]) } else { "#d9d9d9".to_string() };
            doc.rect(MARGIN + t as f64 * cw, cell_y(j), cw + 0.02, ch + 0.02, &fill);
        }
    }
    if let Some(sig) = &map.significance {
        let step_t = (nt / 40).max(1);
        let step_j = (nj / 20).max(1);
        let len = 0.45 * (cw * step_t as f64).min(ch * step_j as f64 * 2.0).max(4.0);
        for j in (0..nj).step_by(step_j) {
            for t in (0..nt).step_by(step_t) {
                if sig.mask[j][t] && map.phase[(j, t)].is_finite() {
                    let ph = map.phase[(j, t)];
                    let cx = MARGIN + (t as f64 + 0.5) * cw;
                    let cy = cell_y(j) + 0.5 * ch;
                    let tip = (cx + len * ph.cos(), cy - len * ph.sin());
                    doc.line((cx, cy), tip, "#000");
                }
            }
        }
    }
    for (j, label) in [(0, map.periods[0]), (nj - 1, map.periods[nj - 1])] {
        doc.text(MARGIN - 4.0, cell_y(j) + ch, "end", &short(label));
    }
    doc.text(MARGIN + cw * nt as f64 / 2.0, 16.0, "middle", &format!("Squared coherence: {x_name} vs {y_name}"));
    doc.text(MARGIN, h - 12.0, "start", &short(map.times[0]));
    doc.text(MARGIN + cw * nt as f64, h - 12.0, "end", &short(map.times[nt - 1]));
    doc.finish()
}
