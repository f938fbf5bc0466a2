//! Minimal static SVG charts. Every number is written with six significant
//! digits so output is stable across platforms.

use std::fmt::Write;

use bayescrisis::analytics::{BoxStats, ForecastSummary};
use chrono::NaiveDate;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 60.0;
const PALETTE: [&str; 6] = ["#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860"];

/// `x` rounded to six significant digits, trailing zeros removed.
pub fn fmt6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return "0".into();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    let scale = 10f64.powi(magnitude - 5);
    let rounded = if magnitude > 5 { (x / scale).round() * scale } else { x };
    let mut s = format!("{rounded:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Canvas {
    buf: String,
}

impl Canvas {
    fn new(title: &str) -> Self {
        let mut buf = String::new();
        writeln!(
            buf,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#,
            w = fmt6(WIDTH),
            h = fmt6(HEIGHT)
        )
        .unwrap();
        writeln!(buf, r#"<rect x="0" y="0" width="{}" height="{}" fill="white"/>"#, fmt6(WIDTH), fmt6(HEIGHT)).unwrap();
        let mut c = Self { buf };
        c.text(WIDTH / 2.0, 24.0, "middle", title);
        c
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, s: &str) {
        writeln!(
            self.buf,
            r#"<text x="{}" y="{}" text-anchor="{anchor}">{}</text>"#,
            fmt6(x),
            fmt6(y),
            escape(s)
        )
        .unwrap();
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str) {
        writeln!(
            self.buf,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{stroke}"/>"#,
            fmt6(x1),
            fmt6(y1),
            fmt6(x2),
            fmt6(y2)
        )
        .unwrap();
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str, stroke: &str) {
        writeln!(
            self.buf,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{fill}" stroke="{stroke}"/>"#,
            fmt6(x),
            fmt6(y),
            fmt6(w.max(0.0)),
            fmt6(h.max(0.0))
        )
        .unwrap();
    }

    fn points(pts: &[(f64, f64)]) -> String {
        pts.iter()
            .map(|(x, y)| format!("{},{}", fmt6(*x), fmt6(*y)))
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str) {
        writeln!(
            self.buf,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="2"/>"#,
            Self::points(pts)
        )
        .unwrap();
    }

    fn polygon(&mut self, pts: &[(f64, f64)], fill: &str) {
        writeln!(
            self.buf,
            r#"<polygon points="{}" fill="{fill}" fill-opacity="0.3" stroke="none"/>"#,
            Self::points(pts)
        )
        .unwrap();
    }

    fn finish(mut self) -> String {
        self.buf.push_str("</svg>\n");
        self.buf
    }
}

/// Linear map from a data range onto a pixel range.
#[derive(Clone, Copy)]
struct Scale {
    d0: f64,
    d1: f64,
    p0: f64,
    p1: f64,
}

impl Scale {
    fn new(lo: f64, hi: f64, p0: f64, p1: f64) -> Self {
        let (lo, hi) = if hi > lo {
            let pad = 0.05 * (hi - lo);
            (lo - pad, hi + pad)
        } else {
            let pad = if lo == 0.0 { 1.0 } else { 0.05 * lo.abs() };
            (lo - pad, hi + pad)
        };
        Self { d0: lo, d1: hi, p0, p1 }
    }

    fn at(&self, v: f64) -> f64 {
        self.p0 + (v - self.d0) / (self.d1 - self.d0) * (self.p1 - self.p0)
    }
}

fn y_axis(c: &mut Canvas, y: Scale, x_px: f64) {
    c.line(x_px, MARGIN_T, x_px, HEIGHT - MARGIN_B, "black");
    for i in 0..=4 {
        let v = y.d0 + (y.d1 - y.d0) * i as f64 / 4.0;
        let py = y.at(v);
        c.line(x_px - 4.0, py, x_px, py, "black");
        c.text(x_px - 6.0, py + 4.0, "end", &fmt6(v));
    }
}

/// Observed points, median curve and 5-95% band over calendar dates.
pub fn forecast_chart(title: &str, observed: (&[NaiveDate], &[f64]), f: &ForecastSummary) -> String {
    let mut c = Canvas::new(title);
    let day = |d: &NaiveDate| (*d - f.date0).num_days() as f64;
    let first = observed.0.iter().chain(&f.dates).map(day).fold(f64::INFINITY, f64::min);
    let last = observed.0.iter().chain(&f.dates).map(day).fold(f64::NEG_INFINITY, f64::max);
    let lo = observed.1.iter().copied().chain(f.quantiles.iter().map(|q| q.q05)).fold(f64::INFINITY, f64::min);
    let hi = observed.1.iter().copied().chain(f.quantiles.iter().map(|q| q.q95)).fold(f64::NEG_INFINITY, f64::max);
    let x = Scale::new(first, last, MARGIN_L, WIDTH - MARGIN_R);
    let y = Scale::new(lo.min(0.0), hi, HEIGHT - MARGIN_B, MARGIN_T);

    y_axis(&mut c, y, MARGIN_L);
    c.line(MARGIN_L, HEIGHT - MARGIN_B, WIDTH - MARGIN_R, HEIGHT - MARGIN_B, "black");
    for (d, anchor) in [(f.dates.first(), "start"), (f.dates.last(), "end")] {
        if let Some(d) = d {
            c.text(x.at(day(d)), HEIGHT - MARGIN_B + 20.0, anchor, &d.to_string());
        }
    }

    let mut band: Vec<(f64, f64)> = f.dates.iter().zip(&f.quantiles).map(|(d, q)| (x.at(day(d)), y.at(q.q95))).collect();
    band.extend(f.dates.iter().zip(&f.quantiles).rev().map(|(d, q)| (x.at(day(d)), y.at(q.q05))));
    c.polygon(&band, PALETTE[0]);
    let median: Vec<(f64, f64)> = f.dates.iter().zip(&f.quantiles).map(|(d, q)| (x.at(day(d)), y.at(q.q50))).collect();
    c.polyline(&median, PALETTE[0]);
    for (d, v) in observed.0.iter().zip(observed.1) {
        c.rect(x.at(day(d)) - 2.0, y.at(*v) - 2.0, 4.0, 4.0, "black", "none");
    }
    c.text(WIDTH - MARGIN_R, MARGIN_T + 12.0, "end", "observed (points), median and 5-95% band");
    c.finish()
}

/// A titled group of boxes sharing one vertical scale.
pub struct Panel<'a> {
    pub title: String,
    pub boxes: Vec<(&'a str, &'a BoxStats)>,
}

/// Side-by-side panels of box plots; each panel has its own scale.
pub fn box_chart(title: &str, panels: &[Panel]) -> String {
    let mut c = Canvas::new(title);
    let n = panels.len().max(1) as f64;
    let panel_w = (WIDTH - MARGIN_L - MARGIN_R) / n;
    for (i, panel) in panels.iter().enumerate() {
        let left = MARGIN_L + i as f64 * panel_w;
        let lo = panel.boxes.iter().map(|(_, b)| b.whisker_low).fold(f64::INFINITY, f64::min);
        let hi = panel.boxes.iter().map(|(_, b)| b.whisker_high).fold(f64::NEG_INFINITY, f64::max);
        c.text(left + panel_w / 2.0, HEIGHT - MARGIN_B + 40.0, "middle", &panel.title);
        if panel.boxes.is_empty() {
            c.text(left + panel_w / 2.0, HEIGHT / 2.0, "middle", "unidentified");
            continue;
        }
        let y = Scale::new(lo, hi, HEIGHT - MARGIN_B, MARGIN_T);
        y_axis(&mut c, y, left + 8.0);
        let slot = (panel_w - 24.0) / panel.boxes.len() as f64;
        for (j, (label, b)) in panel.boxes.iter().enumerate() {
            let cx = left + 16.0 + slot * (j as f64 + 0.5);
            let half = (slot * 0.3).min(30.0);
            let colour = PALETTE[j % PALETTE.len()];
            c.line(cx, y.at(b.whisker_low), cx, y.at(b.q1), "black");
            c.line(cx, y.at(b.q3), cx, y.at(b.whisker_high), "black");
            c.line(cx - half / 2.0, y.at(b.whisker_low), cx + half / 2.0, y.at(b.whisker_low), "black");
            c.line(cx - half / 2.0, y.at(b.whisker_high), cx + half / 2.0, y.at(b.whisker_high), "black");
            c.rect(cx - half, y.at(b.q3), 2.0 * half, y.at(b.q1) - y.at(b.q3), colour, "black");
            c.line(cx - half, y.at(b.median), cx + half, y.at(b.median), "black");
            c.text(cx, HEIGHT - MARGIN_B + 20.0, "middle", label);
        }
    }
    c.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(fmt6(0.0), "0");
        assert_eq!(fmt6(123.456789), "123.457");
        assert_eq!(fmt6(-0.000123456789), "-0.000123457");
        assert_eq!(fmt6(1234567.0), "1234570");
        assert_eq!(fmt6(100.0), "100");
        assert_eq!(fmt6(999.9999), "1000");
        assert_eq!(fmt6(-0.0000001), "-0.0000001");
    }

    #[test]
    fn box_chart_is_well_formed() {
        let b = BoxStats::from_values("x", &[1.0, 2.0, 3.0, 4.0, 50.0]).unwrap();
        let svg = box_chart("t <1>", &[Panel { title: "p".into(), boxes: vec![("x", &b)] }, Panel { title: "q".into(), boxes: vec![] }]);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains("t &lt;1&gt;"));
        assert!(svg.contains("unidentified"));
        assert_eq!(svg.matches("<rect").count(), 2);
    }
}
