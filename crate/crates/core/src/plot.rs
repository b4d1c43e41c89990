//! Self-contained SVG plots (800×600): scatter/line charts with optional
//! log axes, and grayscale heat slices.

use std::fmt::Write;

use crate::verify::{BoundReport, DecayFit, LongtimeReport};

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 600.0;
const MARGIN: (f64, f64, f64, f64) = (80.0, 30.0, 50.0, 70.0); // left, right, top, bottom
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Markers,
    Line,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// Symmetric y error bars, same length as `points` when present.
    pub errors: Option<Vec<f64>>,
    pub style: Style,
}

impl Series {
    pub fn markers(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series {
            label: label.into(),
            points,
            errors: None,
            style: Style::Markers,
        }
    }

    pub fn line(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series {
            label: label.into(),
            points,
            errors: None,
            style: Style::Line,
        }
    }

    pub fn with_errors(mut self, errors: Vec<f64>) -> Self {
        self.errors = Some(errors);
        self
    }
}

#[derive(Debug, Clone)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Axis {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let v = if log { v.log10() } else { v };
            if v.is_finite() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        let pad = 0.05 * (hi - lo);
        Axis {
            lo: lo - pad,
            hi: hi + pad,
            log,
        }
    }

    fn frac(&self, v: f64) -> Option<f64> {
        let v = if self.log { v.log10() } else { v };
        v.is_finite().then(|| (v - self.lo) / (self.hi - self.lo))
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let (a, b) = (self.lo.ceil() as i32, self.hi.floor() as i32);
            let step = ((b - a) / 8).max(1);
            (a..=b)
                .step_by(step as usize)
                .map(|e| ((e as f64 - self.lo) / (self.hi - self.lo), format!("1e{e}")))
                .collect()
        } else {
            let raw = (self.hi - self.lo) / 6.0;
            let mag = 10f64.powf(raw.log10().floor());
            let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
            let mut v = (self.lo / step).ceil() * step;
            let mut out = Vec::new();
            while v <= self.hi {
                out.push(((v - self.lo) / (self.hi - self.lo), format!("{}", (v / step).round() * step)));
                v += step;
            }
            out
        }
    }
}

impl Chart {
    pub fn to_svg(&self) -> String {
        let (ml, mr, mt, mb) = MARGIN;
        let (pw, ph) = (WIDTH - ml - mr, HEIGHT - mt - mb);
        let xs = Axis::fit(self.series.iter().flat_map(|s| s.points.iter().map(|p| p.0)), self.log_x);
        let ys = Axis::fit(
            self.series.iter().flat_map(|s| {
                s.points.iter().enumerate().flat_map(move |(i, p)| {
                    let e = s.errors.as_ref().map_or(0.0, |e| e[i]);
                    [p.1, if e < p.1 { p.1 - e } else { p.1 }, p.1 + e]
                })
            }),
            self.log_y,
        );
        let px = |v: f64| xs.frac(v).map(|f| ml + f * pw);
        let py = |v: f64| ys.frac(v).map(|f| mt + (1.0 - f) * ph);
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="13">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="28" text-anchor="middle" font-size="16">{}</text>"#, WIDTH / 2.0, escape(&self.title));
        let _ = writeln!(s, r#"<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
        for (f, label) in xs.ticks() {
            let x = ml + f * pw;
            let _ = writeln!(s, r##"<line x1="{x:.2}" y1="{mt}" x2="{x:.2}" y2="{:.2}" stroke="#ddd"/>"##, mt + ph);
            let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#, mt + ph + 18.0);
        }
        for (f, label) in ys.ticks() {
            let y = mt + (1.0 - f) * ph;
            let _ = writeln!(s, r##"<line x1="{ml}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/>"##, ml + pw);
            let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"#, ml - 6.0, y + 4.0);
        }
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, ml + pw / 2.0, HEIGHT - 20.0, escape(&self.x_label));
        let _ = writeln!(
            s,
            r#"<text x="20" y="{0}" text-anchor="middle" transform="rotate(-90 20 {0})">{1}</text>"#,
            mt + ph / 2.0,
            escape(&self.y_label)
        );
        for (k, ser) in self.series.iter().enumerate() {
            let color = COLORS[k % COLORS.len()];
            match ser.style {
                Style::Line => {
                    let pts: Vec<String> = ser
                        .points
                        .iter()
                        .filter_map(|&(x, y)| Some(format!("{:.2},{:.2}", px(x)?, py(y)?)))
                        .collect();
                    let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, pts.join(" "));
                }
                Style::Markers => {
                    for (i, &(x, y)) in ser.points.iter().enumerate() {
                        let (Some(cx), Some(cy)) = (px(x), py(y)) else { continue };
                        if let Some(e) = ser.errors.as_ref().map(|e| e[i]) {
                            let lo = py(if e < y { y - e } else { y }).unwrap_or(cy);
                            let hi = py(y + e).unwrap_or(cy);
                            let _ = writeln!(s, r#"<line x1="{cx:.2}" y1="{lo:.2}" x2="{cx:.2}" y2="{hi:.2}" stroke="{color}"/>"#);
                        }
                        let _ = writeln!(s, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="4" fill="{color}"/>"#);
                    }
                }
            }
            let ly = mt + 18.0 + 18.0 * k as f64;
            let _ = writeln!(s, r#"<rect x="{:.2}" y="{:.2}" width="12" height="12" fill="{color}"/>"#, ml + 12.0, ly - 10.0);
            let _ = writeln!(s, r#"<text x="{:.2}" y="{ly:.2}">{}</text>"#, ml + 30.0, escape(&ser.label));
        }
        s.push_str("</svg>\n");
        s
    }
}

/// Grayscale heat map of `values[row][col]` over `[x0, x1] × [y0, y1]`
/// (row 0 at `y0`). Non-finite cells are drawn red.
pub fn heat_slice(title: &str, x_range: (f64, f64), y_range: (f64, f64), values: &[Vec<f64>]) -> String {
    let (ml, mr, mt, mb) = MARGIN;
    let (pw, ph) = (WIDTH - ml - mr - 60.0, HEIGHT - mt - mb);
    let rows = values.len().max(1);
    let cols = values.first().map_or(1, |r| r.len().max(1));
    let (lo, hi) = values
        .iter()
        .flatten()
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let (cw, ch) = (pw / cols as f64, ph / rows as f64);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="13">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="28" text-anchor="middle" font-size="16">{}</text>"#, WIDTH / 2.0, escape(title));
    for (i, row) in values.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let fill = if v.is_finite() {
                let g = (255.0 * (v - lo) / span).round() as u8;
                format!("rgb({g},{g},{g})")
            } else {
                "rgb(200,0,0)".to_string()
            };
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
                ml + j as f64 * cw,
                mt + ph - (i + 1) as f64 * ch,
                cw + 0.3,
                ch + 0.3
            );
        }
    }
    let _ = writeln!(s, r#"<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    let _ = writeln!(s, r#"<text x="{ml}" y="{}">{}</text>"#, mt + ph + 18.0, x_range.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, ml + pw, mt + ph + 18.0, x_range.1);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, ml - 6.0, mt + ph, y_range.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, ml - 6.0, mt + 10.0, y_range.1);
    let bx = ml + pw + 20.0;
    for k in 0..50 {
        let g = (255.0 * k as f64 / 49.0).round() as u8;
        let _ = writeln!(
            s,
            r#"<rect x="{bx}" y="{:.2}" width="20" height="{:.2}" fill="rgb({g},{g},{g})"/>"#,
            mt + ph - (k + 1) as f64 * ph / 50.0,
            ph / 50.0 + 0.3
        );
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}">{:.3e}</text>"#, bx - 10.0, mt - 6.0, hi);
    let _ = writeln!(s, r#"<text x="{}" y="{}">{:.3e}</text>"#, bx - 10.0, mt + ph + 18.0, lo);
    s.push_str("</svg>\n");
    s
}

/// Normalized ratio against distance to each approached feature, one series
/// per feature and target.
pub fn bound_chart(report: &BoundReport) -> Chart {
    let mut series = Vec::new();
    for f in &report.features {
        let mut targets: Vec<[f64; 3]> = Vec::new();
        for c in report.cells.iter().filter(|c| c.feature == f.feature) {
            if !targets.contains(&c.y) {
                targets.push(c.y);
            }
        }
        for (k, y) in targets.iter().enumerate() {
            let cells: Vec<_> = report.cells.iter().filter(|c| c.feature == f.feature && c.y == *y && c.count > 0).collect();
            series.push(
                Series::markers(format!("{} target {k}", f.feature), cells.iter().map(|c| (c.distance, c.ratio)).collect())
                    .with_errors(cells.iter().map(|c| c.ratio_stderr).collect()),
            );
        }
    }
    Chart {
        title: format!("{}: G / (I I Gaussian), sigma = {:.3}", report.domain, report.sigma),
        x_label: "distance to feature".into(),
        y_label: "ratio".into(),
        log_x: true,
        log_y: true,
        series,
    }
}

pub fn decay_chart(fit: &DecayFit) -> Chart {
    let pts: Vec<(f64, f64)> = fit.points.iter().filter(|p| p.value > 0.0).map(|p| (p.distance, p.value)).collect();
    let errs = fit.points.iter().filter(|p| p.value > 0.0).map(|p| p.stderr).collect();
    let mut series = vec![Series::markers("survival", pts.clone()).with_errors(errs)];
    if let (Some(first), Some(last)) = (fit.points.iter().find(|p| p.used), fit.points.iter().rev().find(|p| p.used)) {
        let anchor = fit.points.iter().filter(|p| p.used).map(|p| p.value.ln() - fit.exponent * p.distance.ln()).sum::<f64>()
            / fit.points.iter().filter(|p| p.used).count() as f64;
        let line = [first.distance, last.distance]
            .iter()
            .map(|&d| (d, (anchor + fit.exponent * d.ln()).exp()))
            .collect();
        series.push(Series::line(format!("slope {:.3} ± {:.3}", fit.exponent, fit.stderr), line));
    }
    Chart {
        title: format!("decay toward {} (t = {})", fit.feature, fit.t),
        x_label: "distance".into(),
        y_label: "P(survive)".into(),
        log_x: true,
        log_y: true,
        series,
    }
}

pub fn longtime_chart(report: &LongtimeReport) -> Chart {
    let pts: Vec<(f64, f64)> = report.times.iter().zip(&report.values).filter(|p| *p.1 > 0.0).map(|(t, v)| (*t, *v)).collect();
    let errs = report.times.iter().zip(&report.values).zip(&report.stderrs).filter(|p| *p.0 .1 > 0.0).map(|p| *p.1).collect();
    Chart {
        title: format!("long-time decay, rate {:.4} ± {:.2e}", report.rate, report.rate_stderr),
        x_label: "t".into(),
        y_label: "value".into(),
        log_x: false,
        log_y: true,
        series: vec![Series::markers("value", pts).with_errors(errs)],
    }
}
