//! Minimal SVG writers for embedding scatters and volume curves.

use std::fmt::Write as _;

use crate::graphbuild::Label;

const SIZE: f64 = 480.0;
const MARGIN: f64 = 40.0;
const INTEREST: &str = "#1f77b4";
const NON_INTEREST: &str = "#2ca02c";
const PALETTE: [&str; 6] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];

/// Linear map from data coordinates onto pixels; `flip` puts larger values
/// higher up.
struct Axis {
    lo: f64,
    scale: f64,
    flip: bool,
}

impl Axis {
    fn px(&self, v: f64) -> f64 {
        let d = (v - self.lo) * self.scale;
        if self.flip {
            SIZE - MARGIN - d
        } else {
            MARGIN + d
        }
    }
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{s}" height="{s}" viewBox="0 0 {s} {s}">"#,
        s = SIZE
    );
    let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="20" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        SIZE / 2.0,
        escape(title)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Scatter of 2-d points colored by label, with the decision circle.
pub fn scatter(title: &str, points: &[(f64, f64, Label)], center: (f64, f64), radius: f64) -> String {
    let mut xs = vec![center.0 - radius, center.0 + radius];
    let mut ys = vec![center.1 - radius, center.1 + radius];
    xs.extend(points.iter().map(|p| p.0));
    ys.extend(points.iter().map(|p| p.1));
    let (x_lo, x_hi) = bounds(&xs);
    let (y_lo, y_hi) = bounds(&ys);
    // one scale for both axes so the circle stays round
    let span = (x_hi - x_lo).max(y_hi - y_lo);
    let scale = (SIZE - 2.0 * MARGIN) / span;
    let x = Axis {
        lo: x_lo,
        scale,
        flip: false,
    };
    let y = Axis {
        lo: y_lo,
        scale,
        flip: true,
    };

    let mut out = String::new();
    header(&mut out, title);
    let _ = writeln!(
        out,
        r##"<circle class="sphere" cx="{:.3}" cy="{:.3}" r="{:.3}" data-center="{:?} {:?}" data-radius="{:?}" fill="none" stroke="#d62728" stroke-width="1.5"/>"##,
        x.px(center.0),
        y.px(center.1),
        radius * scale,
        center.0,
        center.1,
        radius
    );
    for &(px, py, label) in points {
        let color = if label.is_interest() { INTEREST } else { NON_INTEREST };
        let _ = writeln!(
            out,
            r#"<circle cx="{:.3}" cy="{:.3}" r="2.5" fill="{color}" fill-opacity="0.7"/>"#,
            x.px(px),
            y.px(py)
        );
    }
    legend(&mut out, &[("interest", INTEREST), ("non-interest", NON_INTEREST)]);
    out.push_str("</svg>\n");
    out
}

/// One polyline per series over a shared x axis.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    let all: Vec<(f64, f64)> = series.iter().flat_map(|s| s.1.iter().copied()).collect();
    let (x_lo, x_hi) = bounds(&all.iter().map(|p| p.0).collect::<Vec<_>>());
    let (y_lo, y_hi) = bounds(&all.iter().map(|p| p.1).collect::<Vec<_>>());
    let inner = SIZE - 2.0 * MARGIN;
    let x = Axis {
        lo: x_lo,
        scale: inner / (x_hi - x_lo),
        flip: false,
    };
    let y = Axis {
        lo: y_lo,
        scale: inner / (y_hi - y_lo),
        flip: true,
    };

    let mut out = String::new();
    header(&mut out, title);
    let _ = writeln!(
        out,
        r##"<path d="M{m} {b} H{r} M{m} {b} V{m}" stroke="#000000" fill="none"/>"##,
        m = MARGIN,
        b = SIZE - MARGIN,
        r = SIZE - MARGIN
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
        SIZE / 2.0,
        SIZE - 8.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="12" y="{c}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 12 {c})">{}</text>"#,
        escape(y_label),
        c = SIZE / 2.0
    );
    for v in [x_lo, x_hi] {
        let _ = writeln!(
            out,
            r#"<text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="10" text-anchor="middle">{v:.3}</text>"#,
            x.px(v),
            SIZE - MARGIN + 14.0
        );
    }
    for v in [y_lo, y_hi] {
        let _ = writeln!(
            out,
            r#"<text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="10" text-anchor="end">{v:.3e}</text>"#,
            MARGIN - 4.0,
            y.px(v) + 4.0
        );
    }
    let mut entries = Vec::new();
    for (i, (name, points)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = points
            .iter()
            .map(|&(a, b)| format!("{:.3},{:.3}", x.px(a), y.px(b)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            coords.join(" ")
        );
        entries.push((name.as_str(), color));
    }
    legend(&mut out, &entries);
    out.push_str("</svg>\n");
    out
}

fn legend(out: &mut String, entries: &[(&str, &str)]) {
    for (i, (name, color)) in entries.iter().enumerate() {
        let y = 36.0 + 16.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{}" y="{}" width="10" height="10" fill="{color}"/><text x="{}" y="{}" font-family="sans-serif" font-size="11">{}</text>"#,
            SIZE - 130.0,
            y - 9.0,
            SIZE - 115.0,
            y,
            escape(name)
        );
    }
}

/// Min and max, widened so a degenerate range still maps to a finite scale.
fn bounds(values: &[f64]) -> (f64, f64) {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}
