//! Minimal hand-written SVG charts.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 400.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn header(out: &mut String, title: &str, x_label: &str, y_label: &str) {
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>
<text x="{}" y="{}" text-anchor="middle">{}</text>
<text transform="translate(16 {}) rotate(-90)" text-anchor="middle">{}</text>
"#,
        LEFT + (W - LEFT - RIGHT) / 2.0,
        escape(title),
        LEFT + (W - LEFT - RIGHT) / 2.0,
        H - 10.0,
        escape(x_label),
        TOP + (H - TOP - BOTTOM) / 2.0,
        escape(y_label),
    );
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let vals: Vec<f64> = values
            .filter(|v| v.is_finite() && (!log || *v > 0.0))
            .map(|v| if log { v.log10() } else { v })
            .collect();
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi) = match (lo.is_finite(), hi > lo) {
            (false, _) => (0.0, 1.0),
            (true, false) => (lo - 0.5, lo + 0.5),
            _ => (lo, hi),
        };
        Self { lo, hi, log }
    }

    fn unit(&self, v: f64) -> Option<f64> {
        let v = if self.log {
            if v <= 0.0 {
                return None;
            }
            v.log10()
        } else {
            v
        };
        v.is_finite().then(|| (v - self.lo) / (self.hi - self.lo))
    }

    fn label(&self, t: f64) -> String {
        let v = self.lo + t * (self.hi - self.lo);
        let v = if self.log { 10f64.powf(v) } else { v };
        if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
            format!("{v:.1e}")
        } else {
            format!("{v:.3}")
                .trim_end_matches('0')
                .trim_end_matches('.')
                .to_string()
        }
    }
}

fn frame(out: &mut String, x: &Axis, y: &Axis) {
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    let _ = writeln!(
        out,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let px = LEFT + t * pw;
        let py = TOP + ph - t * ph;
        let _ = writeln!(
            out,
            r#"<text x="{px:.1}" y="{}" text-anchor="middle">{}</text>"#,
            TOP + ph + 18.0,
            x.label(t)
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            py + 4.0,
            y.label(t)
        );
        let _ = writeln!(
            out,
            r##"<line x1="{LEFT}" x2="{}" y1="{py:.1}" y2="{py:.1}" stroke="#ddd"/>"##,
            LEFT + pw
        );
    }
}

/// One polyline per series; `log_y` drops non-positive values.
pub fn line_chart(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[Series],
    log_y: bool,
) -> String {
    let mut out = String::new();
    header(&mut out, title, x_label, y_label);
    let x = Axis::fit(
        series.iter().flat_map(|s| s.points.iter().map(|p| p.0)),
        false,
    );
    let y = Axis::fit(
        series.iter().flat_map(|s| s.points.iter().map(|p| p.1)),
        log_y,
    );
    frame(&mut out, &x, &y);
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .filter_map(|&(a, b)| Some((x.unit(a)?, y.unit(b)?)))
            .map(|(u, v)| format!("{:.2},{:.2}", LEFT + u * pw, TOP + ph - v * ph))
            .collect();
        if pts.len() == 1 {
            let (cx, cy) = pts[0].split_once(',').unwrap();
            let _ = writeln!(out, r#"<circle cx="{cx}" cy="{cy}" r="3" fill="{color}"/>"#);
        } else {
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                pts.join(" ")
            );
        }
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{}" y="{}" width="12" height="3" fill="{color}"/>"#,
            W - RIGHT + 10.0,
            ly - 4.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{ly}">{}</text>"#,
            W - RIGHT + 26.0,
            escape(&s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Histogram bars from `(low, high, count)` bins.
pub fn bar_chart(title: &str, x_label: &str, bins: &[(f64, f64, usize)]) -> String {
    let mut out = String::new();
    header(&mut out, title, x_label, "count");
    let x = Axis::fit(bins.iter().flat_map(|b| [b.0, b.1]), false);
    let y = Axis::fit(bins.iter().map(|b| b.2 as f64).chain([0.0]), false);
    frame(&mut out, &x, &y);
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    for &(lo, hi, count) in bins {
        let (Some(a), Some(b), Some(h)) = (x.unit(lo), x.unit(hi), y.unit(count as f64)) else {
            continue;
        };
        let _ = writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
            LEFT + a * pw,
            TOP + ph - h * ph,
            ((b - a) * pw).max(0.5),
            h * ph,
            COLORS[0]
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charts_are_well_formed() {
        let s = vec![
            Series {
                label: "a<b".into(),
                points: vec![(1.0, 10.0), (2.0, 1.0), (3.0, 0.0)],
            },
            Series {
                label: "single".into(),
                points: vec![(2.0, 5.0)],
            },
        ];
        let svg = line_chart("t", "x", "y", &s, true);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains("a&lt;b"));
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
        let svg = bar_chart("h", "d", &[(-1.0, -0.5, 3), (-0.5, 0.0, 0)]);
        assert_eq!(svg.matches("<rect").count(), 2 + 2);
    }
}
