//! Minimal static SVG plots: ECDF step curves and point-interval charts.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const MARGIN_LEFT: f64 = 150.0;
const MARGIN_RIGHT: f64 = 130.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 45.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Interval {
    pub label: String,
    pub estimate: f64,
    pub low: f64,
    pub high: f64,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, height: f64, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="13">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 1.0, hi + 1.0)
    } else {
        (lo, hi)
    }
}

/// Right-continuous step curves on a [0, 1] y axis.
pub fn step_plot(title: &str, x_label: &str, series: &[Series]) -> String {
    let height = 320.0;
    let (x0, x1) = range(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let x0 = x0.min(0.0);
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = height - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| MARGIN_TOP + (1.0 - y) * plot_h;

    let mut out = String::new();
    header(&mut out, height, title);
    axes(&mut out, height, x0, x1, x_label, "cumulative fraction");
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut path = format!("M {:.1} {:.1}", sx(x0), sy(0.0));
        let mut prev = 0.0;
        for (x, y) in &s.points {
            let _ = write!(path, " H {:.1} V {:.1}", sx(*x), sy(*y));
            prev = *y;
        }
        let _ = write!(path, " H {:.1} V {:.1}", sx(x1), sy(prev));
        let _ = writeln!(out, r#"<path d="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>"#);
        let ly = MARGIN_TOP + 14.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{ly:.1}" fill="{color}">{}</text>"#,
            WIDTH - MARGIN_RIGHT + 10.0,
            escape(&s.name)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn axes(out: &mut String, height: f64, x0: f64, x1: f64, x_label: &str, y_label: &str) {
    let bottom = height - MARGIN_BOTTOM;
    let right = WIDTH - MARGIN_RIGHT;
    let _ = writeln!(
        out,
        r#"<path d="M {MARGIN_LEFT} {MARGIN_TOP} V {bottom} H {right}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{MARGIN_LEFT}" y="{:.1}" text-anchor="middle">{}</text>"#,
        bottom + 15.0,
        fmt_tick(x0)
    );
    let _ = writeln!(
        out,
        r#"<text x="{right}" y="{:.1}" text-anchor="middle">{}</text>"#,
        bottom + 15.0,
        fmt_tick(x1)
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        (MARGIN_LEFT + right) / 2.0,
        bottom + 32.0,
        escape(x_label)
    );
    if !y_label.is_empty() {
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            MARGIN_LEFT - 8.0,
            MARGIN_TOP + 4.0,
            escape(y_label)
        );
    }
}

fn fmt_tick(v: f64) -> String {
    if v.abs() >= 100.0 || v == v.round() {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

/// Point estimates with interval whiskers, one row per entry, and a dashed
/// reference line. With `log_scale` values must be positive.
pub fn interval_plot(title: &str, x_label: &str, rows: &[Interval], reference: f64, log_scale: bool) -> String {
    let height = MARGIN_TOP + MARGIN_BOTTOM + 24.0 * rows.len().max(1) as f64;
    let t = |v: f64| if log_scale { v.max(1e-12).ln() } else { v };
    let (x0, x1) = range(
        rows.iter()
            .flat_map(|r| [t(r.low), t(r.high), t(r.estimate)])
            .chain([t(reference)]),
    );
    let pad = (x1 - x0) * 0.05;
    let (x0, x1) = (x0 - pad, x1 + pad);
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let sx = |v: f64| MARGIN_LEFT + (t(v).clamp(x0, x1) - x0) / (x1 - x0) * plot_w;

    let mut out = String::new();
    header(&mut out, height, title);
    let (lo_tick, hi_tick) = if log_scale { (x0.exp(), x1.exp()) } else { (x0, x1) };
    axes(&mut out, height, lo_tick, hi_tick, x_label, "");
    let rx = sx(reference);
    let _ = writeln!(
        out,
        r#"<line x1="{rx:.1}" y1="{MARGIN_TOP}" x2="{rx:.1}" y2="{:.1}" stroke="gray" stroke-dasharray="4 3"/>"#,
        height - MARGIN_BOTTOM
    );
    for (i, r) in rows.iter().enumerate() {
        let y = MARGIN_TOP + 12.0 + 24.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            MARGIN_LEFT - 8.0,
            y + 4.0,
            escape(&r.label)
        );
        let _ = writeln!(
            out,
            r#"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="black"/>"#,
            sx(r.low),
            sx(r.high)
        );
        let _ = writeln!(out, r##"<circle cx="{:.1}" cy="{y:.1}" r="3.5" fill="#d62728"/>"##, sx(r.estimate));
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_plot_is_well_formed() {
        let svg = step_plot(
            "wins <by> round",
            "round",
            &[Series {
                name: "3v1 crew".into(),
                points: vec![(2.0, 0.5), (4.0, 1.0)],
            }],
        );
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("wins &lt;by&gt; round"));
        assert_eq!(svg.matches("<path").count(), 2);
    }

    #[test]
    fn interval_plot_handles_empty_and_log() {
        let svg = interval_plot("none", "x", &[], 0.0, false);
        assert!(svg.contains("</svg>"));
        let svg = interval_plot(
            "or",
            "odds ratio",
            &[Interval {
                label: "a".into(),
                estimate: 2.0,
                low: 1.5,
                high: 3.0,
            }],
            1.0,
            true,
        );
        assert_eq!(svg.matches("<circle").count(), 1);
    }
}
