//! Minimal static SVG line plots.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

pub enum Style {
    Line,
    Markers,
}

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub style: Style,
}

pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log: bool,
    /// Same scale on both axes.
    pub equal_aspect: bool,
    pub series: Vec<Series>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Plot {
    fn bounds(&self) -> Option<(f64, f64, f64, f64)> {
        let pts = self.series.iter().flat_map(|s| s.points.iter()).map(|&(x, y)| self.tf(x, y));
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for (x, y) in pts.filter(|(x, y)| x.is_finite() && y.is_finite()) {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            return None;
        }
        let pad = |a: f64, b: f64| {
            let d = if b > a { 0.05 * (b - a) } else { 0.5 * a.abs().max(1.0) };
            (a - d, b + d)
        };
        let ((x0, x1), (y0, y1)) = (pad(x0, x1), pad(y0, y1));
        if self.equal_aspect {
            let span = ((x1 - x0) / (W - 2.0 * MARGIN)).max((y1 - y0) / (H - 2.0 * MARGIN));
            let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
            let (hx, hy) = (0.5 * span * (W - 2.0 * MARGIN), 0.5 * span * (H - 2.0 * MARGIN));
            return Some((cx - hx, cx + hx, cy - hy, cy + hy));
        }
        Some((x0, x1, y0, y1))
    }

    fn tf(&self, x: f64, y: f64) -> (f64, f64) {
        if self.log {
            (x.log10(), y.log10())
        } else {
            (x, y)
        }
    }

    fn tick(&self, v: f64) -> String {
        if self.log {
            format!("{:.2e}", 10f64.powf(v))
        } else {
            format!("{v:.3}")
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#, W / 2.0, escape(&self.title));
        let Some((x0, x1, y0, y1)) = self.bounds() else {
            s.push_str("</svg>\n");
            return s;
        };
        let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
        let py = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN);
        let _ = writeln!(
            s,
            r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            W - 2.0 * MARGIN,
            H - 2.0 * MARGIN
        );
        let font = r#"font-family="sans-serif" font-size="11""#;
        for (v, anchor, x) in [(x0, "start", MARGIN), (x1, "end", W - MARGIN)] {
            let _ = writeln!(s, r#"<text x="{x}" y="{}" text-anchor="{anchor}" {font}>{}</text>"#, H - MARGIN + 14.0, self.tick(v));
        }
        for (v, y) in [(y0, H - MARGIN), (y1, MARGIN + 10.0)] {
            let _ = writeln!(s, r#"<text x="{}" y="{y}" text-anchor="end" {font}>{}</text>"#, MARGIN - 4.0, self.tick(v));
        }
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" {font}>{}</text>"#, W / 2.0, H - 20.0, escape(&self.x_label));
        let _ = writeln!(
            s,
            r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})" {font}>{}</text>"#,
            H / 2.0,
            H / 2.0,
            escape(&self.y_label)
        );
        for (i, series) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let pts: Vec<(f64, f64)> = series
                .points
                .iter()
                .map(|&(x, y)| self.tf(x, y))
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .map(|(x, y)| (px(x), py(y)))
                .collect();
            match series.style {
                Style::Line => {
                    let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
                    let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, path.join(" "));
                }
                Style::Markers => {
                    for (x, y) in &pts {
                        let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{color}"/>"#);
                    }
                }
            }
            let ly = MARGIN + 16.0 + 14.0 * i as f64;
            let _ = writeln!(s, r#"<text x="{}" y="{ly}" text-anchor="end" fill="{color}" {font}>{}</text>"#, W - MARGIN - 6.0, escape(&series.label));
        }
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_series_and_escapes() {
        let p = Plot {
            title: "a < b".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            log: true,
            equal_aspect: false,
            series: vec![Series { label: "s".into(), points: vec![(1.0, 10.0), (10.0, 100.0), (0.0, 1.0)], style: Style::Line }],
        };
        let svg = p.render();
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains("a &lt; b") && svg.contains("<polyline"));
    }

    #[test]
    fn empty_plot_is_valid() {
        let p = Plot { title: String::new(), x_label: String::new(), y_label: String::new(), log: false, equal_aspect: true, series: vec![] };
        assert!(p.render().ends_with("</svg>\n"));
    }
}
