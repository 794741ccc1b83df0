//! Minimal self-contained SVG charts. Callers pass coordinates already in
//! plot space (take logs first for log axes).

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const PANEL_HEIGHT: f64 = 340.0;
const MARGIN_LEFT: f64 = 72.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 36.0;
const MARGIN_BOTTOM: f64 = 48.0;
const TICKS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Line,
    Markers,
    Bars,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub style: Style,
    pub color: &'static str,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>, style: Style, color: &'static str) -> Self {
        Self {
            label: label.into(),
            points,
            style,
            color,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Rendered as `<text id="annotation">`.
    pub annotation: Option<String>,
}

pub fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    top: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN_LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }
    fn py(&self, y: f64) -> f64 {
        let inner = PANEL_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        self.top + MARGIN_TOP + (self.y1 - y) / (self.y1 - self.y0) * inner
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
        let d = 0.5 * lo.abs().max(1.0);
        return (lo - d, hi + d);
    }
    let d = 0.05 * (hi - lo);
    (lo - d, hi + d)
}

fn render_panel(out: &mut String, panel: &Panel, top: f64) {
    let finite = |p: &&(f64, f64)| p.0.is_finite() && p.1.is_finite();
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for s in &panel.series {
        for p in s.points.iter().filter(finite) {
            xs.push(p.0);
            ys.push(p.1);
        }
        if s.style == Style::Bars {
            ys.push(0.0);
        }
    }
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (x0, x1) = padded(min(&xs), max(&xs));
    let (y0, y1) = padded(min(&ys), max(&ys));
    let f = Frame { x0, x1, y0, y1, top };
    let bottom = top + PANEL_HEIGHT - MARGIN_BOTTOM;
    let right = WIDTH - MARGIN_RIGHT;

    let _ = writeln!(
        out,
        r#"<text class="title" x="{:.1}" y="{:.1}">{}</text>"#,
        WIDTH / 2.0,
        top + 22.0,
        escape(&panel.title)
    );
    let _ = writeln!(
        out,
        r#"<rect class="frame" x="{MARGIN_LEFT}" y="{:.1}" width="{:.1}" height="{:.1}"/>"#,
        top + MARGIN_TOP,
        right - MARGIN_LEFT,
        bottom - top - MARGIN_TOP
    );
    for i in 0..=TICKS {
        let t = i as f64 / TICKS as f64;
        let xv = x0 + t * (x1 - x0);
        let yv = y0 + t * (y1 - y0);
        let _ = writeln!(
            out,
            r#"<text class="tick" x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            f.px(xv),
            bottom + 16.0,
            tick_label(xv)
        );
        let _ = writeln!(
            out,
            r#"<text class="tick" x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            MARGIN_LEFT - 6.0,
            f.py(yv) + 4.0,
            tick_label(yv)
        );
    }
    let _ = writeln!(
        out,
        r#"<text class="label" x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        (MARGIN_LEFT + right) / 2.0,
        bottom + 36.0,
        escape(&panel.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text class="label" transform="translate(16,{:.1}) rotate(-90)" text-anchor="middle">{}</text>"#,
        top + PANEL_HEIGHT / 2.0,
        escape(&panel.y_label)
    );

    for (idx, s) in panel.series.iter().enumerate() {
        let pts: Vec<&(f64, f64)> = s.points.iter().filter(finite).collect();
        match s.style {
            Style::Line => {
                let path: Vec<String> = pts.iter().map(|p| format!("{:.2},{:.2}", f.px(p.0), f.py(p.1))).collect();
                let _ = writeln!(
                    out,
                    r#"<polyline fill="none" stroke="{}" stroke-width="1.6" points="{}"/>"#,
                    s.color,
                    path.join(" ")
                );
            }
            Style::Markers => {
                for p in pts {
                    let _ = writeln!(
                        out,
                        r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{}"/>"#,
                        f.px(p.0),
                        f.py(p.1),
                        s.color
                    );
                }
            }
            Style::Bars => {
                let slot = (f.px(x1) - f.px(x0)) / (pts.len().max(1) as f64 + 2.0);
                for p in pts {
                    let (ya, yb) = (f.py(p.1.max(0.0)), f.py(p.1.min(0.0)));
                    let _ = writeln!(
                        out,
                        r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                        f.px(p.0) - 0.35 * slot,
                        ya,
                        0.7 * slot,
                        yb - ya,
                        s.color
                    );
                }
            }
        }
        let _ = writeln!(
            out,
            r#"<text class="legend" x="{:.1}" y="{:.1}" fill="{}">{}</text>"#,
            right - 8.0,
            top + MARGIN_TOP + 16.0 + 16.0 * idx as f64,
            s.color,
            escape(&s.label)
        );
    }
    if let Some(note) = &panel.annotation {
        let _ = writeln!(
            out,
            r#"<text id="annotation" class="annotation" x="{:.1}" y="{:.1}">{}</text>"#,
            MARGIN_LEFT + 10.0,
            top + MARGIN_TOP + 18.0,
            escape(note)
        );
    }
}

/// Panels stacked vertically in one document with inline styling.
pub fn document(panels: &[Panel]) -> String {
    let height = PANEL_HEIGHT * panels.len().max(1) as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}">"#
    );
    out.push_str(
        "<style>text{font-family:sans-serif;font-size:11px;fill:#222}.title{font-size:14px;text-anchor:middle}\
         .legend{text-anchor:end}.annotation{font-size:13px}.frame{fill:none;stroke:#444;stroke-width:1}</style>\n",
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, panel) in panels.iter().enumerate() {
        render_panel(&mut out, panel, PANEL_HEIGHT * i as f64);
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_all_styles() {
        let panel = Panel {
            title: "a < b".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            series: vec![
                Series::new("line", vec![(0.0, 1.0), (1.0, 2.0)], Style::Line, "#1f77b4"),
                Series::new("dots", vec![(0.5, f64::NAN), (0.5, 1.5)], Style::Markers, "#d62728"),
                Series::new("bars", vec![(0.0, 0.3)], Style::Bars, "#2ca02c"),
            ],
            annotation: Some("q_hat = 1.5".into()),
        };
        let svg = document(&[panel]);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("a &lt; b"));
        assert!(svg.contains(r#"id="annotation""#));
        assert_eq!(svg.matches("<circle").count(), 1);
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn degenerate_range() {
        let panel = Panel {
            series: vec![Series::new("one", vec![(1.0, 1.0)], Style::Markers, "#000")],
            ..Panel::default()
        };
        assert!(!document(&[panel]).contains("NaN"));
    }
}
