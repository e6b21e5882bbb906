//! Minimal self-contained SVG line plots.

use std::fmt::Write as _;

/// One panel: a title and a curve `(x[i], y[i])`.
#[derive(Debug, Clone)]
pub struct Panel {
    pub title: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

const PANEL_W: f64 = 360.0;
const PANEL_H: f64 = 220.0;
const MARGIN: f64 = 40.0;

fn range(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().copied().filter(|x| x.is_finite()).fold(f64::INFINITY, f64::min);
    let hi = v
        .iter()
        .copied()
        .filter(|x| x.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || !hi.is_finite() {
        return (-1.0, 1.0);
    }
    if hi - lo < 1e-300 {
        (lo - 1.0, hi + 1.0)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders panels on a grid with `cols` columns.
pub fn render_panels(panels: &[Panel], cols: usize) -> String {
    let cols = cols.max(1);
    let rows = panels.len().div_ceil(cols).max(1);
    let width = cols as f64 * PANEL_W;
    let height = rows as f64 * PANEL_H;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (p, panel) in panels.iter().enumerate() {
        let ox = (p % cols) as f64 * PANEL_W;
        let oy = (p / cols) as f64 * PANEL_H;
        let (x0, x1) = range(&panel.x);
        let (y0, y1) = range(&panel.y);
        let pw = PANEL_W - 1.5 * MARGIN;
        let ph = PANEL_H - 1.5 * MARGIN;
        let left = ox + MARGIN;
        let top = oy + 0.75 * MARGIN;
        let sx = |x: f64| left + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| top + (y1 - y) / (y1 - y0) * ph;

        let _ = writeln!(
            svg,
            r#"<rect x="{left:.2}" y="{top:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>"#
        );
        if y0 < 0.0 && y1 > 0.0 {
            let zy = sy(0.0);
            let _ = writeln!(
                svg,
                r##"<line x1="{left:.2}" y1="{zy:.2}" x2="{:.2}" y2="{zy:.2}" stroke="#bbb"/>"##,
                left + pw
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            left + pw / 2.0,
            top - 6.0,
            escape(&panel.title)
        );
        for (val, y) in [(y1, top), (y0, top + ph)] {
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{val:.3}</text>"#,
                left - 4.0,
                y + 4.0
            );
        }
        for (val, x, anchor) in [(x0, left, "start"), (x1, left + pw, "end")] {
            let _ = writeln!(
                svg,
                r#"<text x="{x:.2}" y="{:.2}" text-anchor="{anchor}">{val:.2}</text>"#,
                top + ph + 14.0
            );
        }
        let points: Vec<String> = panel
            .x
            .iter()
            .zip(&panel.y)
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|(&x, &y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            svg,
            r##"<polyline fill="none" stroke="#1f4e99" stroke-width="1.2" points="{}"/>"##,
            points.join(" ")
        );
    }
    svg.push_str("</svg>\n");
    svg
}
