//! Minimal SVG line charts: one panel per series.

use std::fmt::Write;

use macroforge::engine::SimulationData;

const PANEL_W: f64 = 320.0;
const PANEL_H: f64 = 200.0;
const MARGIN: f64 = 36.0;
const COLUMNS: usize = 5;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn panel(out: &mut String, name: &str, ys: &[f64], x0: f64, y0: f64) {
    let w = PANEL_W - 2.0 * MARGIN;
    let h = PANEL_H - 2.0 * MARGIN;
    let finite = ys.iter().copied().filter(|y| y.is_finite());
    let lo = finite.clone().fold(f64::INFINITY, f64::min);
    let hi = finite.fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if lo.is_finite() && hi > lo {
        (lo, hi)
    } else if lo.is_finite() {
        (lo - 0.5, lo + 0.5)
    } else {
        (0.0, 1.0)
    };
    let left = x0 + MARGIN;
    let top = y0 + MARGIN;
    let _ = write!(
        out,
        r#"<g><text x="{:.1}" y="{:.1}" font-size="13" text-anchor="middle">{}</text>"#,
        x0 + PANEL_W / 2.0,
        y0 + 20.0,
        escape(name)
    );
    let _ = write!(
        out,
        r#"<polyline fill="none" stroke="black" points="{left:.1},{top:.1} {left:.1},{:.1} {:.1},{:.1}"/>"#,
        top + h,
        left + w,
        top + h
    );
    let _ = write!(
        out,
        r#"<text x="{:.1}" y="{:.1}" font-size="9" text-anchor="end">{hi:.4e}</text><text x="{:.1}" y="{:.1}" font-size="9" text-anchor="end">{lo:.4e}</text>"#,
        left - 2.0,
        top + 4.0,
        left - 2.0,
        top + h
    );
    let n = ys.len().max(2) - 1;
    let mut points = String::new();
    for (i, y) in ys.iter().enumerate().filter(|(_, y)| y.is_finite()) {
        let px = left + w * i as f64 / n as f64;
        let py = top + h * (1.0 - (y - lo) / (hi - lo));
        let _ = write!(points, "{px:.2},{py:.2} ");
    }
    let _ = write!(
        out,
        r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{}"/></g>"#,
        points.trim_end()
    );
}

pub fn svg(data: &SimulationData) -> String {
    let n = data.series.len();
    let rows = n.div_ceil(COLUMNS).max(1);
    let width = PANEL_W * COLUMNS.min(n.max(1)) as f64;
    let height = PANEL_H * rows as f64;
    let mut out = format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif">"#
    );
    for (k, (name, ys)) in data.series.iter().enumerate() {
        let x0 = PANEL_W * (k % COLUMNS) as f64;
        let y0 = PANEL_H * (k / COLUMNS) as f64;
        panel(&mut out, name, ys, x0, y0);
    }
    out.push_str("</svg>\n");
    out
}
