//! Minimal polyline plots of Evans image curves.

use std::fmt::Write as _;

use shock_evans::Complex64 as C64;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 640.0;
const MARGIN: f64 = 40.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

pub struct Curve {
    pub label: String,
    pub points: Vec<C64>,
    pub closed: bool,
}

/// Render curves in a box fitted to their extent with the origin always included.
pub fn render(title: &str, curves: &[Curve]) -> String {
    let (mut x0, mut x1, mut y0, mut y1) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for z in curves.iter().flat_map(|c| &c.points) {
        x0 = x0.min(z.re);
        x1 = x1.max(z.re);
        y0 = y0.min(z.im);
        y1 = y1.max(z.im);
    }
    let pad = 0.05 * (x1 - x0).max(y1 - y0).max(1e-12);
    let (x0, x1, y0, y1) = (x0 - pad, x1 + pad, y0 - pad, y1 + pad);
    let sx = (WIDTH - 2.0 * MARGIN) / (x1 - x0);
    let sy = (HEIGHT - 2.0 * MARGIN) / (y1 - y0);
    let px = |x: f64| MARGIN + (x - x0) * sx;
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) * sy;

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{MARGIN}" y="24" font-family="sans-serif" font-size="14">{}</text>"#, escape(title));
    let _ = writeln!(
        s,
        r##"<g stroke="#bbbbbb" stroke-width="1"><line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/><line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/></g>"##,
        px(x0),
        py(0.0),
        px(x1),
        py(0.0),
        px(0.0),
        py(y0),
        px(0.0),
        py(y1)
    );
    for (k, c) in curves.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let pts: Vec<String> = c.points.iter().map(|z| format!("{:.2},{:.2}", px(z.re), py(z.im))).collect();
        let tag = if c.closed { "polygon" } else { "polyline" };
        let _ = writeln!(s, r#"<{tag} fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" fill="{colour}">{}</text>"#,
            WIDTH - MARGIN - 160.0,
            MARGIN + 16.0 * (k as f64 + 1.0),
            escape(&c.label)
        );
    }
    let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="black"/>"#, px(0.0), py(0.0));
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_marker_and_curve_present() {
        let c = Curve { label: "unit".into(), points: vec![C64::new(1.0, 0.0), C64::new(2.0, 1.0)], closed: false };
        let s = render("t", &[c]);
        assert!(s.starts_with("<svg"));
        assert!(s.contains("<polyline"));
        assert!(s.contains("<circle"));
        assert!(s.trim_end().ends_with("</svg>"));
    }
}
