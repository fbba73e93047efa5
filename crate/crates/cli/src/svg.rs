//! Self-contained SVG phase portraits.

use std::fmt::Write;

const SIZE: f64 = 480.0;
const MARGIN: f64 = 40.0;

/// Polyline of `(x, y)` pairs with axes through the origin when visible.
pub fn phase_portrait(title: &str, x_label: &str, y_label: &str, points: &[(f64, f64)]) -> String {
    let finite: Vec<(f64, f64)> = points.iter().copied().filter(|(x, y)| x.is_finite() && y.is_finite()).collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in &finite {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if finite.is_empty() {
        (x0, x1, y0, y1) = (-1.0, 1.0, -1.0, 1.0);
    }
    let pad = |a: f64, b: f64| {
        let w = (b - a).max(1e-9);
        (a - 0.05 * w, b + 0.05 * w)
    };
    let (x0, x1) = pad(x0, x1);
    let (y0, y1) = pad(y0, y1);
    let inner = SIZE - 2.0 * MARGIN;
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * inner;
    let sy = |y: f64| SIZE - MARGIN - (y - y0) / (y1 - y0) * inner;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, "<title>{}</title>", escape(title));
    if x0 < 0.0 && x1 > 0.0 {
        let _ = writeln!(
            s,
            r##"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="#bbb"/>"##,
            sx(0.0),
            MARGIN,
            SIZE - MARGIN
        );
    }
    if y0 < 0.0 && y1 > 0.0 {
        let _ = writeln!(
            s,
            r##"<line x1="{1:.2}" y1="{0:.2}" x2="{2:.2}" y2="{0:.2}" stroke="#bbb"/>"##,
            sy(0.0),
            MARGIN,
            SIZE - MARGIN
        );
    }
    let _ = writeln!(
        s,
        r##"<rect x="{MARGIN}" y="{MARGIN}" width="{inner}" height="{inner}" fill="none" stroke="#444"/>"##
    );
    let mut path = String::new();
    for (i, &(x, y)) in finite.iter().enumerate() {
        let _ = write!(path, "{}{:.2},{:.2}", if i == 0 { "" } else { " " }, sx(x), sy(y));
    }
    let _ = writeln!(s, r##"<polyline points="{path}" fill="none" stroke="#1f5fa8" stroke-width="1.2"/>"##);
    if let Some(&(x, y)) = finite.first() {
        let _ = writeln!(s, r##"<circle cx="{:.2}" cy="{:.2}" r="3" fill="#c0392b"/>"##, sx(x), sy(y));
    }
    let font = r#"font-family="sans-serif" font-size="12""#;
    let _ = writeln!(s, r#"<text x="{}" y="20" {font} text-anchor="middle">{}</text>"#, SIZE / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" {font} text-anchor="middle">{}</text>"#,
        SIZE / 2.0,
        SIZE - 10.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" {font} text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        SIZE / 2.0,
        SIZE / 2.0,
        escape(y_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN}" y="{}" {font}>{x0:.3}</text><text x="{}" y="{}" {font} text-anchor="end">{x1:.3}</text>"#,
        SIZE - MARGIN + 14.0,
        SIZE - MARGIN,
        SIZE - MARGIN + 14.0
    );
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standalone_document() {
        let pts: Vec<(f64, f64)> = (0..50).map(|i| (i as f64 * 0.1).sin()).map(|s| (s, s * s)).collect();
        let svg = phase_portrait("H = p<2", "q", "p", &pts);
        assert!(svg.starts_with("<svg xmlns="));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("H = p&lt;2"));
        assert!(!svg.contains("href"));
    }
}
