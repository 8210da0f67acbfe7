use std::fmt::Write as _;

use super::contours::Contour;
use super::field::{BBox, FieldGrid};

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.12e}")
    } else {
        "nan".to_string()
    }
}

/// CSV with header `x,y,chi,phi`, one row per sample in row-major order.
/// A `comment` (single line) is written first, prefixed by `# `.
pub fn grid_to_csv(grid: &FieldGrid, comment: Option<&str>) -> String {
    let mut out = String::with_capacity(grid.chi.len() * 64);
    if let Some(c) = comment {
        let _ = writeln!(out, "# {}", c.replace('\n', " "));
    }
    out.push_str("x,y,chi,phi\n");
    for j in 0..grid.spec.ny {
        for i in 0..grid.spec.nx {
            let z = grid.spec.point(i, j);
            let k = grid.index(i, j);
            let _ = writeln!(out, "{},{},{},{}", num(z.re), num(z.im), num(grid.chi[k]), num(grid.phi[k]));
        }
    }
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Schematic SVG of the contours with markers at the finite punctures;
/// `metadata` (escaped) goes into a `<metadata>` element.
pub fn contours_to_svg(bbox: &BBox, a: f64, contours: &[Contour], title: &str, metadata: Option<&str>) -> String {
    let width = 800.0;
    let scale = width / (bbox.x1 - bbox.x0);
    let height = (bbox.y1 - bbox.y0) * scale;
    let map = |x: f64, y: f64| ((x - bbox.x0) * scale, (bbox.y1 - y) * scale);
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );
    let _ = writeln!(s, "<title>{}</title>", xml_escape(title));
    if let Some(m) = metadata {
        let _ = writeln!(s, "<metadata>{}</metadata>", xml_escape(m));
    }
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (ax0, ay) = map(bbox.x0, 0.0);
    let (ax1, _) = map(bbox.x1, 0.0);
    let _ = writeln!(
        s,
        r##"<line x1="{ax0:.2}" y1="{ay:.2}" x2="{ax1:.2}" y2="{ay:.2}" stroke="#bbbbbb" stroke-width="1"/>"##
    );
    for c in contours {
        let pts: Vec<String> = c
            .polyline
            .iter()
            .map(|z| {
                let (x, y) = map(z.re, z.im);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(
            s,
            r##"<polyline class="contour" fill="none" stroke="#1f4e99" stroke-width="1.5" points="{}"/>"##,
            pts.join(" ")
        );
    }
    for (name, x) in [("0", 0.0), ("a", a), ("1", 1.0)] {
        let (px, py) = map(x, 0.0);
        let _ = writeln!(s, r##"<circle class="puncture" cx="{px:.2}" cy="{py:.2}" r="4" fill="#c0392b"/>"##);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="14">{name}</text>"#,
            px + 6.0,
            py - 6.0
        );
    }
    s.push_str("</svg>\n");
    s
}
