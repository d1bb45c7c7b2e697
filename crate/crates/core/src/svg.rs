//! Plain SVG plots of Newton polygons. Output is a deterministic function of
//! the input so it can be diffed and snapshot-tested.

use crate::newton::NewtonPolygon;
use std::fmt::Write;

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 360.0;
const MARGIN: f64 = 48.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Draws each labelled polygon with its vertices marked by coordinates and
/// each segment annotated with its slope.
pub fn render_polygons(polygons: &[(String, NewtonPolygon)]) -> String {
    let max_a = polygons.iter().map(|(_, p)| p.rank()).max().unwrap_or(1).max(1);
    let max_b = polygons.iter().map(|(_, p)| p.total_height()).max().unwrap_or(1).max(1);
    let sx = (WIDTH - 2.0 * MARGIN) / max_a as f64;
    let sy = (HEIGHT - 2.0 * MARGIN) / max_b as f64;
    let x = |a: f64| MARGIN + a * sx;
    let y = |b: f64| HEIGHT - MARGIN - b * sy;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{}" viewBox="0 0 {WIDTH} {}" font-family="monospace" font-size="11">"#,
        HEIGHT + 16.0 * polygons.len() as f64,
        HEIGHT + 16.0 * polygons.len() as f64
    );
    let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);

    // Axes with integer ticks.
    let _ = writeln!(
        out,
        r##"<g stroke="#444444"><line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}"/><line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}"/></g>"##,
        x(0.0),
        y(0.0),
        x(max_a as f64),
        y(0.0),
        x(0.0),
        y(0.0),
        x(0.0),
        y(max_b as f64)
    );
    for a in 0..=max_a {
        let _ =
            writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{a}</text>"#, x(a as f64), y(0.0) + 14.0);
    }
    for b in 0..=max_b {
        let _ =
            writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{b}</text>"#, x(0.0) - 6.0, y(b as f64) + 4.0);
    }

    for (i, (label, poly)) in polygons.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let vertices = poly.break_points();
        let path: Vec<String> = vertices.iter().map(|v| format!("{:.1},{:.1}", x(v.a as f64), y(v.b as f64))).collect();
        let _ =
            writeln!(out, r#"<polyline fill="none" stroke="{colour}" stroke-width="2" points="{}"/>"#, path.join(" "));
        for v in &vertices {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{colour}"/><text x="{:.1}" y="{:.1}" fill="{colour}">({},{})</text>"#,
                x(v.a as f64),
                y(v.b as f64),
                x(v.a as f64) + 4.0,
                y(v.b as f64) - 6.0,
                v.a,
                v.b
            );
        }
        for w in vertices.windows(2) {
            let slope = poly.slopes()[w[0].a];
            let mx = (x(w[0].a as f64) + x(w[1].a as f64)) / 2.0;
            let my = (y(w[0].b as f64) + y(w[1].b as f64)) / 2.0;
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{:.1}" fill="{colour}" font-style="italic">{slope}</text>"#,
                mx + 6.0,
                my + 14.0
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{MARGIN}" y="{:.1}" fill="{colour}">{} {}</text>"#,
            HEIGHT + 12.0 + 16.0 * i as f64,
            esc(label),
            esc(&poly.to_string())
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_vertices_and_slopes() {
        let ss = NewtonPolygon::parse(&["1/2", "1/2"]).unwrap();
        let ord = NewtonPolygon::from_integers(&[0, 1]).unwrap();
        let svg = render_polygons(&[("supersingular".into(), ss.clone()), ("ordinary".into(), ord)]);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("(2,1)"));
        assert!(svg.contains(">1/2</text>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(
            svg,
            render_polygons(&[
                ("supersingular".into(), ss),
                ("ordinary".into(), NewtonPolygon::from_integers(&[0, 1]).unwrap())
            ])
        );
    }

    #[test]
    fn labels_are_escaped() {
        let p = NewtonPolygon::from_integers(&[0]).unwrap();
        assert!(render_polygons(&[("a<b".into(), p)]).contains("a&lt;b"));
    }
}
