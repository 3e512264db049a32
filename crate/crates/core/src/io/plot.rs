//! Static SVG rendering of precision–recall curves.

use std::fmt::Write as _;
use std::io::Write;

use crate::error::Result;
use crate::evaluation::PrCurve;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 520.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn x_of(recall: f64) -> f64 {
    LEFT + recall.clamp(0.0, 1.0) * (WIDTH - LEFT - RIGHT)
}

fn y_of(precision: f64) -> f64 {
    TOP + (1.0 - precision.clamp(0.0, 1.0)) * (HEIGHT - TOP - BOTTOM)
}

/// Writes one polyline per curve with at least two points, a circle marker
/// for single-point curves, and a legend entry for every curve.
pub fn emit_plot(curves: &[(String, PrCurve)], mut out: impl Write) -> Result<()> {
    let mut svg = String::new();
    let (x0, x1) = (x_of(0.0), x_of(1.0));
    let (y0, y1) = (y_of(0.0), y_of(1.0));
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);

    for i in 0..=10 {
        let v = i as f64 / 10.0;
        let (x, y) = (x_of(v), y_of(v));
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="#000"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{v:.1}</text>"##,
            y0 + 5.0,
            y0 + 20.0
        );
        let _ = writeln!(
            svg,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="#000"/><text x="{:.2}" y="{:.2}" text-anchor="end">{v:.1}</text>"##,
            x0 - 5.0,
            x0 - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r##"<rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#000"/>"##,
        x1 - x0,
        y0 - y1
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">Recall</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">Precision</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );

    for (i, (name, curve)) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        match curve.points.len() {
            0 => {}
            1 => {
                let p = curve.points[0];
                let _ = writeln!(
                    svg,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{color}"/>"#,
                    x_of(p.recall),
                    y_of(p.precision)
                );
            }
            _ => {
                let mut coords: Vec<String> = Vec::with_capacity(curve.points.len());
                for p in &curve.points {
                    let c = format!("{:.2},{:.2}", x_of(p.recall), y_of(p.precision));
                    if coords.last() != Some(&c) {
                        coords.push(c);
                    }
                }
                let _ = writeln!(
                    svg,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                    coords.join(" ")
                );
            }
        }
        let ly = TOP + 10.0 + 20.0 * i as f64;
        let lx = x1 + 15.0;
        let _ = writeln!(
            svg,
            r#"<g class="legend"><line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="3"/><text x="{:.2}" y="{:.2}">{}</text></g>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(name)
        );
    }
    svg.push_str("</svg>\n");
    out.write_all(svg.as_bytes())?;
    Ok(())
}
