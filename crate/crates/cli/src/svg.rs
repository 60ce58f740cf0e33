//! Static SVG drawing of a complete fan in the plane.

use std::fmt::Write;

use num_traits::ToPrimitive;
use tropcount::moduli::EmbeddedFan;

const SIZE: f64 = 400.0;
const RADIUS: f64 = 160.0;

fn unit(v: &[num_bigint::BigInt]) -> (f64, f64) {
    let (x, y) = (v[0].to_f64().unwrap_or(0.0), v[1].to_f64().unwrap_or(0.0));
    let n = (x * x + y * y).sqrt().max(1e-12);
    (x / n, y / n)
}

/// Maximal cones shaded, rays drawn with their primitive generators as labels.
pub fn fan_svg(e: &EmbeddedFan) -> String {
    let c = SIZE / 2.0;
    let to_screen = |(x, y): (f64, f64)| (c + RADIUS * x, c - RADIUS * y);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, &cone) in e.maximal.iter().enumerate() {
        let rays = &e.image_cones[cone];
        if rays.len() != 2 {
            continue;
        }
        let (a, b) = (to_screen(unit(&e.image_rays[rays[0]])), to_screen(unit(&e.image_rays[rays[1]])));
        let shade = 200 + (i * 37 % 50) as u32;
        let _ = writeln!(
            s,
            r#"<polygon points="{c:.1},{c:.1} {:.1},{:.1} {:.1},{:.1}" fill="rgb({shade},{shade},255)" stroke="none"/>"#,
            a.0, a.1, b.0, b.1
        );
    }
    for r in &e.image_rays {
        let (x, y) = to_screen(unit(r));
        let (lx, ly) = to_screen({
            let u = unit(r);
            (u.0 * 1.12, u.1 * 1.12)
        });
        let label: Vec<String> = r.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, r#"<line x1="{c:.1}" y1="{c:.1}" x2="{x:.1}" y2="{y:.1}" stroke="black" stroke-width="2"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{lx:.1}" y="{ly:.1}" font-family="monospace" font-size="12" text-anchor="middle" dominant-baseline="middle">({})</text>"#,
            label.join(",")
        );
    }
    let _ = writeln!(s, r#"<circle cx="{c:.1}" cy="{c:.1}" r="3" fill="black"/>"#);
    s.push_str("</svg>\n");
    s
}
