//! SVG and text pictures of a configuration.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::lattice::AxialCoord;
use crate::light::lit_positions;
use crate::system::ParticleSystem;

const SCALE: f64 = 24.0;
const RADIUS: f64 = 0.42;

/// Particles as discs, lit particles outlined, the light source as a red
/// jagged line below the configuration.
pub fn svg(system: &ParticleSystem) -> String {
    let coords = system.sorted_coords();
    let lit: BTreeSet<AxialCoord> = lit_positions(&coords);
    let pts: Vec<(f64, f64)> = coords.iter().map(|c| c.embed()).collect();
    let xmin = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min) - 1.0;
    let xmax = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max) + 1.0;
    let ymin = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min) - 2.0;
    let ymax = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max) + 1.0;
    let (w, h) = ((xmax - xmin) * SCALE, (ymax - ymin) * SCALE);
    let sx = |x: f64| (x - xmin) * SCALE;
    let sy = |y: f64| (ymax - y) * SCALE;

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.1}" height="{h:.1}" viewBox="0 0 {w:.1} {h:.1}">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();

    // jagged light source one unit below the lowest particle
    let base = ymin + 0.6;
    let mut zig = Vec::new();
    let mut x = xmin + 0.2;
    let mut up = true;
    while x <= xmax - 0.2 {
        zig.push(format!("{:.1},{:.1}", sx(x), sy(if up { base + 0.25 } else { base })));
        x += 0.35;
        up = !up;
    }
    writeln!(out, r#"<polyline points="{}" fill="none" stroke="red" stroke-width="2"/>"#, zig.join(" ")).unwrap();

    for (c, (x, y)) in coords.iter().zip(&pts) {
        let (stroke, width) = if lit.contains(c) { ("orange", 3.0) } else { ("black", 1.0) };
        writeln!(
            out,
            r#"<circle cx="{:.1}" cy="{:.1}" r="{:.1}" fill="gray" stroke="{stroke}" stroke-width="{width}"/>"#,
            sx(*x),
            sy(*y),
            RADIUS * SCALE
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

/// One text column per lattice column, one row per half unit of height.
/// `@` lit particle, `o` particle in shadow, `.` empty vertex, light as `^`.
pub fn ascii(system: &ParticleSystem) -> String {
    let coords = system.coord_set();
    let lit = lit_positions(&system.sorted_coords());
    let umin = coords.iter().map(|c| c.u).min().unwrap();
    let umax = coords.iter().map(|c| c.u).max().unwrap();
    let hmin = coords.iter().map(|c| c.twice_height()).min().unwrap();
    let hmax = coords.iter().map(|c| c.twice_height()).max().unwrap();
    let mut out = String::new();
    for h in (hmin..=hmax).rev() {
        let mut row = String::new();
        for u in umin..=umax {
            let parity = (h - u as i64).rem_euclid(2) == 0;
            let ch = if !parity {
                ' '
            } else {
                let c = AxialCoord::new(u, ((h - u as i64) / 2) as i32);
                if lit.contains(&c) {
                    '@'
                } else if coords.contains(&c) {
                    'o'
                } else {
                    '.'
                }
            };
            row.push(ch);
            row.push(' ');
        }
        out.push_str(row.trim_end());
        out.push('\n');
    }
    let width = 2 * (umax - umin + 1) as usize - 1;
    out.push_str(&"^".repeat(width));
    out.push('\n');
    out
}
