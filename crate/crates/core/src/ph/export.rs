//! Diagram CSV and SVG writers.

use std::fmt::Write as _;

use super::PersistenceDiagram;
use crate::image::Dims;

pub const CSV_HEADER: &str = "dim,birth,death,bx,by,bz,dx,dy,dz";

fn coords(dims: Dims, pixel: Option<usize>) -> String {
    match pixel {
        None => ",,".to_string(),
        Some(p) => {
            let c = dims.coords(p);
            if dims.rank() == 2 {
                format!("{},{},", c[0], c[1])
            } else {
                format!("{},{},{}", c[0], c[1], c[2])
            }
        }
    }
}

pub fn to_csv(diag: &PersistenceDiagram, dims: Dims) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for p in &diag.points {
        let death = if p.is_essential() {
            "inf".to_string()
        } else {
            p.death.to_string()
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            p.dim,
            p.birth,
            death,
            coords(dims, Some(p.birth_pixel)),
            coords(dims, p.death_pixel)
        );
    }
    out
}

const COLORS: [&str; 3] = ["#1f77b4", "#d62728", "#2ca02c"];

/// Scatter of (birth, death) with the diagonal; essential points sit on a
/// dashed line above the unit square.
pub fn to_svg(diag: &PersistenceDiagram) -> String {
    let size = 400.0;
    let pad = 40.0;
    let span = size - 2.0 * pad;
    let inf_y = 1.08;
    let px = |v: f64| pad + v * span / inf_y;
    let py = |v: f64| size - pad - v * span / inf_y;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    let _ = writeln!(s, r#"<rect width="{size}" height="{size}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#888"/>"##,
        px(0.0),
        py(0.0),
        px(1.0),
        py(1.0)
    );
    let _ = writeln!(
        s,
        r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#bbb" stroke-dasharray="4 3"/>"##,
        px(0.0),
        py(inf_y),
        px(1.0),
        py(inf_y)
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="12" font-family="sans-serif">birth</text>"#,
        size / 2.0 - 15.0,
        size - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="10" y="{}" font-size="12" font-family="sans-serif" transform="rotate(-90 10 {})">death</text>"#,
        size / 2.0,
        size / 2.0
    );
    for p in &diag.points {
        let d = if p.is_essential() { inf_y } else { p.death };
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{}" fill-opacity="0.8"><title>H{} ({}, {})</title></circle>"#,
            px(p.birth),
            py(d),
            COLORS[p.dim.min(2)],
            p.dim,
            p.birth,
            if p.is_essential() { "inf".into() } else { p.death.to_string() }
        );
    }
    for dim in 0..=diag.max_dim.min(2) {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="12" font-family="sans-serif" fill="{}">H{dim}</text>"#,
            size - pad - 10.0,
            pad + 14.0 * dim as f64,
            COLORS[dim]
        );
    }
    s.push_str("</svg>\n");
    s
}
