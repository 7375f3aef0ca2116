//! Deterministic SVG rendering of rectangle partitions: one rectangle per
//! cell, fill keyed to the gradient identity, jump edges stroked with width
//! proportional to the mean jump magnitude.

use crate::fields::{PPField, PPMap};
use crate::measures::{jump_set_pp, Axis};
use crate::numeric::Mat2;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("cell count {got} exceeds the render cap {cap}; coarsen the field first")]
    CapExceeded { got: usize, cap: usize },
}

const PALETTE: [&str; 12] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7",
    "#9c755f", "#bab0ac", "#2f4b7c", "#a05195",
];

fn fmt_coord(x: f64) -> String {
    format!("{:.8}", x)
}

fn gradient_key(m: &Mat2) -> String {
    format!(
        "{},{},{},{}",
        m.m[0][0], m.m[0][1], m.m[1][0], m.m[1][1]
    )
}

/// Render a field to an SVG document. Output bytes are a deterministic
/// function of the field.
pub fn render_svg(field: &PPField, cap: usize) -> Result<String, RenderError> {
    if field.cells.len() > cap {
        return Err(RenderError::CapExceeded { got: field.cells.len(), cap });
    }
    // stable palette: distinct affine gradients in lexicographic order
    let mut classes: BTreeMap<String, usize> = BTreeMap::new();
    for c in &field.cells {
        if let PPMap::Affine(m) = &c.map {
            let key = gradient_key(&m.a);
            let next = classes.len();
            classes.entry(key).or_insert(next);
        }
    }
    let d = &field.domain;
    let (x0, y0) = (d.x0.to_f64(), d.y0.to_f64());
    let (w, h) = (d.width().to_f64(), d.height().to_f64());
    let scale = 1024.0 / w.max(h);
    let width = w * scale;
    let height = h * scale;
    // SVG y axis points down: flip vertically
    let tx = |x: f64| (x - x0) * scale;
    let ty = |y: f64| height - (y - y0) * scale;

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
        fmt_coord(width),
        fmt_coord(height),
        fmt_coord(width),
        fmt_coord(height)
    ));
    out.push_str("<g stroke=\"none\">\n");
    for c in &field.cells {
        let fill = match &c.map {
            PPMap::Affine(m) => {
                let idx = classes[&gradient_key(&m.a)];
                PALETTE[idx % PALETTE.len()]
            }
            PPMap::Poly(_) => "#dddddd",
        };
        let rx = tx(c.rect.x0.to_f64());
        let ry = ty(c.rect.y1.to_f64());
        let rw = c.rect.width().to_f64() * scale;
        let rh = c.rect.height().to_f64() * scale;
        out.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n",
            fmt_coord(rx),
            fmt_coord(ry),
            fmt_coord(rw),
            fmt_coord(rh),
            fill
        ));
    }
    out.push_str("</g>\n<g stroke=\"#111111\" stroke-linecap=\"butt\">\n");
    let jumps = jump_set_pp(field);
    let mut max_mean = 0.0f64;
    let mut segs: Vec<(f64, f64, f64, f64, f64)> = Vec::new();
    for j in &jumps {
        let mean = j.du_integral().value / j.len.to_f64();
        let (sx, sy) = (j.start.x.to_f64(), j.start.y.to_f64());
        let (ex, ey) = match j.nu {
            Axis::X => (sx, sy + j.len.to_f64()),
            Axis::Y => (sx + j.len.to_f64(), sy),
        };
        max_mean = max_mean.max(mean);
        segs.push((sx, sy, ex, ey, mean));
    }
    for (sx, sy, ex, ey, mean) in segs {
        let wline = if max_mean > 0.0 { 0.5 + 3.5 * mean / max_mean } else { 0.5 };
        out.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke-width=\"{}\"/>\n",
            fmt_coord(tx(sx)),
            fmt_coord(ty(sy)),
            fmt_coord(tx(ex)),
            fmt_coord(ty(ey)),
            fmt_coord(wline)
        ));
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}
