//! JSON serialization of fields. All numbers are canonical `"p/q"` strings;
//! round-trips are bit-exact.

use super::geometry::{AffineMap, Rect};
use super::pa::{Caps, FieldError, PAField};
use super::pp::{PPCell, PPField, PPMap, Poly2};
use crate::numeric::{Mat2, Rat, Vec2};
use serde::{Deserialize, Serialize};

#[derive(Serialize, Deserialize)]
struct RectDoc {
    x: [String; 2],
    y: [String; 2],
}

#[derive(Serialize, Deserialize)]
struct CellDoc {
    rect: RectDoc,
    #[serde(skip_serializing_if = "Option::is_none", rename = "A")]
    a: Option<[[String; 2]; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    b: Option<[String; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    coeffs: Option<[Vec<Vec<String>>; 2]>,
}

#[derive(Serialize, Deserialize)]
struct FieldDoc {
    domain: RectDoc,
    cells: Vec<CellDoc>,
}

fn rect_doc(r: &Rect) -> RectDoc {
    RectDoc {
        x: [r.x0.to_frac_string(), r.x1.to_frac_string()],
        y: [r.y0.to_frac_string(), r.y1.to_frac_string()],
    }
}

fn parse_rat(s: &str, what: &str, idx: Option<usize>) -> Result<Rat, FieldError> {
    Rat::parse_frac(s).map_err(|e| {
        FieldError::Malformed(match idx {
            Some(i) => format!("non-rational literal in {} of cell {}: {}", what, i, e),
            None => format!("non-rational literal in {}: {}", what, e),
        })
    })
}

fn rect_from_doc(d: &RectDoc, idx: Option<usize>) -> Result<Rect, FieldError> {
    let x0 = parse_rat(&d.x[0], "rect", idx)?;
    let x1 = parse_rat(&d.x[1], "rect", idx)?;
    let y0 = parse_rat(&d.y[0], "rect", idx)?;
    let y1 = parse_rat(&d.y[1], "rect", idx)?;
    if x0 >= x1 || y0 >= y1 {
        return Err(FieldError::Malformed(match idx {
            Some(i) => format!("degenerate rectangle in cell {}", i),
            None => "degenerate domain rectangle".into(),
        }));
    }
    Ok(Rect::new(x0, x1, y0, y1))
}

fn affine_doc(m: &AffineMap) -> ([[String; 2]; 2], [String; 2]) {
    (
        [
            [m.a.m[0][0].to_frac_string(), m.a.m[0][1].to_frac_string()],
            [m.a.m[1][0].to_frac_string(), m.a.m[1][1].to_frac_string()],
        ],
        [m.b.x.to_frac_string(), m.b.y.to_frac_string()],
    )
}

pub fn pa_to_json(f: &PAField) -> String {
    let doc = FieldDoc {
        domain: rect_doc(&f.domain),
        cells: f
            .cells
            .iter()
            .map(|c| {
                let (a, b) = affine_doc(&c.map);
                CellDoc { rect: rect_doc(&c.rect), a: Some(a), b: Some(b), coeffs: None }
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("serialization cannot fail");
    s.push('\n');
    s
}

pub fn pp_to_json(f: &PPField) -> String {
    let doc = FieldDoc {
        domain: rect_doc(&f.domain),
        cells: f
            .cells
            .iter()
            .map(|c| match &c.map {
                PPMap::Affine(m) => {
                    let (a, b) = affine_doc(m);
                    CellDoc { rect: rect_doc(&c.rect), a: Some(a), b: Some(b), coeffs: None }
                }
                PPMap::Poly(p) => {
                    let grid = |q: &Poly2| -> Vec<Vec<String>> {
                        (0..3)
                            .map(|i| (0..3).map(|j| q.c[i][j].to_frac_string()).collect())
                            .collect()
                    };
                    CellDoc {
                        rect: rect_doc(&c.rect),
                        a: None,
                        b: None,
                        coeffs: Some([grid(&p[0]), grid(&p[1])]),
                    }
                }
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("serialization cannot fail");
    s.push('\n');
    s
}

fn cell_from_doc(d: &CellDoc, i: usize) -> Result<PPCell, FieldError> {
    let rect = rect_from_doc(&d.rect, Some(i))?;
    match (&d.a, &d.b, &d.coeffs) {
        (Some(a), Some(b), None) => {
            let mat = Mat2::new(
                parse_rat(&a[0][0], "A", Some(i))?,
                parse_rat(&a[0][1], "A", Some(i))?,
                parse_rat(&a[1][0], "A", Some(i))?,
                parse_rat(&a[1][1], "A", Some(i))?,
            );
            let vb = Vec2::new(parse_rat(&b[0], "b", Some(i))?, parse_rat(&b[1], "b", Some(i))?);
            Ok(PPCell { rect, map: PPMap::Affine(AffineMap::new(mat, vb)) })
        }
        (None, None, Some(grids)) => {
            let mut polys: Vec<Poly2> = Vec::with_capacity(2);
            for g in grids {
                if g.len() != 3 || g.iter().any(|row| row.len() != 3) {
                    return Err(FieldError::Malformed(format!(
                        "cell {}: coeffs must be two 3x3 grids",
                        i
                    )));
                }
                let mut p = Poly2::zero();
                for r in 0..3 {
                    for c in 0..3 {
                        p.c[r][c] = parse_rat(&g[r][c], "coeffs", Some(i))?;
                    }
                }
                polys.push(p);
            }
            Ok(PPCell { rect, map: PPMap::Poly(Box::new([polys.remove(0), polys.remove(0)])) })
        }
        _ => Err(FieldError::Malformed(format!(
            "cell {} must carry either A/b or coeffs",
            i
        ))),
    }
}

/// Parse a field document; validation reports overlaps and area mismatches
/// with cell indices.
pub fn pp_from_json(s: &str, caps: &Caps) -> Result<PPField, FieldError> {
    let doc: FieldDoc =
        serde_json::from_str(s).map_err(|e| FieldError::Malformed(format!("bad JSON: {}", e)))?;
    let domain = rect_from_doc(&doc.domain, None)?;
    let mut cells = Vec::with_capacity(doc.cells.len());
    for (i, c) in doc.cells.iter().enumerate() {
        cells.push(cell_from_doc(c, i)?);
    }
    PPField::new(domain, cells, caps)
}

pub fn pa_from_json(s: &str, caps: &Caps) -> Result<PAField, FieldError> {
    let pp = pp_from_json(s, caps)?;
    pp.to_pa()
        .ok_or_else(|| FieldError::Malformed("expected a piecewise-affine field".into()))
}
