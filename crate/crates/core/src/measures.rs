//! Strain-measure decomposition for piecewise fields: bulk terms, jump terms
//! across interior edges, totals, and band masses.

use crate::fields::{AffineMap, PAField, PPField, PPMap, Poly2, Rect};
use crate::numeric::{
    gauss_quad_2d, seg_norm_integral, sqrt_quadratic_integral, NormIntegral, QuadRect, Rat,
    Vec2,
};
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("bands {0} and {1} overlap")]
    BandOverlap(usize, usize),
    #[error("band {0} outside the field domain")]
    BandOutsideDomain(usize),
    #[error("quadrature failed on cell {cell}: {msg}")]
    Quadrature { cell: usize, msg: String },
}

/// Interface normal; interfaces are axis parallel by construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn unit(&self) -> (f64, f64) {
        match self {
            Axis::X => (1.0, 0.0),
            Axis::Y => (0.0, 1.0),
        }
    }
}

/// Scalar polynomial of arc length, degree <= 2 (affine for PA fields).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TracePoly {
    pub c0: Rat,
    pub c1: Rat,
    pub c2: Rat,
}

impl TracePoly {
    pub fn eval(&self, t: &Rat) -> Rat {
        &(&(&(&self.c2 * t) + &self.c1) * t) + &self.c0
    }

    fn sub(&self, o: &TracePoly) -> TracePoly {
        TracePoly { c0: &self.c0 - &o.c0, c1: &self.c1 - &o.c1, c2: &self.c2 - &o.c2 }
    }

    fn is_zero(&self) -> bool {
        self.c0.is_zero() && self.c1.is_zero() && self.c2.is_zero()
    }

    fn is_affine(&self) -> bool {
        self.c2.is_zero()
    }
}

/// One maximal jump interface between two adjacent cells.
#[derive(Clone, Debug)]
pub struct JumpRecord {
    /// Start point of the segment; it extends `len` along the axis
    /// orthogonal to `nu`.
    pub start: Vec2,
    pub len: Rat,
    pub nu: Axis,
    /// Traces on the +nu and -nu sides as polynomials of arc length.
    pub trace_plus: [TracePoly; 2],
    pub trace_minus: [TracePoly; 2],
    /// Jump `[u] = u_+ - u_-` per component, polynomial in arc length.
    pub jump: [TracePoly; 2],
    pub cell_minus: usize,
    pub cell_plus: usize,
}

impl JumpRecord {
    /// `∫ |[u]| dH^1` over this segment.
    pub fn du_integral(&self) -> NormIntegral {
        self.norm_integral(false)
    }

    /// `∫ |[u] ⊙ ν| dH^1` with the Frobenius density
    /// `|a ⊙ ν| = sqrt((|a|^2 + (a·ν)^2)/2)`.
    pub fn eu_integral(&self) -> NormIntegral {
        self.norm_integral(true)
    }

    fn norm_integral(&self, symmetrized: bool) -> NormIntegral {
        let l = self.len.to_f64();
        let j = &self.jump;
        if j[0].is_affine() && j[1].is_affine() {
            let p = (j[0].c0.to_f64(), j[1].c0.to_f64());
            let q = (j[0].c1.to_f64(), j[1].c1.to_f64());
            if !symmetrized {
                return seg_norm_integral(p, q, l).expect("finite jump data");
            }
            // (|a|^2 + (a·ν)^2)/2 with a affine in t is quadratic in t
            let (pn, qn) = match self.nu {
                Axis::X => (p.0, q.0),
                Axis::Y => (p.1, q.1),
            };
            let alpha = (q.0 * q.0 + q.1 * q.1 + qn * qn) / 2.0;
            let beta = (2.0 * (p.0 * q.0 + p.1 * q.1) + 2.0 * pn * qn) / 2.0;
            let gamma = (p.0 * p.0 + p.1 * p.1 + pn * pn) / 2.0;
            return sqrt_quadratic_integral(alpha, beta, gamma, l).expect("finite jump data");
        }
        // quadratic jump components: certified 1-D quadrature
        let c: Vec<[f64; 3]> = j
            .iter()
            .map(|p| [p.c0.to_f64(), p.c1.to_f64(), p.c2.to_f64()])
            .collect();
        let nu = self.nu.unit();
        let f = |t: f64| {
            let a0 = c[0][0] + t * (c[0][1] + t * c[0][2]);
            let a1 = c[1][0] + t * (c[1][1] + t * c[1][2]);
            if symmetrized {
                let d = a0 * nu.0 + a1 * nu.1;
                ((a0 * a0 + a1 * a1 + d * d) / 2.0).sqrt()
            } else {
                a0.hypot(a1)
            }
        };
        crate::numeric::gauss_1d_certified(&f, 0.0, l, 32).expect("finite segment")
    }
}

/// Borrowed cell view shared by PA and PP fields.
#[derive(Clone, Copy)]
pub enum MapRef<'a> {
    Affine(&'a AffineMap),
    Poly(&'a [Poly2; 2]),
}

impl<'a> MapRef<'a> {
    fn trace(&self, axis: Axis, fixed: &Rat, t0: &Rat) -> [TracePoly; 2] {
        // restriction to the line {axis-coordinate = fixed}, parameterized by
        // arc length t from t0 along the other axis
        let sub = |p: &Poly2| -> TracePoly {
            // s = t0 + t is the free coordinate
            let (cf, _cs) = match axis {
                Axis::X => (fixed, ()),
                Axis::Y => (fixed, ()),
            };
            let mut c_s: [Rat; 3] = Default::default(); // coeffs in the free coordinate s
            for i in 0..3 {
                for jj in 0..3 {
                    if p.c[i][jj].is_zero() {
                        continue;
                    }
                    // axis = X: x = fixed, free = y (power jj)
                    // axis = Y: y = fixed, free = x (power i)
                    let (fix_pow, free_pow) = match axis {
                        Axis::X => (i, jj),
                        Axis::Y => (jj, i),
                    };
                    let mut fp = Rat::one();
                    for _ in 0..fix_pow {
                        fp = &fp * cf;
                    }
                    c_s[free_pow] = &c_s[free_pow] + &(&p.c[i][jj] * &fp);
                }
            }
            // substitute s = t0 + t
            let two = Rat::from_int(2);
            TracePoly {
                c0: &(&c_s[0] + &(&c_s[1] * t0)) + &(&c_s[2] * &(t0 * t0)),
                c1: &c_s[1] + &(&(&c_s[2] * t0) * &two),
                c2: c_s[2].clone(),
            }
        };
        match self {
            MapRef::Affine(m) => {
                let polys = [
                    Poly2::affine(m.a.m[0][0].clone(), m.a.m[0][1].clone(), m.b.x.clone()),
                    Poly2::affine(m.a.m[1][0].clone(), m.a.m[1][1].clone(), m.b.y.clone()),
                ];
                [sub(&polys[0]), sub(&polys[1])]
            }
            MapRef::Poly(p) => [sub(&p[0]), sub(&p[1])],
        }
    }
}

struct CellView<'a> {
    rect: &'a Rect,
    map: MapRef<'a>,
}

fn pa_views(f: &PAField) -> Vec<CellView<'_>> {
    f.cells
        .iter()
        .map(|c| CellView { rect: &c.rect, map: MapRef::Affine(&c.map) })
        .collect()
}

fn pp_views(f: &PPField) -> Vec<CellView<'_>> {
    f.cells
        .iter()
        .map(|c| CellView {
            rect: &c.rect,
            map: match &c.map {
                PPMap::Affine(m) => MapRef::Affine(m),
                PPMap::Poly(p) => MapRef::Poly(p),
            },
        })
        .collect()
}

fn jump_set_views(cells: &[CellView<'_>]) -> Vec<JumpRecord> {
    let mut out = Vec::new();
    for axis in [Axis::X, Axis::Y] {
        // group edges by the fixed coordinate
        let mut lo_edges: BTreeMap<Rat, Vec<usize>> = BTreeMap::new();
        let mut hi_edges: BTreeMap<Rat, Vec<usize>> = BTreeMap::new();
        for (i, c) in cells.iter().enumerate() {
            let (lo, hi) = match axis {
                Axis::X => (&c.rect.x0, &c.rect.x1),
                Axis::Y => (&c.rect.y0, &c.rect.y1),
            };
            lo_edges.entry(lo.clone()).or_default().push(i);
            hi_edges.entry(hi.clone()).or_default().push(i);
        }
        for (coord, his) in &hi_edges {
            let Some(los) = lo_edges.get(coord) else { continue };
            // minus side: cells ending at coord; plus side: cells starting there
            let span = |i: usize| -> (Rat, Rat) {
                let r = cells[i].rect;
                match axis {
                    Axis::X => (r.y0.clone(), r.y1.clone()),
                    Axis::Y => (r.x0.clone(), r.x1.clone()),
                }
            };
            let mut minus: Vec<usize> = his.clone();
            let mut plus: Vec<usize> = los.clone();
            minus.sort_by(|&a, &b| span(a).0.cmp(&span(b).0));
            plus.sort_by(|&a, &b| span(a).0.cmp(&span(b).0));
            for &mi in &minus {
                let (m0, m1) = span(mi);
                // plus spans are pairwise interior-disjoint and sorted, so
                // both endpoints increase: binary search the first overlap
                let mut k = plus.partition_point(|&j| span(j).1 <= m0);
                while k < plus.len() {
                    let (p0, p1) = span(plus[k]);
                    if p0 >= m1 {
                        break;
                    }
                    if p1 > m0 {
                        let a = m0.clone().max(p0.clone());
                        let b = m1.clone().min(p1.clone());
                        if a < b {
                            let tm = cells[mi].map.trace(axis, coord, &a);
                            let tp = cells[plus[k]].map.trace(axis, coord, &a);
                            let jump = [tp[0].sub(&tm[0]), tp[1].sub(&tm[1])];
                            let len = &b - &a;
                            let nonzero = if jump[0].is_affine() && jump[1].is_affine() {
                                // affine on a segment: zero iff zero at both ends
                                let ends = [Rat::zero(), len.clone()];
                                ends.iter().any(|t| {
                                    !jump[0].eval(t).is_zero() || !jump[1].eval(t).is_zero()
                                })
                            } else {
                                !(jump[0].is_zero() && jump[1].is_zero()) && {
                                    // quadratic: zero iff zero at 3 points
                                    let half = Rat::new(1, 2);
                                    let ends =
                                        [Rat::zero(), &len * &half, len.clone()];
                                    ends.iter().any(|t| {
                                        !jump[0].eval(t).is_zero()
                                            || !jump[1].eval(t).is_zero()
                                    })
                                }
                            };
                            if nonzero {
                                let start = match axis {
                                    Axis::X => Vec2::new(coord.clone(), a.clone()),
                                    Axis::Y => Vec2::new(a.clone(), coord.clone()),
                                };
                                out.push(JumpRecord {
                                    start,
                                    len,
                                    nu: axis,
                                    trace_plus: tp,
                                    trace_minus: tm,
                                    jump,
                                    cell_minus: mi,
                                    cell_plus: plus[k],
                                });
                            }
                        }
                    }
                    k += 1;
                }
            }
        }
    }
    out
}

/// All maximal interior interfaces of a piecewise-affine field on which the
/// two traces differ; exact rational geometry.
pub fn jump_set(field: &PAField) -> Vec<JumpRecord> {
    jump_set_views(&pa_views(field))
}

/// Jump set of a piecewise-polynomial field (used mostly to certify
/// continuity of blended constructions).
pub fn jump_set_pp(field: &PPField) -> Vec<JumpRecord> {
    jump_set_views(&pp_views(field))
}

/// The computed strain decomposition of a field.
#[derive(Clone, Debug, Serialize)]
pub struct StrainReport {
    pub bulk_grad_l1: NormIntegral,
    pub bulk_strain_l1: NormIntegral,
    pub skew_exact: bool,
    /// `H^1(J_u)` as an exact rational (string form in JSON).
    pub jump_length: Rat,
    pub jump_du: NormIntegral,
    pub jump_eu: NormIntegral,
    pub du_total: NormIntegral,
    pub eu_total: NormIntegral,
    pub sup_norm: NormIntegral,
    pub jump_records: usize,
    pub cells: usize,
}

impl StrainReport {
    pub const CSV_HEADER: &'static str = "bulk_grad_l1,bulk_grad_l1_err,bulk_strain_l1,bulk_strain_l1_err,skew_exact,jump_length,jump_length_exact,jump_du,jump_du_err,jump_eu,jump_eu_err,du_total,du_total_err,eu_total,eu_total_err,sup_norm,sup_norm_err,jump_records,cells";

    pub fn csv_row(&self) -> String {
        use crate::report::fmt_f64 as f;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            f(self.bulk_grad_l1.value),
            f(self.bulk_grad_l1.abs_error_bound),
            f(self.bulk_strain_l1.value),
            f(self.bulk_strain_l1.abs_error_bound),
            self.skew_exact,
            f(self.jump_length.to_f64()),
            self.jump_length.to_frac_string(),
            f(self.jump_du.value),
            f(self.jump_du.abs_error_bound),
            f(self.jump_eu.value),
            f(self.jump_eu.abs_error_bound),
            f(self.du_total.value),
            f(self.du_total.abs_error_bound),
            f(self.eu_total.value),
            f(self.eu_total.abs_error_bound),
            f(self.sup_norm.value),
            f(self.sup_norm.abs_error_bound),
            self.jump_records,
            self.cells
        )
    }
}

const BULK_QUAD_ORDER: usize = 8;

fn bulk_cell_integrals(
    view: &CellView<'_>,
    cell_idx: usize,
) -> Result<(NormIntegral, NormIntegral, bool), MeasureError> {
    match view.map {
        MapRef::Affine(m) => {
            let area = view.rect.area().to_f64();
            let grad = NormIntegral::closed_form(m.a.frobenius() * area);
            let strain = NormIntegral::closed_form(m.a.sym().frobenius() * area);
            Ok((grad, strain, m.a.is_skew()))
        }
        MapRef::Poly(p) => {
            let g = [[p[0].dx(), p[0].dy()], [p[1].dx(), p[1].dy()]];
            let skew = g[0][0].is_zero() && g[1][1].is_zero() && g[0][1].add(&g[1][0]).is_zero();
            let gc: Vec<[[f64; 3]; 3]> = vec![
                g[0][0].coeffs_f64(),
                g[0][1].coeffs_f64(),
                g[1][0].coeffs_f64(),
                g[1][1].coeffs_f64(),
            ];
            let qr = QuadRect::from_rats(&view.rect.x0, &view.rect.x1, &view.rect.y0, &view.rect.y1);
            let ev = crate::fields::pp::eval_coeffs_f64;
            let grad_f = |x: f64, y: f64| {
                let a = ev(&gc[0], x, y);
                let b = ev(&gc[1], x, y);
                let c = ev(&gc[2], x, y);
                let d = ev(&gc[3], x, y);
                (a * a + b * b + c * c + d * d).sqrt()
            };
            let strain_f = |x: f64, y: f64| {
                let a = ev(&gc[0], x, y);
                let off = (ev(&gc[1], x, y) + ev(&gc[2], x, y)) / 2.0;
                let d = ev(&gc[3], x, y);
                (a * a + 2.0 * off * off + d * d).sqrt()
            };
            let grad = gauss_quad_2d(&grad_f, qr, BULK_QUAD_ORDER)
                .map_err(|e| MeasureError::Quadrature { cell: cell_idx, msg: e.to_string() })?;
            let strain = if skew {
                NormIntegral::zero()
            } else {
                gauss_quad_2d(&strain_f, qr, BULK_QUAD_ORDER)
                    .map_err(|e| MeasureError::Quadrature { cell: cell_idx, msg: e.to_string() })?
            };
            Ok((grad, strain, skew))
        }
    }
}

fn strain_report_views(
    cells: &[CellView<'_>],
    sup: (f64, f64),
) -> Result<StrainReport, MeasureError> {
    let mut bulk_grad = NormIntegral::zero();
    let mut bulk_strain = NormIntegral::zero();
    let mut skew_exact = true;
    for (i, v) in cells.iter().enumerate() {
        let (g, s, sk) = bulk_cell_integrals(v, i)?;
        bulk_grad = bulk_grad.add(&g);
        bulk_strain = bulk_strain.add(&s);
        skew_exact &= sk;
    }
    let records = jump_set_views(cells);
    let mut jump_length = Rat::zero();
    let mut jump_du = NormIntegral::zero();
    let mut jump_eu = NormIntegral::zero();
    for r in &records {
        jump_length = &jump_length + &r.len;
        jump_du = jump_du.add(&r.du_integral());
        jump_eu = jump_eu.add(&r.eu_integral());
    }
    let (sup_lo, sup_hi) = sup;
    Ok(StrainReport {
        du_total: bulk_grad.add(&jump_du),
        eu_total: bulk_strain.add(&jump_eu),
        bulk_grad_l1: bulk_grad,
        bulk_strain_l1: bulk_strain,
        skew_exact,
        jump_length,
        jump_du,
        jump_eu,
        sup_norm: NormIntegral::with_bound(sup_hi, (sup_hi - sup_lo) + 1e-14 * (1.0 + sup_hi)),
        jump_records: records.len(),
        cells: cells.len(),
    })
}

/// Full strain decomposition of a piecewise-affine field. Bulk terms are
/// exact per cell (constant gradients), jump terms use the closed-form
/// segment integrals.
pub fn strain_report(field: &PAField) -> Result<StrainReport, MeasureError> {
    let sup = field.sup_norm();
    strain_report_views(&pa_views(field), (sup, sup))
}

/// Strain decomposition of a piecewise-polynomial field; bulk terms on
/// non-affine cells use certified quadrature.
pub fn strain_report_pp(field: &PPField) -> Result<StrainReport, MeasureError> {
    let mut lo = 0.0f64;
    let mut hi = 0.0f64;
    for c in &field.cells {
        let (l, h) = PPField::cell_sup_bounds(c);
        lo = lo.max(l);
        hi = hi.max(h);
    }
    strain_report_views(&pp_views(field), (lo, hi))
}

/// `Σ_cells |∇u|^q · area(cell)` for a piecewise-affine field.
pub fn lq_gradient(field: &PAField, q: f64) -> NormIntegral {
    assert!(q >= 1.0, "exponent must be >= 1");
    let mut s = 0.0f64;
    for c in &field.cells {
        let n = c.map.a.frobenius();
        if n > 0.0 {
            s += n.powf(q) * c.rect.area().to_f64();
        }
    }
    NormIntegral::with_bound(s, 1e-13 * (1.0 + q.abs()) * (1.0 + s.abs()))
}

#[derive(Clone, Copy, Debug)]
pub enum BandIntegrand {
    Gradient,
    Strain,
}

/// Mass `∫_bands |∇u| dx` (or `|e(u)|`) together with the exact Lebesgue
/// measure of the band set.
pub fn band_mass(
    field: &PPField,
    bands: &[Rect],
    integrand: BandIntegrand,
) -> Result<(NormIntegral, Rat), MeasureError> {
    for (i, b) in bands.iter().enumerate() {
        if !field.domain.contains_rect(b) {
            return Err(MeasureError::BandOutsideDomain(i));
        }
    }
    let refs: Vec<&Rect> = bands.iter().collect();
    if let Some((i, j)) = crate::fields::find_interior_overlap(&refs) {
        return Err(MeasureError::BandOverlap(i, j));
    }
    let mut lebesgue = Rat::zero();
    for b in bands {
        lebesgue = &lebesgue + &b.area();
    }
    let band_rects: Vec<Rect> = bands.to_vec();
    let cell_rects: Vec<Rect> = field.cells.iter().map(|c| c.rect.clone()).collect();
    let mut mass = NormIntegral::zero();
    for (rect, ci, _bi) in crate::fields::overlay_rects(&cell_rects, &band_rects) {
        match &field.cells[ci].map {
            PPMap::Affine(m) => {
                let n = match integrand {
                    BandIntegrand::Gradient => m.a.frobenius(),
                    BandIntegrand::Strain => m.a.sym().frobenius(),
                };
                mass = mass.add(&NormIntegral::closed_form(n * rect.area().to_f64()));
            }
            PPMap::Poly(p) => {
                let g = [[p[0].dx(), p[0].dy()], [p[1].dx(), p[1].dy()]];
                let gc = [
                    g[0][0].coeffs_f64(),
                    g[0][1].coeffs_f64(),
                    g[1][0].coeffs_f64(),
                    g[1][1].coeffs_f64(),
                ];
                let ev = crate::fields::pp::eval_coeffs_f64;
                let f = |x: f64, y: f64| {
                    let a = ev(&gc[0], x, y);
                    let b = ev(&gc[1], x, y);
                    let c = ev(&gc[2], x, y);
                    let d = ev(&gc[3], x, y);
                    match integrand {
                        BandIntegrand::Gradient => (a * a + b * b + c * c + d * d).sqrt(),
                        BandIntegrand::Strain => {
                            let off = (b + c) / 2.0;
                            (a * a + 2.0 * off * off + d * d).sqrt()
                        }
                    }
                };
                let qr = QuadRect::from_rats(&rect.x0, &rect.x1, &rect.y0, &rect.y1);
                let v = gauss_quad_2d(&f, qr, BULK_QUAD_ORDER)
                    .map_err(|e| MeasureError::Quadrature { cell: ci, msg: e.to_string() })?;
                mass = mass.add(&v);
            }
        }
    }
    Ok((mass, lebesgue))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{Caps, PACell};
    use crate::numeric::Mat2;

    fn split_at_half(left: AffineMap, right: AffineMap) -> PAField {
        let half = Rat::new(1, 2);
        PAField::new(
            Rect::unit(),
            vec![
                PACell {
                    rect: Rect::new(Rat::zero(), half.clone(), Rat::zero(), Rat::one()),
                    map: left,
                },
                PACell {
                    rect: Rect::new(half, Rat::one(), Rat::zero(), Rat::one()),
                    map: right,
                },
            ],
            &Caps::default(),
        )
        .unwrap()
    }

    #[test]
    fn single_cell_has_no_jumps() {
        let f = PAField::uniform(Rect::unit(), AffineMap::linear(Mat2::ints(0, 1, 1, 0)));
        assert!(jump_set(&f).is_empty());
    }

    #[test]
    fn vertical_interface_detected() {
        let f = split_at_half(AffineMap::zero(), AffineMap::constant(Vec2::e1()));
        let js = jump_set(&f);
        assert_eq!(js.len(), 1);
        let r = &js[0];
        assert_eq!(r.len, Rat::one());
        assert_eq!(r.nu, Axis::X);
        assert_eq!(r.jump[0].eval(&Rat::zero()), Rat::one());
        assert_eq!(r.jump[1].eval(&Rat::zero()), Rat::zero());
    }

    #[test]
    fn zero_jump_interfaces_dropped() {
        // same map on both sides of a split: no records
        let m = AffineMap::linear(Mat2::ints(0, 1, 1, 0));
        let f = split_at_half(m.clone(), m);
        assert!(jump_set(&f).is_empty());
    }

    #[test]
    fn skew_field_report() {
        let b = Mat2::ints(0, 1, -1, 0);
        let f = PAField::uniform(Rect::unit(), AffineMap::linear(b));
        let r = strain_report(&f).unwrap();
        assert!((r.bulk_grad_l1.value - 2.0f64.sqrt()).abs() < 1e-14);
        assert_eq!(r.bulk_strain_l1.value, 0.0);
        assert!(r.skew_exact);
        assert_eq!(r.jump_records, 0);
    }

    #[test]
    fn jump_densities() {
        // 0 | e2 split at x=1/2: jump_du = 1, jump_eu = 1/sqrt(2)
        let f = split_at_half(AffineMap::zero(), AffineMap::constant(Vec2::e2()));
        let r = strain_report(&f).unwrap();
        assert!((r.jump_du.value - 1.0).abs() < 1e-13);
        assert!((r.jump_eu.value - 1.0 / 2.0f64.sqrt()).abs() < 1e-13);
        assert_eq!(r.jump_length, Rat::one());
    }

    #[test]
    fn lq_scan_of_skew() {
        let b = Mat2::ints(0, 1, -1, 0);
        let f = PAField::uniform(Rect::unit(), AffineMap::linear(b));
        assert!((lq_gradient(&f, 1.0).value - 2.0f64.sqrt()).abs() < 1e-13);
        assert!((lq_gradient(&f, 2.0).value - 2.0).abs() < 1e-13);
        let z = PAField::uniform(Rect::unit(), AffineMap::zero());
        assert_eq!(lq_gradient(&z, 3.0).value, 0.0);
    }

    #[test]
    fn band_mass_empty_and_flat() {
        let f = PPField::from_pa(&PAField::uniform(Rect::unit(), AffineMap::zero()));
        let (m, l) = band_mass(&f, &[], BandIntegrand::Gradient).unwrap();
        assert_eq!(m.value, 0.0);
        assert!(l.is_zero());
        let band = Rect::new(Rat::zero(), Rat::new(1, 4), Rat::zero(), Rat::one());
        let (m2, l2) = band_mass(&f, &[band], BandIntegrand::Gradient).unwrap();
        assert_eq!(m2.value, 0.0);
        assert_eq!(l2, Rat::new(1, 4));
    }

    #[test]
    fn checkerboard_jump_count() {
        // 4x4 checkerboard of 0 / e1: 24 interior unit-edge records, H^1 = 6
        let q = Rat::new(1, 4);
        let mut cells = Vec::new();
        for i in 0..4i64 {
            for j in 0..4i64 {
                let x0 = &Rat::from_int(i) * &q;
                let y0 = &Rat::from_int(j) * &q;
                let rect = Rect::new(x0.clone(), &x0 + &q, y0.clone(), &y0 + &q);
                let map = if (i + j) % 2 == 0 {
                    AffineMap::zero()
                } else {
                    AffineMap::constant(Vec2::e1())
                };
                cells.push(PACell { rect, map });
            }
        }
        let f = PAField::new(Rect::unit(), cells, &Caps::default()).unwrap();
        let js = jump_set(&f);
        assert_eq!(js.len(), 24);
        let h1: Rat = js.iter().fold(Rat::zero(), |a, r| &a + &r.len);
        assert_eq!(h1, Rat::from_int(6));
    }
}
