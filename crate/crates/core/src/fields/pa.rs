//! Piecewise-affine vector fields on rectangle partitions.

use super::geometry::{AffineMap, Rect};
use crate::numeric::{NormIntegral, Rat, Vec2};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("cell {0} lies outside the domain")]
    CellOutsideDomain(usize),
    #[error("cells {0} and {1} have overlapping interiors")]
    Overlap(usize, usize),
    #[error("cell areas sum to {got} but the domain has area {want}")]
    AreaMismatch { got: String, want: String },
    #[error("point lies outside the field domain")]
    OutsideDomain,
    #[error("fields have different domains")]
    DomainMismatch,
    #[error("cell count {got} exceeds the cap {cap}")]
    CellCap { got: usize, cap: usize },
    #[error("blend weight is not piecewise affine separable: bi-degree overflow in cell {0}")]
    DegreeOverflow(usize),
    #[error("malformed document: {0}")]
    Malformed(String),
}

/// Resource caps shared by field constructors. The CLI wires
/// `BDFORGE_CELL_CAP` into `cell_cap`.
#[derive(Clone, Copy, Debug)]
pub struct Caps {
    pub cell_cap: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { cell_cap: 200_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PACell {
    pub rect: Rect,
    pub map: AffineMap,
}

/// Piecewise-affine field on a rectangle partition of a rectangular domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PAField {
    pub domain: Rect,
    pub cells: Vec<PACell>,
}

/// Sweep-line overlap check for a family of rectangles whose interiors are
/// expected to be pairwise disjoint. Returns the first offending pair.
pub fn find_interior_overlap(rects: &[&Rect]) -> Option<(usize, usize)> {
    #[derive(PartialEq, Eq, PartialOrd, Ord)]
    enum Kind {
        Leave,
        Enter,
    }
    let mut events: Vec<(Rat, Kind, usize)> = Vec::with_capacity(rects.len() * 2);
    for (i, r) in rects.iter().enumerate() {
        events.push((r.x0.clone(), Kind::Enter, i));
        events.push((r.x1.clone(), Kind::Leave, i));
    }
    // removals first at equal x: touching in x is not an overlap
    events.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let mut active: BTreeMap<Rat, usize> = BTreeMap::new(); // y0 -> index
    for (_, kind, i) in events {
        match kind {
            Kind::Leave => {
                active.remove(&rects[i].y0);
            }
            Kind::Enter => {
                let r = rects[i];
                // predecessor: largest y0 <= r.y0
                if let Some((_, &j)) = active.range(..=r.y0.clone()).next_back() {
                    if rects[j].y1 > r.y0 {
                        return Some((j.min(i), j.max(i)));
                    }
                }
                if let Some((_, &j)) = active.range(r.y0.clone()..).next() {
                    if rects[j].y0 < r.y1 {
                        return Some((j.min(i), j.max(i)));
                    }
                }
                active.insert(r.y0.clone(), i);
            }
        }
    }
    None
}

impl PAField {
    /// Build and validate: cells inside the domain, pairwise interior
    /// disjoint, areas summing exactly to the domain area.
    pub fn new(domain: Rect, cells: Vec<PACell>, caps: &Caps) -> Result<Self, FieldError> {
        let f = PAField { domain, cells };
        f.validate(caps)?;
        Ok(f)
    }

    pub fn validate(&self, caps: &Caps) -> Result<(), FieldError> {
        if self.cells.len() > caps.cell_cap {
            return Err(FieldError::CellCap { got: self.cells.len(), cap: caps.cell_cap });
        }
        let mut area = Rat::zero();
        for (i, c) in self.cells.iter().enumerate() {
            if !self.domain.contains_rect(&c.rect) {
                return Err(FieldError::CellOutsideDomain(i));
            }
            area = &area + &c.rect.area();
        }
        let rects: Vec<&Rect> = self.cells.iter().map(|c| &c.rect).collect();
        if let Some((i, j)) = find_interior_overlap(&rects) {
            return Err(FieldError::Overlap(i, j));
        }
        let want = self.domain.area();
        if area != want {
            return Err(FieldError::AreaMismatch {
                got: area.to_frac_string(),
                want: want.to_frac_string(),
            });
        }
        Ok(())
    }

    /// Single-cell field.
    pub fn uniform(domain: Rect, map: AffineMap) -> Self {
        let cell = PACell { rect: domain.clone(), map };
        PAField { domain, cells: vec![cell] }
    }

    /// Canonical cell order: lexicographic lower-left corner.
    pub fn canonical_sort(&mut self) {
        self.cells.sort_by(|a, b| a.rect.lex_key().cmp(&b.rect.lex_key()));
    }

    /// Index of the cell owning `x`: the cell whose interior contains `x`,
    /// or on shared boundaries the candidate with lexicographically smallest
    /// lower-left corner.
    pub fn cell_at(&self, x: &Vec2) -> Result<usize, FieldError> {
        if !self.domain.contains_closed(x) {
            return Err(FieldError::OutsideDomain);
        }
        let mut best: Option<usize> = None;
        for (i, c) in self.cells.iter().enumerate() {
            if c.rect.contains_closed(x) {
                best = match best {
                    None => Some(i),
                    Some(j) => {
                        if self.cells[i].rect.lex_key() < self.cells[j].rect.lex_key() {
                            Some(i)
                        } else {
                            Some(j)
                        }
                    }
                };
            }
        }
        best.ok_or(FieldError::OutsideDomain)
    }

    pub fn evaluate(&self, x: &Vec2) -> Result<Vec2, FieldError> {
        let i = self.cell_at(x)?;
        Ok(self.cells[i].map.eval(x))
    }

    /// Exact essential sup of `|self - other|` over the common domain; the
    /// max of an affine map over a rectangle is attained at a corner.
    pub fn sup_distance(&self, other: &PAField) -> Result<NormIntegral, FieldError> {
        if self.domain != other.domain {
            return Err(FieldError::DomainMismatch);
        }
        let (rf, rg) = common_refine(self, other)?;
        let mut best = 0.0f64;
        for (cf, cg) in rf.cells.iter().zip(rg.cells.iter()) {
            let d = cf.map.sub(&cg.map);
            if d.is_zero() {
                continue;
            }
            for corner in cf.rect.corners() {
                let v = d.eval(&corner).norm();
                if v > best {
                    best = v;
                }
            }
        }
        Ok(NormIntegral::closed_form(best))
    }

    /// Total area of cells whose gradient equals `a` exactly.
    pub fn area_with_gradient(&self, a: &crate::numeric::Mat2) -> Rat {
        let mut s = Rat::zero();
        for c in &self.cells {
            if &c.map.a == a {
                s = &s + &c.rect.area();
            }
        }
        s
    }

    pub fn sup_norm(&self) -> f64 {
        let mut best = 0.0f64;
        for c in &self.cells {
            for corner in c.rect.corners() {
                let v = c.map.eval(&corner).norm();
                if v > best {
                    best = v;
                }
            }
        }
        best
    }
}

/// Common rectangle refinement of two fields on the same domain: both are
/// re-expressed on the overlay partition (pairwise intersections), values
/// unchanged. Output cells are canonically ordered and aligned pairwise.
pub fn common_refine(f: &PAField, g: &PAField) -> Result<(PAField, PAField), FieldError> {
    if f.domain != g.domain {
        return Err(FieldError::DomainMismatch);
    }
    let pairs = overlay_pairs(&f.cells, &g.cells);
    let mut fc = Vec::with_capacity(pairs.len());
    let mut gc = Vec::with_capacity(pairs.len());
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_by(|&i, &j| pairs[i].0.lex_key().cmp(&pairs[j].0.lex_key()));
    for k in order {
        let (rect, i, j) = &pairs[k];
        fc.push(PACell { rect: rect.clone(), map: f.cells[*i].map.clone() });
        gc.push(PACell { rect: rect.clone(), map: g.cells[*j].map.clone() });
    }
    Ok((
        PAField { domain: f.domain.clone(), cells: fc },
        PAField { domain: g.domain.clone(), cells: gc },
    ))
}

/// All positive-area intersections between two cell families (sweep line).
pub fn overlay_pairs(a: &[PACell], b: &[PACell]) -> Vec<(Rect, usize, usize)> {
    #[derive(PartialEq, Eq, PartialOrd, Ord)]
    enum Kind {
        Leave,
        Enter,
    }
    // side: false = family a, true = family b
    let mut events: Vec<(Rat, Kind, bool, usize)> = Vec::new();
    for (i, c) in a.iter().enumerate() {
        events.push((c.rect.x0.clone(), Kind::Enter, false, i));
        events.push((c.rect.x1.clone(), Kind::Leave, false, i));
    }
    for (j, c) in b.iter().enumerate() {
        events.push((c.rect.x0.clone(), Kind::Enter, true, j));
        events.push((c.rect.x1.clone(), Kind::Leave, true, j));
    }
    events.sort_by(|p, q| p.0.cmp(&q.0).then_with(|| p.1.cmp(&q.1)));
    let mut active_a: BTreeMap<(Rat, usize), usize> = BTreeMap::new();
    let mut active_b: BTreeMap<(Rat, usize), usize> = BTreeMap::new();
    let mut out = Vec::new();
    for (_, kind, side, idx) in events {
        let rect = if side { &b[idx].rect } else { &a[idx].rect };
        match kind {
            Kind::Leave => {
                if side {
                    active_b.remove(&(rect.y0.clone(), idx));
                } else {
                    active_a.remove(&(rect.y0.clone(), idx));
                }
            }
            Kind::Enter => {
                let other = if side { &active_a } else { &active_b };
                for (_, &o) in other.range(..(rect.y1.clone(), usize::MAX)) {
                    let orect = if side { &a[o].rect } else { &b[o].rect };
                    if orect.y1 <= rect.y0 {
                        continue;
                    }
                    if let Some(r) = rect.intersect(orect) {
                        if side {
                            out.push((r, o, idx));
                        } else {
                            out.push((r, idx, o));
                        }
                    }
                }
                if side {
                    active_b.insert((rect.y0.clone(), idx), idx);
                } else {
                    active_a.insert((rect.y0.clone(), idx), idx);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Mat2;

    fn two_cell_split() -> PAField {
        let dom = Rect::unit();
        let half = Rat::new(1, 2);
        let left = PACell {
            rect: Rect::new(Rat::zero(), half.clone(), Rat::zero(), Rat::one()),
            map: AffineMap::zero(),
        };
        let right = PACell {
            rect: Rect::new(half, Rat::one(), Rat::zero(), Rat::one()),
            map: AffineMap::constant(Vec2::e1()),
        };
        PAField::new(dom, vec![left, right], &Caps::default()).unwrap()
    }

    #[test]
    fn evaluate_zero_field() {
        let f = PAField::uniform(Rect::unit(), AffineMap::zero());
        let v = f
            .evaluate(&Vec2::new(Rat::new(1, 3), Rat::new(2, 7)))
            .unwrap();
        assert!(v.is_zero());
    }

    #[test]
    fn evaluate_linear_matrix_action() {
        // u(x) = A0 x, A0 = [[0,1],[1,0]] at (1/2, 1/4) -> (1/4, 1/2)
        let a0 = Mat2::ints(0, 1, 1, 0);
        let f = PAField::uniform(Rect::unit(), AffineMap::linear(a0));
        let v = f
            .evaluate(&Vec2::new(Rat::new(1, 2), Rat::new(1, 4)))
            .unwrap();
        assert_eq!(v, Vec2::new(Rat::new(1, 4), Rat::new(1, 2)));
    }

    #[test]
    fn boundary_convention_picks_lex_smallest() {
        let f = two_cell_split();
        // on the shared edge x = 1/2 the left cell wins
        let v = f.evaluate(&Vec2::new(Rat::new(1, 2), Rat::zero())).unwrap();
        assert!(v.is_zero());
    }

    #[test]
    fn outside_domain_rejected() {
        let f = two_cell_split();
        assert!(f.evaluate(&Vec2::ints(2, 0)).is_err());
    }

    #[test]
    fn refine_with_self_keeps_cells() {
        let f = two_cell_split();
        let (rf, _) = common_refine(&f, &f).unwrap();
        assert_eq!(rf.cells.len(), f.cells.len());
    }

    #[test]
    fn refine_one_vs_two() {
        let one = PAField::uniform(Rect::unit(), AffineMap::zero());
        let two = two_cell_split();
        let (rf, rg) = common_refine(&one, &two).unwrap();
        assert_eq!(rf.cells.len(), 2);
        assert_eq!(rg.cells.len(), 2);
    }

    #[test]
    fn overlap_detected() {
        let dom = Rect::ints(0, 2, 0, 1);
        let c1 = PACell { rect: Rect::ints(0, 1, 0, 1), map: AffineMap::zero() };
        let c2 = PACell {
            rect: Rect::new(Rat::new(1, 2), Rat::from_int(2), Rat::zero(), Rat::one()),
            map: AffineMap::zero(),
        };
        match PAField::new(dom, vec![c1, c2], &Caps::default()) {
            Err(FieldError::Overlap(0, 1)) => {}
            other => panic!("expected overlap error, got {:?}", other.err()),
        }
    }

    #[test]
    fn area_mismatch_detected() {
        let dom = Rect::ints(0, 2, 0, 1);
        let c1 = PACell { rect: Rect::ints(0, 1, 0, 1), map: AffineMap::zero() };
        assert!(matches!(
            PAField::new(dom, vec![c1], &Caps::default()),
            Err(FieldError::AreaMismatch { .. })
        ));
    }

    #[test]
    fn sup_distance_constant_and_linear() {
        let f = PAField::uniform(Rect::unit(), AffineMap::zero());
        let g = PAField::uniform(Rect::unit(), AffineMap::constant(Vec2::e1()));
        let d = f.sup_distance(&g).unwrap();
        assert!((d.value - 1.0).abs() < 1e-14);
        // f - g = A0 x attains sqrt(2) at corner (1,1)
        let a0 = Mat2::ints(0, 1, 1, 0);
        let h = PAField::uniform(Rect::unit(), AffineMap::linear(a0));
        let d2 = f.sup_distance(&h).unwrap();
        assert!((d2.value - 2.0f64.sqrt()).abs() < 1e-14);
    }
}
