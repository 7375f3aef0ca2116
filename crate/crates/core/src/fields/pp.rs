//! Piecewise tensor-polynomial fields (bi-degree <= 2 per component) and
//! separable piecewise-affine cut-offs. These carry the blended fields of
//! the continuous constructions; anything of higher degree is a bug and is
//! rejected loudly.

use super::geometry::{AffineMap, Rect};
use super::pa::{find_interior_overlap, Caps, FieldError, PACell, PAField};
use super::pw1d::Pw1D;
use crate::numeric::{Mat2, Rat, Vec2};

/// Bivariate polynomial with rational coefficients, `c[i][j] x^i y^j`,
/// bi-degree <= 2 in each variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly2 {
    pub c: [[Rat; 3]; 3],
}

impl Poly2 {
    pub fn zero() -> Self {
        Poly2 { c: Default::default() }
    }

    pub fn constant(v: Rat) -> Self {
        let mut p = Poly2::zero();
        p.c[0][0] = v;
        p
    }

    /// `ax·x + ay·y + b`
    pub fn affine(ax: Rat, ay: Rat, b: Rat) -> Self {
        let mut p = Poly2::zero();
        p.c[1][0] = ax;
        p.c[0][1] = ay;
        p.c[0][0] = b;
        p
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|r| r.iter().all(|v| v.is_zero()))
    }

    pub fn is_constant(&self) -> Option<&Rat> {
        for i in 0..3 {
            for j in 0..3 {
                if (i, j) != (0, 0) && !self.c[i][j].is_zero() {
                    return None;
                }
            }
        }
        Some(&self.c[0][0])
    }

    /// Affine part `(ax, ay, b)` if bi-degree <= 1 without the xy term.
    pub fn as_affine(&self) -> Option<(Rat, Rat, Rat)> {
        for i in 0..3 {
            for j in 0..3 {
                if i + j > 1 && !self.c[i][j].is_zero() {
                    return None;
                }
            }
        }
        Some((self.c[1][0].clone(), self.c[0][1].clone(), self.c[0][0].clone()))
    }

    pub fn add(&self, o: &Poly2) -> Poly2 {
        let mut p = Poly2::zero();
        for i in 0..3 {
            for j in 0..3 {
                p.c[i][j] = &self.c[i][j] + &o.c[i][j];
            }
        }
        p
    }

    pub fn sub(&self, o: &Poly2) -> Poly2 {
        let mut p = Poly2::zero();
        for i in 0..3 {
            for j in 0..3 {
                p.c[i][j] = &self.c[i][j] - &o.c[i][j];
            }
        }
        p
    }

    pub fn scale(&self, s: &Rat) -> Poly2 {
        let mut p = Poly2::zero();
        for i in 0..3 {
            for j in 0..3 {
                p.c[i][j] = &self.c[i][j] * s;
            }
        }
        p
    }

    /// Product with bi-degree cap 2: coefficients that would land outside
    /// the 3x3 grid must vanish, otherwise `None`.
    pub fn mul_capped(&self, o: &Poly2) -> Option<Poly2> {
        let mut acc: Vec<Vec<Rat>> = vec![vec![Rat::zero(); 5]; 5];
        for i in 0..3 {
            for j in 0..3 {
                if self.c[i][j].is_zero() {
                    continue;
                }
                for k in 0..3 {
                    for l in 0..3 {
                        if o.c[k][l].is_zero() {
                            continue;
                        }
                        acc[i + k][j + l] =
                            &acc[i + k][j + l] + &(&self.c[i][j] * &o.c[k][l]);
                    }
                }
            }
        }
        for i in 0..5 {
            for j in 0..5 {
                if (i > 2 || j > 2) && !acc[i][j].is_zero() {
                    return None;
                }
            }
        }
        let mut p = Poly2::zero();
        for i in 0..3 {
            for j in 0..3 {
                p.c[i][j] = acc[i][j].clone();
            }
        }
        Some(p)
    }

    pub fn eval(&self, x: &Rat, y: &Rat) -> Rat {
        // Horner in x then y
        let mut acc = Rat::zero();
        for i in (0..3).rev() {
            let mut row = Rat::zero();
            for j in (0..3).rev() {
                row = &(&row * y) + &self.c[i][j];
            }
            acc = &(&acc * x) + &row;
        }
        acc
    }

    pub fn dx(&self) -> Poly2 {
        let mut p = Poly2::zero();
        for i in 1..3 {
            for j in 0..3 {
                p.c[i - 1][j] = &self.c[i][j] * &Rat::from_int(i as i64);
            }
        }
        p
    }

    pub fn dy(&self) -> Poly2 {
        let mut p = Poly2::zero();
        for i in 0..3 {
            for j in 1..3 {
                p.c[i][j - 1] = &self.c[i][j] * &Rat::from_int(j as i64);
            }
        }
        p
    }

    pub fn coeffs_f64(&self) -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = self.c[i][j].to_f64();
            }
        }
        out
    }

    /// Re-express on the unit square via `x = x0 + w s`, `y = y0 + h t`.
    pub fn to_unit_square(&self, rect: &Rect) -> Poly2 {
        let w = rect.width();
        let h = rect.height();
        // substitute x -> x0 + w s: powers of (x0 + w s)
        let mut px: [[Rat; 3]; 3] = Default::default(); // px[i] = coeffs of (x0+ws)^i in s
        px[0][0] = Rat::one();
        px[1][0] = rect.x0.clone();
        px[1][1] = w.clone();
        px[2][0] = &rect.x0 * &rect.x0;
        px[2][1] = &(&rect.x0 * &w) * &Rat::from_int(2);
        px[2][2] = &w * &w;
        let mut py: [[Rat; 3]; 3] = Default::default();
        py[0][0] = Rat::one();
        py[1][0] = rect.y0.clone();
        py[1][1] = h.clone();
        py[2][0] = &rect.y0 * &rect.y0;
        py[2][1] = &(&rect.y0 * &h) * &Rat::from_int(2);
        py[2][2] = &h * &h;
        let mut out = Poly2::zero();
        for i in 0..3 {
            for j in 0..3 {
                if self.c[i][j].is_zero() {
                    continue;
                }
                for si in 0..=i {
                    for tj in 0..=j {
                        let term = &(&self.c[i][j] * &px[i][si]) * &py[j][tj];
                        out.c[si][tj] = &out.c[si][tj] + &term;
                    }
                }
            }
        }
        out
    }
}

pub fn eval_coeffs_f64(c: &[[f64; 3]; 3], x: f64, y: f64) -> f64 {
    let mut acc = 0.0;
    for i in (0..3).rev() {
        let row = c[i][0] + y * (c[i][1] + y * c[i][2]);
        acc = acc * x + row;
    }
    acc
}

/// Cell payload: most cells stay affine, blended band cells carry genuine
/// bi-quadratic polynomials per component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PPMap {
    Affine(AffineMap),
    Poly(Box<[Poly2; 2]>),
}

impl PPMap {
    pub fn zero() -> Self {
        PPMap::Affine(AffineMap::zero())
    }

    pub fn polys(&self) -> [Poly2; 2] {
        match self {
            PPMap::Affine(m) => [
                Poly2::affine(m.a.m[0][0].clone(), m.a.m[0][1].clone(), m.b.x.clone()),
                Poly2::affine(m.a.m[1][0].clone(), m.a.m[1][1].clone(), m.b.y.clone()),
            ],
            PPMap::Poly(p) => [p[0].clone(), p[1].clone()],
        }
    }

    /// Collapse back to an affine map when the polynomials allow it.
    pub fn simplified(polys: [Poly2; 2]) -> PPMap {
        if let (Some((ax0, ay0, b0)), Some((ax1, ay1, b1))) =
            (polys[0].as_affine(), polys[1].as_affine())
        {
            PPMap::Affine(AffineMap::new(
                Mat2::new(ax0, ay0, ax1, ay1),
                Vec2::new(b0, b1),
            ))
        } else {
            PPMap::Poly(Box::new(polys))
        }
    }

    pub fn eval(&self, x: &Vec2) -> Vec2 {
        match self {
            PPMap::Affine(m) => m.eval(x),
            PPMap::Poly(p) => Vec2::new(p[0].eval(&x.x, &x.y), p[1].eval(&x.x, &x.y)),
        }
    }

    /// Exact gradient as polynomial entries `[[d1 u1, d2 u1], [d1 u2, d2 u2]]`.
    pub fn gradient_polys(&self) -> [[Poly2; 2]; 2] {
        match self {
            PPMap::Affine(m) => [
                [
                    Poly2::constant(m.a.m[0][0].clone()),
                    Poly2::constant(m.a.m[0][1].clone()),
                ],
                [
                    Poly2::constant(m.a.m[1][0].clone()),
                    Poly2::constant(m.a.m[1][1].clone()),
                ],
            ],
            PPMap::Poly(p) => [[p[0].dx(), p[0].dy()], [p[1].dx(), p[1].dy()]],
        }
    }

    /// Exact test: gradient is skew-symmetric everywhere on the cell.
    pub fn gradient_is_skew(&self) -> bool {
        match self {
            PPMap::Affine(m) => m.a.is_skew(),
            PPMap::Poly(_) => {
                let g = self.gradient_polys();
                g[0][0].is_zero()
                    && g[1][1].is_zero()
                    && g[0][1].add(&g[1][0]).is_zero()
            }
        }
    }

    /// Exact test: gradient is constant and equal to `a`.
    pub fn gradient_equals(&self, a: &Mat2) -> bool {
        match self {
            PPMap::Affine(m) => &m.a == a,
            PPMap::Poly(_) => {
                let g = self.gradient_polys();
                for i in 0..2 {
                    for j in 0..2 {
                        match g[i][j].is_constant() {
                            Some(v) if *v == a.m[i][j] => {}
                            _ => return false,
                        }
                    }
                }
                true
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PPCell {
    pub rect: Rect,
    pub map: PPMap,
}

/// Piecewise-polynomial field on a rectangle partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PPField {
    pub domain: Rect,
    pub cells: Vec<PPCell>,
}

impl PPField {
    pub fn new(domain: Rect, cells: Vec<PPCell>, caps: &Caps) -> Result<Self, FieldError> {
        let f = PPField { domain, cells };
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

    pub fn from_pa(f: &PAField) -> Self {
        PPField {
            domain: f.domain.clone(),
            cells: f
                .cells
                .iter()
                .map(|c| PPCell { rect: c.rect.clone(), map: PPMap::Affine(c.map.clone()) })
                .collect(),
        }
    }

    /// All cells affine? Then the field is piecewise affine.
    pub fn to_pa(&self) -> Option<PAField> {
        let mut cells = Vec::with_capacity(self.cells.len());
        for c in &self.cells {
            match &c.map {
                PPMap::Affine(m) => cells.push(PACell { rect: c.rect.clone(), map: m.clone() }),
                PPMap::Poly(_) => return None,
            }
        }
        Some(PAField { domain: self.domain.clone(), cells })
    }

    pub fn canonical_sort(&mut self) {
        self.cells.sort_by(|a, b| a.rect.lex_key().cmp(&b.rect.lex_key()));
    }

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

    /// Rigorous upper bound for `sup |u|` on a cell via the Bernstein
    /// convex-hull property, and an attained lower bound from corners.
    pub fn cell_sup_bounds(cell: &PPCell) -> (f64, f64) {
        match &cell.map {
            PPMap::Affine(m) => {
                let mut mx: f64 = 0.0;
                for corner in cell.rect.corners() {
                    mx = mx.max(m.eval(&corner).norm());
                }
                (mx, mx)
            }
            PPMap::Poly(p) => {
                let bx = bernstein_coeffs(&p[0].to_unit_square(&cell.rect));
                let by = bernstein_coeffs(&p[1].to_unit_square(&cell.rect));
                let mut upper: f64 = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        let n = Vec2::new(bx[i][j].clone(), by[i][j].clone()).norm();
                        upper = upper.max(n);
                    }
                }
                let mut lower: f64 = 0.0;
                for corner in cell.rect.corners() {
                    lower = lower.max(cell.map.eval(&corner).norm());
                }
                (lower, upper)
            }
        }
    }
}

/// Tensor Bernstein coefficients of a bi-degree-2 polynomial on [0,1]^2.
fn bernstein_coeffs(p: &Poly2) -> [[Rat; 3]; 3] {
    // 1-D power -> Bernstein (degree 2): b0 = c0, b1 = c0 + c1/2, b2 = c0+c1+c2
    let half = Rat::new(1, 2);
    let conv = |c: [&Rat; 3]| -> [Rat; 3] {
        [
            c[0].clone(),
            c[0] + &(c[1] * &half),
            &(c[0] + c[1]) + c[2],
        ]
    };
    // apply along x for each power of y
    let mut mid: [[Rat; 3]; 3] = Default::default(); // mid[k][j]: Bernstein in x, power j in y
    for j in 0..3 {
        let col = conv([&p.c[0][j], &p.c[1][j], &p.c[2][j]]);
        for k in 0..3 {
            mid[k][j] = col[k].clone();
        }
    }
    let mut out: [[Rat; 3]; 3] = Default::default();
    for k in 0..3 {
        let row = conv([&mid[k][0], &mid[k][1], &mid[k][2]]);
        out[k] = row;
    }
    out
}

/// One separable cut-off factor pair on a rectangle: `psi(x, y) = fx(x)·fy(y)`
/// inside `rect`, zero outside.
#[derive(Clone, Debug)]
pub struct CutoffPiece {
    pub rect: Rect,
    pub fx: Pw1D,
    pub fy: Pw1D,
}

impl CutoffPiece {
    pub fn validate(&self) -> Result<(), FieldError> {
        if self.fx.lo() != &self.rect.x0
            || self.fx.hi() != &self.rect.x1
            || self.fy.lo() != &self.rect.y0
            || self.fy.hi() != &self.rect.y1
        {
            return Err(FieldError::Malformed(
                "cutoff factor domain does not match its rectangle".into(),
            ));
        }
        for f in [&self.fx, &self.fy] {
            let (mn, mx) = f.min_max();
            if mn.is_negative() || mx > Rat::one() {
                return Err(FieldError::Malformed("cutoff values outside [0,1]".into()));
            }
            if !f.is_continuous() {
                return Err(FieldError::Malformed("cutoff factor discontinuous".into()));
            }
        }
        Ok(())
    }

    pub fn value(&self, x: &Rat, y: &Rat) -> Rat {
        &self.fx.eval(x) * &self.fy.eval(y)
    }
}

/// Sum of separable cut-offs with pairwise disjoint supports.
#[derive(Clone, Debug, Default)]
pub struct CutoffField {
    pub pieces: Vec<CutoffPiece>,
}

impl CutoffField {
    pub fn validate(&self) -> Result<(), FieldError> {
        for p in &self.pieces {
            p.validate()?;
        }
        let rects: Vec<&Rect> = self.pieces.iter().map(|p| &p.rect).collect();
        if let Some((i, j)) = find_interior_overlap(&rects) {
            return Err(FieldError::Overlap(i, j));
        }
        Ok(())
    }

    pub fn value(&self, x: &Rat, y: &Rat) -> Rat {
        for p in &self.pieces {
            if p.rect.contains_closed(&Vec2::new(x.clone(), y.clone())) {
                return p.value(x, y);
            }
        }
        Rat::zero()
    }
}

/// Subtract a family of disjoint sub-rectangles from `rect`; the remainder
/// is rectangulated by vertical slabs.
pub fn rect_subtract(rect: &Rect, holes: &[Rect]) -> Vec<Rect> {
    let mut xs: Vec<Rat> = vec![rect.x0.clone(), rect.x1.clone()];
    for h in holes {
        if h.x0 > rect.x0 && h.x0 < rect.x1 {
            xs.push(h.x0.clone());
        }
        if h.x1 > rect.x0 && h.x1 < rect.x1 {
            xs.push(h.x1.clone());
        }
    }
    xs.sort();
    xs.dedup();
    let mut out = Vec::new();
    for w in xs.windows(2) {
        let slab = Rect::new(w[0].clone(), w[1].clone(), rect.y0.clone(), rect.y1.clone());
        // y-intervals covered by holes in this slab
        let mut cov: Vec<(Rat, Rat)> = holes
            .iter()
            .filter(|h| h.x0 <= slab.x0 && slab.x1 <= h.x1)
            .map(|h| (h.y0.clone().max(slab.y0.clone()), h.y1.clone().min(slab.y1.clone())))
            .filter(|(a, b)| a < b)
            .collect();
        cov.sort_by(|a, b| a.0.cmp(&b.0));
        let mut y = slab.y0.clone();
        for (a, b) in cov {
            if y < a {
                out.push(Rect::new(slab.x0.clone(), slab.x1.clone(), y.clone(), a.clone()));
            }
            if b > y {
                y = b;
            }
        }
        if y < slab.y1 {
            out.push(Rect::new(slab.x0.clone(), slab.x1.clone(), y, slab.y1.clone()));
        }
    }
    out
}

/// `(1-psi)·f + psi·g` on the common refinement. Exactly `f` where `psi = 0`
/// and `g` where `psi = 1`; per-cell bi-degree stays <= 2 or the call fails.
///
/// Returns the blended field together with the indices of transition cells
/// (cells where `psi` is not constant).
pub fn blend_with_bands(
    psi: &CutoffField,
    f: &PPField,
    g: &PPField,
    caps: &Caps,
) -> Result<(PPField, Vec<usize>), FieldError> {
    if f.domain != g.domain {
        return Err(FieldError::DomainMismatch);
    }
    psi.validate()?;
    let fr: Vec<Rect> = f.cells.iter().map(|c| c.rect.clone()).collect();
    let gr: Vec<Rect> = g.cells.iter().map(|c| c.rect.clone()).collect();
    let base = overlay_rects(&fr, &gr);
    struct OutCell {
        rect: Rect,
        map: PPMap,
        band: bool,
    }
    let mut out: Vec<OutCell> = Vec::new();
    for (rect, fi, gi) in base {
        // split against cutoff pieces
        let mut inside: Vec<(Rect, usize)> = Vec::new();
        for (pi, piece) in psi.pieces.iter().enumerate() {
            if let Some(r) = rect.intersect(&piece.rect) {
                inside.push((r, pi));
            }
        }
        let holes: Vec<Rect> = inside.iter().map(|(r, _)| r.clone()).collect();
        for rem in rect_subtract(&rect, &holes) {
            // psi = 0 here
            out.push(OutCell { rect: rem, map: f.cells[fi].map.clone(), band: false });
        }
        for (r, pi) in inside {
            let piece = &psi.pieces[pi];
            // tensor split along the factor breakpoints
            let mut xs: Vec<Rat> = vec![r.x0.clone(), r.x1.clone()];
            for b in &piece.fx.breaks {
                if *b > r.x0 && *b < r.x1 {
                    xs.push(b.clone());
                }
            }
            xs.sort();
            xs.dedup();
            let mut ys: Vec<Rat> = vec![r.y0.clone(), r.y1.clone()];
            for b in &piece.fy.breaks {
                if *b > r.y0 && *b < r.y1 {
                    ys.push(b.clone());
                }
            }
            ys.sort();
            ys.dedup();
            let half = Rat::new(1, 2);
            for wx in xs.windows(2) {
                let mx = &(&wx[0] + &wx[1]) * &half;
                let px = &piece.fx.pieces[piece.fx.piece_at(&mx)];
                for wy in ys.windows(2) {
                    let my = &(&wy[0] + &wy[1]) * &half;
                    let py = &piece.fy.pieces[piece.fy.piece_at(&my)];
                    let sub = Rect::new(
                        wx[0].clone(),
                        wx[1].clone(),
                        wy[0].clone(),
                        wy[1].clone(),
                    );
                    // psi restricted to this sub-rect: (sx x + ix)(sy y + iy)
                    let psi_poly = {
                        let mut p = Poly2::zero();
                        p.c[0][0] = &px.icept * &py.icept;
                        p.c[1][0] = &px.slope * &py.icept;
                        p.c[0][1] = &px.icept * &py.slope;
                        p.c[1][1] = &px.slope * &py.slope;
                        p
                    };
                    let fp = f.cells[fi].map.polys();
                    let gp = g.cells[gi].map.polys();
                    let band = psi_poly.is_constant().is_none();
                    let map = if let Some(cv) = psi_poly.is_constant() {
                        if cv.is_zero() {
                            f.cells[fi].map.clone()
                        } else if *cv == Rat::one() {
                            g.cells[gi].map.clone()
                        } else {
                            let mix = |a: &Poly2, b: &Poly2| -> Poly2 {
                                a.add(&b.sub(a).scale(cv))
                            };
                            PPMap::simplified([mix(&fp[0], &gp[0]), mix(&fp[1], &gp[1])])
                        }
                    } else {
                        let mut comps: Vec<Poly2> = Vec::with_capacity(2);
                        for k in 0..2 {
                            let diff = gp[k].sub(&fp[k]);
                            let prod = psi_poly
                                .mul_capped(&diff)
                                .ok_or(FieldError::DegreeOverflow(out.len()))?;
                            comps.push(fp[k].add(&prod));
                        }
                        PPMap::simplified([comps.remove(0), comps.remove(0)])
                    };
                    out.push(OutCell { rect: sub, map, band });
                }
            }
        }
    }
    out.sort_by(|a, b| a.rect.lex_key().cmp(&b.rect.lex_key()));
    let bands: Vec<usize> = out
        .iter()
        .enumerate()
        .filter_map(|(i, c)| if c.band { Some(i) } else { None })
        .collect();
    let cells: Vec<PPCell> = out
        .into_iter()
        .map(|c| PPCell { rect: c.rect, map: c.map })
        .collect();
    let field = PPField::new(f.domain.clone(), cells, caps)?;
    Ok((field, bands))
}

/// `(1-psi)·f + psi·g`, discarding the band bookkeeping.
pub fn blend(
    psi: &CutoffField,
    f: &PPField,
    g: &PPField,
    caps: &Caps,
) -> Result<PPField, FieldError> {
    blend_with_bands(psi, f, g, caps).map(|(f, _)| f)
}

/// Positive-area intersections between two rectangle families (sweep line).
pub fn overlay_rects(a: &[Rect], b: &[Rect]) -> Vec<(Rect, usize, usize)> {
    #[derive(PartialEq, Eq, PartialOrd, Ord)]
    enum Kind {
        Leave,
        Enter,
    }
    let mut events: Vec<(Rat, Kind, bool, usize)> = Vec::new();
    for (i, r) in a.iter().enumerate() {
        events.push((r.x0.clone(), Kind::Enter, false, i));
        events.push((r.x1.clone(), Kind::Leave, false, i));
    }
    for (j, r) in b.iter().enumerate() {
        events.push((r.x0.clone(), Kind::Enter, true, j));
        events.push((r.x1.clone(), Kind::Leave, true, j));
    }
    events.sort_by(|p, q| p.0.cmp(&q.0).then_with(|| p.1.cmp(&q.1)));
    use std::collections::BTreeMap;
    let mut active_a: BTreeMap<(Rat, usize), usize> = BTreeMap::new();
    let mut active_b: BTreeMap<(Rat, usize), usize> = BTreeMap::new();
    let mut out = Vec::new();
    for (_, kind, side, idx) in events {
        let rect = if side { &b[idx] } else { &a[idx] };
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
                for ((y0, _), &o) in other.iter() {
                    if *y0 >= rect.y1 {
                        break;
                    }
                    let orect = if side { &a[o] } else { &b[o] };
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
    use crate::fields::pw1d::Piece;

    fn unit_pp(map: PPMap) -> PPField {
        PPField { domain: Rect::unit(), cells: vec![PPCell { rect: Rect::unit(), map }] }
    }

    fn psi_x() -> CutoffField {
        // psi = x on the unit square
        CutoffField {
            pieces: vec![CutoffPiece {
                rect: Rect::unit(),
                fx: Pw1D::new(
                    vec![Rat::zero(), Rat::one()],
                    vec![Piece { slope: Rat::one(), icept: Rat::zero() }],
                ),
                fy: Pw1D::constant(Rat::zero(), Rat::one(), Rat::one()),
            }],
        }
    }

    #[test]
    fn blend_constant_weights() {
        let f = unit_pp(PPMap::zero());
        let g = unit_pp(PPMap::Affine(AffineMap::constant(Vec2::e2())));
        // psi ≡ 0 -> f, psi ≡ 1 -> g
        let zero = CutoffField {
            pieces: vec![CutoffPiece {
                rect: Rect::unit(),
                fx: Pw1D::constant(Rat::zero(), Rat::one(), Rat::zero()),
                fy: Pw1D::constant(Rat::zero(), Rat::one(), Rat::one()),
            }],
        };
        let out = blend(&zero, &f, &g, &Caps::default()).unwrap();
        assert_eq!(out.cells.len(), 1);
        assert!(matches!(&out.cells[0].map, PPMap::Affine(m) if m.is_zero()));
        let one = CutoffField {
            pieces: vec![CutoffPiece {
                rect: Rect::unit(),
                fx: Pw1D::constant(Rat::zero(), Rat::one(), Rat::one()),
                fy: Pw1D::constant(Rat::zero(), Rat::one(), Rat::one()),
            }],
        };
        let out1 = blend(&one, &f, &g, &Caps::default()).unwrap();
        let v = out1.evaluate(&Vec2::new(Rat::new(1, 3), Rat::new(1, 5))).unwrap();
        assert_eq!(v, Vec2::e2());
    }

    #[test]
    fn blend_linear_weight_product_rule() {
        // psi = x1, f = 0, g = e2 -> field (0, x1), gradient e2 ⊗ e1
        let f = unit_pp(PPMap::zero());
        let g = unit_pp(PPMap::Affine(AffineMap::constant(Vec2::e2())));
        let out = blend(&psi_x(), &f, &g, &Caps::default()).unwrap();
        let v = out.evaluate(&Vec2::new(Rat::new(1, 4), Rat::new(1, 2))).unwrap();
        assert_eq!(v, Vec2::new(Rat::zero(), Rat::new(1, 4)));
        let grad = out.cells[0].map.gradient_polys();
        assert_eq!(grad[1][0].is_constant(), Some(&Rat::one()));
    }

    #[test]
    fn blend_of_field_with_itself_is_identity() {
        let a0 = Mat2::ints(0, 1, 1, 0);
        let f = unit_pp(PPMap::Affine(AffineMap::linear(a0)));
        let (out, bands) = blend_with_bands(&psi_x(), &f, &f, &Caps::default()).unwrap();
        for c in &out.cells {
            assert_eq!(c.map, f.cells[0].map);
        }
        assert!(bands.is_empty() || !out.cells.is_empty());
    }

    #[test]
    fn degree_overflow_rejected() {
        // psi = x against a gradient already quadratic in x -> x^3 term
        let mut p = Poly2::zero();
        p.c[2][0] = Rat::one(); // x^2
        let f = unit_pp(PPMap::Poly(Box::new([p, Poly2::zero()])));
        let g = unit_pp(PPMap::zero());
        let err = blend(&psi_x(), &f, &g, &Caps::default());
        assert!(matches!(err, Err(FieldError::DegreeOverflow(_))));
    }

    #[test]
    fn rect_subtract_leaves_frame() {
        let outer = Rect::ints(0, 3, 0, 3);
        let hole = Rect::ints(1, 2, 1, 2);
        let parts = rect_subtract(&outer, &[hole.clone()]);
        let total: Rat = parts
            .iter()
            .fold(Rat::zero(), |acc, r| &acc + &r.area());
        assert_eq!(&total + &hole.area(), outer.area());
    }
}
