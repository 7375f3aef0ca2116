//! Quantizers replacing an affine map by a piecewise-constant staircase or
//! by a continuous finite-level Cantor staircase, plus the Cantor cut-offs
//! used by the continuous pipeline.

use crate::fields::{AffineMap, CutoffPiece, PACell, Piece, Pw1D, Rect};
use crate::numeric::{Rat, Vec2};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum QuantizeError {
    #[error("δ = {0} exceeds a side of the target rectangle")]
    DeltaTooLarge(String),
    #[error("δ = {0} must be smaller than half the shorter side")]
    DeltaTooLargeForCutoff(String),
    #[error("Cantor level {got} exceeds the cap {cap} (breakpoint explosion)")]
    LevelCap { got: u32, cap: u32 },
    #[error("quantization needs {required} cells, cap is {cap}")]
    CellCap { required: usize, cap: usize },
}

pub const MAX_CANTOR_LEVEL: u32 = 16;

/// Finite-level Cantor staircase on [0,1].
#[derive(Clone, Debug)]
pub struct CantorStair {
    pub level: u32,
    pub f: Pw1D,
}

/// `Ψ_m`: 2^m rising pieces of slope `(3/2)^m`, flat on every removed
/// middle third up to level `m`; `Ψ_m(0) = 0`, `Ψ_m(1) = 1`, total
/// variation exactly 1.
pub fn cantor_stair(m: u32) -> Result<CantorStair, QuantizeError> {
    if m > MAX_CANTOR_LEVEL {
        return Err(QuantizeError::LevelCap { got: m, cap: MAX_CANTOR_LEVEL });
    }
    // rising intervals as (t0, t1, v0, v1); flats are implied between them
    let mut rising: Vec<(Rat, Rat, Rat, Rat)> =
        vec![(Rat::zero(), Rat::one(), Rat::zero(), Rat::one())];
    for _ in 0..m {
        let mut next = Vec::with_capacity(rising.len() * 2);
        let third = Rat::new(1, 3);
        let half = Rat::new(1, 2);
        for (t0, t1, v0, v1) in rising {
            let dt = &(&t1 - &t0) * &third;
            let vm = &(&v0 + &v1) * &half;
            next.push((t0.clone(), &t0 + &dt, v0, vm.clone()));
            next.push((&t1 - &dt, t1, vm, v1));
        }
        rising = next;
    }
    let mut breaks = Vec::with_capacity(rising.len() * 2 + 1);
    let mut pieces = Vec::with_capacity(rising.len() * 2);
    for (i, (t0, t1, v0, v1)) in rising.iter().enumerate() {
        if i == 0 {
            breaks.push(t0.clone());
        } else if breaks.last().unwrap() != t0 {
            // flat piece between the previous rising interval and this one
            pieces.push(Piece { slope: Rat::zero(), icept: v0.clone() });
            breaks.push(t0.clone());
        }
        let slope = &(v1 - v0) / &(t1 - t0);
        let icept = v0 - &(&slope * t0);
        pieces.push(Piece { slope, icept });
        breaks.push(t1.clone());
    }
    Ok(CantorStair { level: m, f: Pw1D::new(breaks, pieces) })
}

impl CantorStair {
    /// Exact Lebesgue measure of the non-flat set: `(2/3)^m`.
    pub fn non_flat_measure(&self) -> Rat {
        self.f.non_flat_measure()
    }
}

/// Per-axis grid profile `t ↦ lo + δ(⌊s⌋ + Ψ_m(s - ⌊s⌋))`, `s = (t - lo)/δ`,
/// restricted to `[lo, hi]`. Level 0 gives the identity, level `None`
/// (staircase mode) gives the floor profile `t ↦ lo + δ⌊s⌋`.
fn grid_profile(lo: &Rat, hi: &Rat, delta: &Rat, stair: Option<&CantorStair>) -> Pw1D {
    let mut breaks: Vec<Rat> = Vec::new();
    let mut pieces: Vec<Piece> = Vec::new();
    let mut j = 0i64;
    loop {
        let cell_lo = lo + &(delta * &Rat::from_int(j));
        if &cell_lo >= hi {
            break;
        }
        let cell_hi = (lo + &(delta * &Rat::from_int(j + 1))).min(hi.clone());
        let base = cell_lo.clone();
        match stair {
            None => {
                if breaks.is_empty() {
                    breaks.push(cell_lo.clone());
                }
                pieces.push(Piece { slope: Rat::zero(), icept: base });
                breaks.push(cell_hi.clone());
            }
            Some(cs) => {
                // value = base + δ Ψ((t - cell_lo)/δ)
                for (i, p) in cs.f.pieces.iter().enumerate() {
                    let t0 = &cell_lo + &(delta * &cs.f.breaks[i]);
                    let t1 = &cell_lo + &(delta * &cs.f.breaks[i + 1]);
                    if &t0 >= &cell_hi {
                        break;
                    }
                    let t1c = t1.min(cell_hi.clone());
                    // Ψ piece: v(s) = slope s + icept, s = (t - cell_lo)/δ
                    // value(t) = base + δ(slope (t-cell_lo)/δ + icept)
                    //          = slope t + base + δ icept - slope cell_lo
                    let slope = p.slope.clone();
                    let icept = &(&base + &(delta * &p.icept)) - &(&slope * &cell_lo);
                    if breaks.is_empty() {
                        breaks.push(t0.clone());
                    }
                    pieces.push(Piece { slope, icept });
                    breaks.push(t1c.clone());
                    if breaks.last().unwrap() == &cell_hi {
                        break;
                    }
                }
            }
        }
        if &cell_hi == hi {
            break;
        }
        j += 1;
    }
    Pw1D::new(breaks, pieces)
}

/// Tensor assembly of `v(x, y) = A e1 g1(x) + A e2 g2(y) + b` from two
/// per-axis profiles; each tensor cell is affine.
fn tensor_cells(
    u: &AffineMap,
    g1: &Pw1D,
    g2: &Pw1D,
) -> (Vec<PACell>, Vec<(bool, bool)>) {
    let a_e1 = u.a.col(0);
    let a_e2 = u.a.col(1);
    let mut cells = Vec::with_capacity(g1.pieces.len() * g2.pieces.len());
    let mut bands = Vec::with_capacity(cells.capacity());
    for (i, px) in g1.pieces.iter().enumerate() {
        for (j, py) in g2.pieces.iter().enumerate() {
            let rect = Rect::new(
                g1.breaks[i].clone(),
                g1.breaks[i + 1].clone(),
                g2.breaks[j].clone(),
                g2.breaks[j + 1].clone(),
            );
            // gradient = slope_x (A e1)⊗e1 + slope_y (A e2)⊗e2
            let grad = &a_e1.outer(&Vec2::e1()).scale(&px.slope)
                + &a_e2.outer(&Vec2::e2()).scale(&py.slope);
            let b = &(&a_e1.scale(&px.icept) + &a_e2.scale(&py.icept)) + &u.b;
            cells.push(PACell { rect, map: AffineMap::new(grad, b) });
            bands.push((!px.is_flat(), !py.is_flat()));
        }
    }
    (cells, bands)
}

/// Piecewise-constant staircase of an affine map on the `δ`-grid anchored at
/// the lower-left corner of `ω`: `∇v = 0` exactly on every cell.
pub fn staircase_quantize(
    u: &AffineMap,
    omega: &Rect,
    delta: &Rat,
) -> Result<Vec<PACell>, QuantizeError> {
    if delta > &omega.width() || delta > &omega.height() {
        return Err(QuantizeError::DeltaTooLarge(delta.to_frac_string()));
    }
    let g1 = grid_profile(&omega.x0, &omega.x1, delta, None);
    let g2 = grid_profile(&omega.y0, &omega.y1, delta, None);
    let (cells, _) = tensor_cells(u, &g1, &g2);
    Ok(cells)
}

/// Continuous Cantor quantization of an affine map.
#[derive(Clone, Debug)]
pub struct CantorQuantized {
    pub cells: Vec<PACell>,
    /// per-cell flags: gradient supported in the x / y Cantor bands
    pub bands: Vec<(bool, bool)>,
    pub x_profile: Pw1D,
    pub y_profile: Pw1D,
    /// exact Lebesgue measure of the x-band and y-band subsets of ω
    pub band_x_area: Rat,
    pub band_y_area: Rat,
}

/// Replace `u = Ax + b` on `ω` by the continuous level-`m` Cantor staircase
/// field: no jumps, gradient supported on bands of per-axis measure fraction
/// `(2/3)^m` of each full grid cell.
pub fn cantor_quantize(
    u: &AffineMap,
    omega: &Rect,
    delta: &Rat,
    m: u32,
) -> Result<CantorQuantized, QuantizeError> {
    if delta > &omega.width() || delta > &omega.height() {
        return Err(QuantizeError::DeltaTooLarge(delta.to_frac_string()));
    }
    let stair = cantor_stair(m)?;
    let g1 = grid_profile(&omega.x0, &omega.x1, delta, Some(&stair));
    let g2 = grid_profile(&omega.y0, &omega.y1, delta, Some(&stair));
    let (cells, bands) = tensor_cells(u, &g1, &g2);
    let band_x_area = &g1.non_flat_measure() * &omega.height();
    let band_y_area = &g2.non_flat_measure() * &omega.width();
    Ok(CantorQuantized {
        cells,
        bands,
        x_profile: g1,
        y_profile: g2,
        band_x_area,
        band_y_area,
    })
}

/// Separable Cantor cut-off on a rectangle: `ψ = 1` on the `δ`-inset,
/// `ψ = 0` on `∂R`, each 1-D factor a reflected level-`m` staircase ramp.
pub fn cutoff_rect(r: &Rect, delta: &Rat, m: u32) -> Result<CutoffPiece, QuantizeError> {
    let two = Rat::from_int(2);
    if &(delta * &two) >= &r.min_side() {
        return Err(QuantizeError::DeltaTooLargeForCutoff(delta.to_frac_string()));
    }
    let stair = cantor_stair(m)?;
    let factor = |lo: &Rat, hi: &Rat| -> Pw1D {
        // Ψ((t-lo)/δ) rising on [lo, lo+δ]
        let rise = stair.f.precompose_affine(&delta.recip(), &(-(lo / delta)));
        // Ψ((hi-t)/δ) falling on [hi-δ, hi]
        let fall = stair
            .f
            .precompose_affine(&(-delta.recip()), &(hi / delta));
        let mid = Pw1D::constant(lo + delta, hi - delta, Rat::one());
        Pw1D::concat(&[rise, mid, fall])
    };
    Ok(CutoffPiece {
        rect: r.clone(),
        fx: factor(&r.x0, &r.x1),
        fy: factor(&r.y0, &r.y1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{Caps, PAField};
    use crate::numeric::Mat2;

    #[test]
    fn stair_level_zero_is_identity() {
        let s = cantor_stair(0).unwrap();
        assert_eq!(s.f.pieces.len(), 1);
        assert_eq!(s.f.eval(&Rat::new(1, 3)), Rat::new(1, 3));
    }

    #[test]
    fn stair_level_one() {
        let s = cantor_stair(1).unwrap();
        assert_eq!(s.f.pieces.len(), 3);
        assert_eq!(s.f.pieces[0].slope, Rat::new(3, 2));
        assert_eq!(s.f.eval(&Rat::new(1, 2)), Rat::new(1, 2));
        assert_eq!(s.f.eval(&Rat::new(1, 3)), Rat::new(1, 2));
        assert_eq!(s.f.eval(&Rat::new(2, 3)), Rat::new(1, 2));
    }

    #[test]
    fn stair_invariants_all_levels() {
        for m in 0..=8 {
            let s = cantor_stair(m).unwrap();
            assert_eq!(s.f.eval(&Rat::zero()), Rat::zero());
            assert_eq!(s.f.eval(&Rat::one()), Rat::one());
            assert!(s.f.is_continuous());
            assert_eq!(s.f.total_variation(), Rat::one(), "TV at level {}", m);
            // non-flat measure (2/3)^m exactly
            let mut expect = Rat::one();
            for _ in 0..m {
                expect = &expect * &Rat::new(2, 3);
            }
            assert_eq!(s.non_flat_measure(), expect);
            // nondecreasing
            assert!(s.f.pieces.iter().all(|p| !p.slope.is_negative()));
            if m >= 1 {
                assert_eq!(s.f.eval(&Rat::new(1, 2)), Rat::new(1, 2));
            }
        }
    }

    #[test]
    fn staircase_constant_map() {
        let u = AffineMap::constant(Vec2::ints(2, 3));
        let cells = staircase_quantize(&u, &Rect::unit(), &Rat::new(1, 4)).unwrap();
        assert_eq!(cells.len(), 16);
        for c in &cells {
            assert!(c.map.a.is_zero());
            assert_eq!(c.map.b, Vec2::ints(2, 3));
        }
    }

    #[test]
    fn staircase_of_swap_gradient() {
        // u = A0 x on the unit square, δ = 1/4: piecewise constant with
        // 16 cells; measured against the field assembly elsewhere.
        let u = AffineMap::linear(Mat2::ints(0, 1, 1, 0));
        let cells = staircase_quantize(&u, &Rect::unit(), &Rat::new(1, 4)).unwrap();
        let f = PAField::new(Rect::unit(), cells, &Caps::default()).unwrap();
        assert_eq!(f.cells.len(), 16);
        // value at (0.3, 0.6) is A·(1/4, 2/4)
        let v = f
            .evaluate(&Vec2::new(Rat::new(3, 10), Rat::new(3, 5)))
            .unwrap();
        assert_eq!(v, Vec2::new(Rat::new(1, 2), Rat::new(1, 4)));
    }

    #[test]
    fn delta_too_large_rejected() {
        let u = AffineMap::zero();
        assert!(staircase_quantize(&u, &Rect::unit(), &Rat::from_int(2)).is_err());
    }

    #[test]
    fn cantor_quantize_level_zero_is_identity() {
        let u = AffineMap::linear(Mat2::ints(0, 1, 1, 0));
        let qz = cantor_quantize(&u, &Rect::unit(), &Rat::new(1, 4), 0).unwrap();
        let f = PAField::new(Rect::unit(), qz.cells, &Caps::default()).unwrap();
        for c in &f.cells {
            assert_eq!(c.map.a, u.a);
        }
    }

    #[test]
    fn cantor_quantize_is_continuous() {
        let u = AffineMap::linear(Mat2::ints(0, 1, 1, 0));
        let qz = cantor_quantize(&u, &Rect::unit(), &Rat::new(1, 4), 3).unwrap();
        let f = PAField::new(Rect::unit(), qz.cells.clone(), &Caps::default()).unwrap();
        assert!(crate::measures::jump_set(&f).is_empty());
        // per-axis band fraction (2/3)^3 = 8/27
        assert_eq!(qz.band_x_area, Rat::new(8, 27));
        assert_eq!(qz.band_y_area, Rat::new(8, 27));
    }

    #[test]
    fn cutoff_values_and_boundary() {
        let r = Rect::new(Rat::new(-1, 2), Rat::new(1, 2), Rat::new(-1, 2), Rat::new(1, 2));
        let c = cutoff_rect(&r, &Rat::new(1, 8), 3).unwrap();
        c.validate().unwrap();
        assert_eq!(c.value(&Rat::zero(), &Rat::zero()), Rat::one());
        assert_eq!(c.value(&Rat::new(-1, 2), &Rat::zero()), Rat::zero());
        assert_eq!(c.value(&Rat::new(1, 4), &Rat::new(1, 2)), Rat::zero());
        // 1-D factor total variation = 2 (up and down)
        assert_eq!(c.fx.total_variation(), Rat::from_int(2));
        assert_eq!(c.fy.total_variation(), Rat::from_int(2));
    }

    #[test]
    fn cutoff_delta_guard() {
        let r = Rect::unit();
        assert!(cutoff_rect(&r, &Rat::new(1, 2), 2).is_err());
    }
}
