//! Random Caccioppoli-affine fields on guillotine rectangle partitions and
//! the per-piece divergence-theorem inequalities they satisfy.

use crate::fields::{AffineMap, Caps, FieldError, PACell, PAField, Rect};
use crate::measures::strain_report;
use crate::numeric::{Mat2, Rat, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CaccioppoliError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("measure failure: {0}")]
    Measure(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PieceMode {
    /// skew gradient plus translation on every piece
    Rigid,
    /// unconstrained affine pieces
    Affine,
}

/// Deterministic random rational in `[lo, hi)` with denominator <= 16.
fn rand_rat(rng: &mut ChaCha8Rng, lo: &Rat, hi: &Rat) -> Rat {
    let den: i64 = rng.gen_range(4..=16);
    let num: i64 = rng.gen_range(1..den);
    let t = Rat::new(num, den);
    lo + &(&(hi - lo) * &t)
}

fn rand_coeff(rng: &mut ChaCha8Rng, bound: i64) -> Rat {
    let den: i64 = rng.gen_range(1..=4);
    let num: i64 = rng.gen_range(-bound * den..=bound * den);
    Rat::new(num, den)
}

fn split_rect(rng: &mut ChaCha8Rng, rect: &Rect, pieces: usize, out: &mut Vec<Rect>) {
    if pieces == 1 {
        out.push(rect.clone());
        return;
    }
    let left = pieces / 2;
    let right = pieces - left;
    // cut the longer side at a random rational position in the middle third
    let vertical = rect.width() >= rect.height();
    if vertical {
        let third = &rect.x0 + &(&rect.width() * &Rat::new(1, 3));
        let two_third = &rect.x0 + &(&rect.width() * &Rat::new(2, 3));
        let cut = rand_rat(rng, &third, &two_third);
        split_rect(rng, &Rect::new(rect.x0.clone(), cut.clone(), rect.y0.clone(), rect.y1.clone()), left, out);
        split_rect(rng, &Rect::new(cut, rect.x1.clone(), rect.y0.clone(), rect.y1.clone()), right, out);
    } else {
        let third = &rect.y0 + &(&rect.height() * &Rat::new(1, 3));
        let two_third = &rect.y0 + &(&rect.height() * &Rat::new(2, 3));
        let cut = rand_rat(rng, &third, &two_third);
        split_rect(rng, &Rect::new(rect.x0.clone(), rect.x1.clone(), rect.y0.clone(), cut.clone()), left, out);
        split_rect(rng, &Rect::new(rect.x0.clone(), rect.x1.clone(), cut, rect.y1.clone()), right, out);
    }
}

/// Deterministic per seed: a valid partition of the unit square into
/// `pieces` rectangles by recursive guillotine cuts, with bounded rational
/// coefficients on each piece.
pub fn random_caccioppoli(
    seed: u64,
    pieces: usize,
    mode: PieceMode,
    bound: i64,
    caps: &Caps,
) -> Result<PAField, CaccioppoliError> {
    assert!(pieces >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rects = Vec::with_capacity(pieces);
    split_rect(&mut rng, &Rect::unit(), pieces, &mut rects);
    let mut cells = Vec::with_capacity(rects.len());
    for rect in rects {
        let a = match mode {
            PieceMode::Rigid => {
                let s = rand_coeff(&mut rng, bound);
                Mat2::new(Rat::zero(), s.clone(), -s, Rat::zero())
            }
            PieceMode::Affine => Mat2::new(
                rand_coeff(&mut rng, bound),
                rand_coeff(&mut rng, bound),
                rand_coeff(&mut rng, bound),
                rand_coeff(&mut rng, bound),
            ),
        };
        let b = Vec2::new(rand_coeff(&mut rng, bound), rand_coeff(&mut rng, bound));
        cells.push(PACell { rect, map: AffineMap::new(a, b) });
    }
    Ok(PAField::new(Rect::unit(), cells, caps)?)
}

/// Exact `∫ |a + b t| dt` over `[0, L]` for rational scalars (splits at the
/// root; fully rational).
fn abs_affine_integral(a: &Rat, b: &Rat, len: &Rat) -> Rat {
    let half = Rat::new(1, 2);
    let val = |t: &Rat| -> Rat { a + &(b * t) };
    let prim = |t: &Rat| -> Rat {
        // antiderivative of (a + b t): a t + b t²/2
        &(a * t) + &(&(&(b * t) * t) * &half)
    };
    if b.is_zero() {
        return &a.abs() * len;
    }
    let root = &(-a.clone()) / b;
    if root.is_positive() && root < *len {
        let left = &prim(&root) - &prim(&Rat::zero());
        let right = &prim(len) - &prim(&root);
        let sgn_left = if val(&Rat::zero()).is_negative() { -Rat::one() } else { Rat::one() };
        &(&left * &sgn_left).abs() + &(&right).abs()
    } else {
        (&prim(len) - &prim(&Rat::zero())).abs()
    }
}

/// `∫_{∂R} |v| dH^1` for the scalar affine `v(x) = g·x + c`, exact.
fn boundary_abs_integral(rect: &Rect, g: &Vec2, c: &Rat) -> Rat {
    let mut total = Rat::zero();
    // bottom and top (vary x)
    for y in [&rect.y0, &rect.y1] {
        let a = &(&g.y * y) + c;
        let a0 = &a + &(&g.x * &rect.x0);
        total = &total + &abs_affine_integral(&a0, &g.x, &rect.width());
    }
    // left and right (vary y)
    for x in [&rect.x0, &rect.x1] {
        let a = &(&g.x * x) + c;
        let a0 = &a + &(&g.y * &rect.y0);
        total = &total + &abs_affine_integral(&a0, &g.y, &rect.height());
    }
    total
}

#[derive(Clone, Debug, Serialize)]
pub struct PieceCheck {
    pub piece: usize,
    pub component: usize,
    /// `∫_E |∇u_j| dx`
    pub lhs: f64,
    /// `∫_{∂*E} |v_j| dH^1`, exact rational evaluated
    pub rhs: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GsbvReport {
    pub pieces: usize,
    pub checks: Vec<PieceCheck>,
    pub violations: usize,
    /// `|Du|(Ω)` measured
    pub du_total: f64,
    /// `2 Σ_k ∫_{∂*E_k} |v_k| dH^1`
    pub twice_boundary_sum: f64,
    pub total_bound_ok: bool,
}

/// Per-piece, per-component divergence inequality
/// `∫_E |∇u_j| dx <= ∫_{∂*E} |v_j| dH^1`, and the factor-2 total-variation
/// bound. Violations are reported with piece indices.
pub fn gsbv_check(field: &PAField) -> Result<GsbvReport, CaccioppoliError> {
    let mut checks = Vec::with_capacity(field.cells.len() * 2);
    let mut violations = 0usize;
    let mut boundary_sum = Rat::zero();
    for (i, cell) in field.cells.iter().enumerate() {
        for comp in 0..2 {
            let g = cell.map.a.row(comp);
            let c = if comp == 0 { &cell.map.b.x } else { &cell.map.b.y };
            let lhs = g.norm() * cell.rect.area().to_f64();
            let rhs_exact = boundary_abs_integral(&cell.rect, &g, c);
            boundary_sum = &boundary_sum + &rhs_exact;
            let rhs = rhs_exact.to_f64();
            // lhs carries only the float norm error
            let ok = lhs <= rhs + 1e-12 * (1.0 + rhs);
            if !ok {
                violations += 1;
            }
            checks.push(PieceCheck { piece: i, component: comp, lhs, rhs, ok });
        }
    }
    let report = strain_report(field).map_err(|e| CaccioppoliError::Measure(e.to_string()))?;
    let du = report.du_total.value - report.du_total.abs_error_bound;
    let twice = 2.0 * boundary_sum.to_f64();
    Ok(GsbvReport {
        pieces: field.cells.len(),
        checks,
        violations,
        du_total: report.du_total.value,
        twice_boundary_sum: twice,
        total_bound_ok: du <= twice,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let caps = Caps::default();
        let a = random_caccioppoli(7, 20, PieceMode::Affine, 2, &caps).unwrap();
        let b = random_caccioppoli(7, 20, PieceMode::Affine, 2, &caps).unwrap();
        assert_eq!(a, b);
        let c = random_caccioppoli(8, 20, PieceMode::Affine, 2, &caps).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rigid_single_piece() {
        let caps = Caps::default();
        let f = random_caccioppoli(0, 1, PieceMode::Rigid, 2, &caps).unwrap();
        assert_eq!(f.cells.len(), 1);
        assert!(f.cells[0].map.a.is_skew());
    }

    #[test]
    fn abs_affine_integral_with_root() {
        // ∫_0^1 |t - 1/2| dt = 1/4
        let v = abs_affine_integral(&Rat::new(-1, 2), &Rat::one(), &Rat::one());
        assert_eq!(v, Rat::new(1, 4));
    }

    #[test]
    fn scalar_x1_on_unit_square() {
        // u = x1 (first component), zero second: ∫|∇u| = 1,
        // boundary integral of |x1| = 2 (sides x=1 contribute 1, top+bottom 1)
        let g = Vec2::ints(1, 0);
        let rhs = boundary_abs_integral(&Rect::unit(), &g, &Rat::zero());
        assert_eq!(rhs, Rat::from_int(2));
    }

    #[test]
    fn constant_pieces_trivially_pass() {
        let caps = Caps::default();
        let mut f = random_caccioppoli(3, 10, PieceMode::Affine, 2, &caps).unwrap();
        for c in &mut f.cells {
            c.map.a = Mat2::zero();
        }
        let rep = gsbv_check(&f).unwrap();
        assert_eq!(rep.violations, 0);
    }

    #[test]
    fn partition_validity_for_many_pieces() {
        let caps = Caps::default();
        let f = random_caccioppoli(7, 50, PieceMode::Affine, 3, &caps).unwrap();
        assert_eq!(f.cells.len(), 50);
        f.validate(&caps).unwrap();
    }
}
