//! Rank-one laminate replacement: substitute the gradient `C = λA + (1-λ)B`
//! on its level set by fine strips alternating between `A` and `B`, with the
//! volume fraction hit exactly and sup/jump budgets verified a posteriori.

use crate::fields::{Caps, FieldError, PACell, PAField, Rect};
use crate::measures::{strain_report, Axis};
use crate::numeric::{Mat2, Rat, Vec2};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LaminateError {
    #[error("A = B: rank-zero difference")]
    RankZero,
    #[error("rank(A - B) = 2")]
    RankTwo,
    #[error("A - B is rank one but its normal is not an axis direction")]
    NonAxisNormal,
    #[error("no valid volume fraction: C is not a convex combination of A and B")]
    InconsistentConvex,
    #[error("volume fraction λ = {0} outside (0,1)")]
    LambdaOutOfRange(String),
    #[error("no cell carries the gradient C: ω is empty")]
    EmptyOmega,
    #[error("cell cap exceeded: replacement needs {required} cells, cap is {cap}")]
    CellCap { required: usize, cap: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("measure failure: {0}")]
    Measure(String),
}

/// Decomposition `C = λA + (1-λ)B`, `A - B = a ⊗ ν` with an axis normal.
#[derive(Clone, Debug)]
pub struct RankOneSplit {
    pub c: Mat2,
    pub a_mat: Mat2,
    pub b_mat: Mat2,
    pub lambda: Rat,
    pub a: Vec2,
    pub nu: Axis,
}

/// Recover the split data from the three matrices, verifying every invariant
/// exactly.
pub fn rank_one_split(c: &Mat2, a: &Mat2, b: &Mat2) -> Result<RankOneSplit, LaminateError> {
    let d = a - b;
    if d.is_zero() {
        return Err(LaminateError::RankZero);
    }
    if !d.det().is_zero() {
        return Err(LaminateError::RankTwo);
    }
    let col0 = d.col(0);
    let col1 = d.col(1);
    let (nu, avec) = if col1.is_zero() {
        (Axis::X, col0)
    } else if col0.is_zero() {
        (Axis::Y, col1)
    } else {
        return Err(LaminateError::NonAxisNormal);
    };
    // C - B = λ (A - B)
    let cb = c - b;
    let mut lambda: Option<Rat> = None;
    for i in 0..2 {
        for j in 0..2 {
            if !d.m[i][j].is_zero() {
                lambda = Some(&cb.m[i][j] / &d.m[i][j]);
            }
        }
    }
    let lambda = lambda.ok_or(LaminateError::RankZero)?;
    if &cb - &d.scale(&lambda) != Mat2::zero() {
        return Err(LaminateError::InconsistentConvex);
    }
    if !lambda.is_positive() || lambda >= Rat::one() {
        return Err(LaminateError::LambdaOutOfRange(lambda.to_frac_string()));
    }
    // A = C + (1-λ) a ⊗ ν, exact consistency check
    let one_minus = &Rat::one() - &lambda;
    let nu_vec = match nu {
        Axis::X => Vec2::e1(),
        Axis::Y => Vec2::e2(),
    };
    let recon = &(c + &avec.outer(&nu_vec).scale(&one_minus)) - a;
    debug_assert!(recon.is_zero());
    Ok(RankOneSplit { c: c.clone(), a_mat: a.clone(), b_mat: b.clone(), lambda, a: avec, nu })
}

/// The matrix pencil of the iteration: `A_k, B_k, C_k` with `2^k` entries.
#[derive(Clone, Debug)]
pub struct LaminatePencil {
    pub k: u32,
    pub a_k: Mat2,
    pub b_k: Mat2,
    pub c_k: Mat2,
}

/// Exact matrices
/// `A_k = [[0, 2^k], [2^k, 0]]`, `B_k = [[0, 2^k], [-2^k, 0]]`,
/// `C_k = [[0, 2^k], [2^(k+1), 0]]`; both pencil identities are verified on
/// construction.
pub fn pencil(k: u32) -> LaminatePencil {
    let p = Rat::pow2(k as i32);
    let p1 = Rat::pow2(k as i32 + 1);
    let a_k = Mat2::new(Rat::zero(), p.clone(), p.clone(), Rat::zero());
    let b_k = Mat2::new(Rat::zero(), p.clone(), -p.clone(), Rat::zero());
    let c_k = Mat2::new(Rat::zero(), p, p1, Rat::zero());
    let pen = LaminatePencil { k, a_k, b_k, c_k };
    debug_assert!(pen.check());
    pen
}

impl LaminatePencil {
    /// `A_k = (1/3) B_k + (2/3) C_k` and
    /// `C_k = (3/4) A_{k+1} + (1/4)(-B_{k+1})`, plus the rank-one conditions.
    pub fn check(&self) -> bool {
        let third = Rat::new(1, 3);
        let two_thirds = Rat::new(2, 3);
        let id1 =
            &(&self.b_k.scale(&third) + &self.c_k.scale(&two_thirds)) - &self.a_k == Mat2::zero();
        let next = pencil_raw(self.k + 1);
        let id2 = &(&next.0.scale(&Rat::new(3, 4)) + &(-next.1.clone()).scale(&Rat::new(1, 4)))
            - &self.c_k
            == Mat2::zero();
        let d1 = &self.b_k - &self.c_k;
        let d2 = &next.0 + &next.1;
        let rank1 = d1.det().is_zero() && !d1.is_zero();
        let rank2 = d2.det().is_zero() && !d2.is_zero();
        id1 && id2 && rank1 && rank2
    }

    /// Split for the first half-step: `A_k = (1/3) B_k + (2/3) C_k`.
    pub fn first_split(&self) -> RankOneSplit {
        rank_one_split(&self.a_k, &self.b_k, &self.c_k).expect("pencil is rank-one connected")
    }

    /// Split for the second half-step:
    /// `C_k = (3/4) A_{k+1} + (1/4)(-B_{k+1})`.
    pub fn second_split(&self) -> RankOneSplit {
        let next = pencil_raw(self.k + 1);
        rank_one_split(&self.c_k, &next.0, &(-next.1)).expect("pencil is rank-one connected")
    }
}

fn pencil_raw(k: u32) -> (Mat2, Mat2) {
    let p = Rat::pow2(k as i32);
    (
        Mat2::new(Rat::zero(), p.clone(), p.clone(), Rat::zero()),
        Mat2::new(Rat::zero(), p.clone(), -p, Rat::zero()),
    )
}

/// One-period sawtooth profile `h_λ` scaled to period `1/N`: continuous,
/// `h(0) = h(1/N) = 0`, slope `1-λ` then `-λ`, peak `λ(1-λ)/N` at `λ/N`.
pub fn sawtooth(lambda: &Rat, n: &Rat) -> crate::fields::Pw1D {
    assert!(lambda.is_positive() && *lambda < Rat::one(), "λ must lie in (0,1)");
    assert!(n.is_positive(), "N must be positive");
    use crate::fields::{Piece, Pw1D};
    let period = n.recip();
    let peak_t = lambda * &period;
    let one_minus = &Rat::one() - lambda;
    Pw1D::new(
        vec![Rat::zero(), peak_t, period.clone()],
        vec![
            Piece { slope: one_minus, icept: Rat::zero() },
            Piece { slope: -lambda.clone(), icept: lambda * &period },
        ],
    )
}

/// Smallest budget admitting single-period strips on every ω cell: the
/// sup bound `q·L` and the jump bound `q·ΣL²` evaluated at `m = 1`.
pub fn min_single_period_eps(
    field: &PAField,
    split: &RankOneSplit,
) -> Result<f64, LaminateError> {
    let omega = matching_cells(field, split);
    min_single_period_eps_selected(field, split, &omega)
}

/// `min_single_period_eps` over an explicit subset of cells.
pub fn min_single_period_eps_selected(
    field: &PAField,
    split: &RankOneSplit,
    omega: &[usize],
) -> Result<f64, LaminateError> {
    if omega.is_empty() {
        return Err(LaminateError::EmptyOmega);
    }
    let q = split.a.norm() * split.lambda.to_f64() * (1.0 - split.lambda.to_f64());
    let mut sum_len2 = 0.0f64;
    let mut max_len = 0.0f64;
    for &i in omega {
        let len = match split.nu {
            Axis::X => field.cells[i].rect.width().to_f64(),
            Axis::Y => field.cells[i].rect.height().to_f64(),
        };
        sum_len2 += len * len;
        max_len = max_len.max(len);
    }
    Ok((q * max_len).max(q * sum_len2) * (1.0 + 1e-9))
}

/// Per-cell lamination record.
#[derive(Clone, Debug, Serialize)]
pub struct CellLaminate {
    pub cell: usize,
    /// number of sawtooth periods across the cell
    pub periods: u64,
    pub strips: usize,
    /// exact sup of the perturbation on this cell
    pub sup_delta: f64,
    /// a priori bound for the jump increase contributed by this cell
    pub jump_delta_bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LaminateStepReport {
    pub eps: f64,
    pub cells: Vec<CellLaminate>,
    pub omega_area: Rat,
    pub lambda_area_exact: bool,
    pub measured_sup_delta: f64,
    pub measured_jump_du_before: f64,
    pub measured_jump_du_after: f64,
    pub measured_jump_delta: f64,
    pub sup_within_eps: bool,
    pub jump_within_eps: bool,
}

fn matching_cells(field: &PAField, split: &RankOneSplit) -> Vec<usize> {
    field
        .cells
        .iter()
        .enumerate()
        .filter(|(_, c)| c.map.a == split.c)
        .map(|(i, _)| i)
        .collect()
}

/// Smallest per-cell period counts meeting the sup and jump budgets for
/// `eps`, together with the resulting total cell count.
pub fn predict_periods(
    field: &PAField,
    split: &RankOneSplit,
    eps: f64,
) -> Result<(Vec<(usize, u64)>, usize), LaminateError> {
    let omega = matching_cells(field, split);
    predict_periods_selected(field, split, eps, &omega)
}

/// `predict_periods` over an explicit subset of cells (each must carry the
/// gradient `C`).
pub fn predict_periods_selected(
    field: &PAField,
    split: &RankOneSplit,
    eps: f64,
    omega: &[usize],
) -> Result<(Vec<(usize, u64)>, usize), LaminateError> {
    if omega.is_empty() {
        return Err(LaminateError::EmptyOmega);
    }
    debug_assert!(omega.iter().all(|&i| field.cells[i].map.a == split.c));
    let q = split.a.norm() * split.lambda.to_f64() * (1.0 - split.lambda.to_f64());
    // the perturbation trace lives on the two edges parallel to ν, so a cell
    // of ν-extent L contributes at most q L²/m to the jump increase;
    // allocating budgets proportionally to L² makes the period count uniform
    let sum_len2: f64 = omega
        .iter()
        .map(|&i| {
            let r = &field.cells[i].rect;
            let len = match split.nu {
                Axis::X => r.width().to_f64(),
                Axis::Y => r.height().to_f64(),
            };
            len * len
        })
        .sum();
    let m_jump = (q * sum_len2 / eps).ceil().max(1.0);
    let mut plan = Vec::with_capacity(omega.len());
    let mut strips = 0usize;
    for &i in omega {
        let r = &field.cells[i].rect;
        let len = match split.nu {
            Axis::X => r.width().to_f64(),
            Axis::Y => r.height().to_f64(),
        };
        let m_sup = (q * len / eps).ceil().max(1.0);
        let m = m_sup.max(m_jump) as u64;
        plan.push((i, m));
        strips += 2 * m as usize;
    }
    let total = field.cells.len() - omega.len() + strips;
    Ok((plan, total))
}

/// Replace the gradient `C` by the `{A, B}` laminate at volume fraction `λ`
/// on `ω = {∇u = C}`. The field is unchanged outside `ω`; the area fraction
/// is exact by integer period counts; sup and jump budgets are measured.
pub fn laminate_replace(
    field: &PAField,
    split: &RankOneSplit,
    eps: f64,
    caps: &Caps,
) -> Result<(PAField, LaminateStepReport), LaminateError> {
    let omega = matching_cells(field, split);
    laminate_replace_selected(field, split, eps, &omega, caps)
}

/// `laminate_replace` restricted to an explicit subset of the `∇ = C` cells;
/// the remaining cells (for instance clip margins of the continuous
/// pipeline) are left untouched.
pub fn laminate_replace_selected(
    field: &PAField,
    split: &RankOneSplit,
    eps: f64,
    omega_sel: &[usize],
    caps: &Caps,
) -> Result<(PAField, LaminateStepReport), LaminateError> {
    assert!(eps > 0.0, "ε must be positive");
    let (plan, total) = predict_periods_selected(field, split, eps, omega_sel)?;
    if total > caps.cell_cap {
        return Err(LaminateError::CellCap { required: total, cap: caps.cell_cap });
    }
    let before = strain_report(field).map_err(|e| LaminateError::Measure(e.to_string()))?;

    let in_omega: std::collections::HashSet<usize> = plan.iter().map(|(i, _)| *i).collect();
    let q = split.a.norm() * split.lambda.to_f64() * (1.0 - split.lambda.to_f64());
    let one_minus = &Rat::one() - &split.lambda;
    let nu_vec = match split.nu {
        Axis::X => Vec2::e1(),
        Axis::Y => Vec2::e2(),
    };
    let grad_up = split.a.outer(&nu_vec).scale(&one_minus); // added on A-strips
    let grad_down = split.a.outer(&nu_vec).scale(&split.lambda); // subtracted on B-strips

    let mut cells: Vec<PACell> = Vec::with_capacity(total);
    let mut report_cells = Vec::with_capacity(plan.len());
    let mut omega_area = Rat::zero();
    let mut a_area = Rat::zero();
    for (i, c) in field.cells.iter().enumerate() {
        if !in_omega.contains(&i) {
            cells.push(c.clone());
            continue;
        }
        let m = plan.iter().find(|(j, _)| *j == i).unwrap().1;
        omega_area = &omega_area + &c.rect.area();
        let r = &c.rect;
        let (lo, hi) = match split.nu {
            Axis::X => (r.x0.clone(), r.x1.clone()),
            Axis::Y => (r.y0.clone(), r.y1.clone()),
        };
        let len = &hi - &lo;
        let period = &len / &Rat::from_int(m as i64);
        let a_width = &period * &split.lambda;
        let sup_delta = q * period.to_f64();
        report_cells.push(CellLaminate {
            cell: i,
            periods: m,
            strips: 2 * m as usize,
            sup_delta,
            jump_delta_bound: sup_delta * len.to_f64(),
        });
        for idx in 0..m {
            let s0 = &lo + &(&period * &Rat::from_int(idx as i64));
            let s_mid = &s0 + &a_width;
            let s1 = &lo + &(&period * &Rat::from_int(idx as i64 + 1));
            // A-strip: ∇ = C + (1-λ) a⊗ν, value matched at s0
            let map_a = crate::fields::AffineMap::new(
                &c.map.a + &grad_up,
                &c.map.b - &split.a.scale(&(&one_minus * &s0)),
            );
            // B-strip: ∇ = C - λ a⊗ν, value matched at s1
            let map_b = crate::fields::AffineMap::new(
                &c.map.a - &grad_down,
                &c.map.b + &split.a.scale(&(&split.lambda * &s1)),
            );
            let (rect_a, rect_b) = match split.nu {
                Axis::X => (
                    Rect::new(s0, s_mid.clone(), r.y0.clone(), r.y1.clone()),
                    Rect::new(s_mid, s1, r.y0.clone(), r.y1.clone()),
                ),
                Axis::Y => (
                    Rect::new(r.x0.clone(), r.x1.clone(), s0, s_mid.clone()),
                    Rect::new(r.x0.clone(), r.x1.clone(), s_mid, s1),
                ),
            };
            a_area = &a_area + &rect_a.area();
            cells.push(PACell { rect: rect_a, map: map_a });
            cells.push(PACell { rect: rect_b, map: map_b });
        }
    }
    let mut out = PAField { domain: field.domain.clone(), cells };
    out.canonical_sort();
    out.validate(caps)?;

    let lambda_area_exact = a_area == &split.lambda * &omega_area;
    let measured_sup = report_cells.iter().map(|c| c.sup_delta).fold(0.0, f64::max);
    let after = strain_report(&out).map_err(|e| LaminateError::Measure(e.to_string()))?;
    let delta = after.jump_du.value - before.jump_du.value;
    let slack = after.jump_du.abs_error_bound + before.jump_du.abs_error_bound;
    let report = LaminateStepReport {
        eps,
        cells: report_cells,
        omega_area,
        lambda_area_exact,
        measured_sup_delta: measured_sup,
        measured_jump_du_before: before.jump_du.value,
        measured_jump_du_after: after.jump_du.value,
        measured_jump_delta: delta,
        sup_within_eps: measured_sup <= eps * (1.0 + 1e-12),
        jump_within_eps: delta <= eps + slack,
    };
    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::AffineMap;

    #[test]
    fn pencil_k0_matrices() {
        let p = pencil(0);
        assert_eq!(p.a_k, Mat2::ints(0, 1, 1, 0));
        assert_eq!(p.b_k, Mat2::ints(0, 1, -1, 0));
        assert_eq!(p.c_k, Mat2::ints(0, 1, 2, 0));
        assert!(p.check());
    }

    #[test]
    fn pencil_identities_up_to_20() {
        for k in 0..=20 {
            assert!(pencil(k).check(), "pencil identity failed at k = {}", k);
        }
    }

    #[test]
    fn pencil_k3_frobenius() {
        let p = pencil(3);
        assert!((p.b_k.frobenius() - 8.0 * 2.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn split_of_first_identity() {
        // A0 = (1/3) B0 + (2/3) C0: λ = 1/3, ν = e1, a = (0, -3)
        let s = pencil(0).first_split();
        assert_eq!(s.lambda, Rat::new(1, 3));
        assert_eq!(s.nu, Axis::X);
        assert_eq!(s.a, Vec2::ints(0, -3));
    }

    #[test]
    fn split_error_cases() {
        let id = Mat2::ints(1, 0, 0, 1);
        let z = Mat2::zero();
        assert!(matches!(rank_one_split(&z, &z, &z), Err(LaminateError::RankZero)));
        assert!(matches!(rank_one_split(&z, &id, &z), Err(LaminateError::RankTwo)));
        // non-axis: a ⊗ (e1 + e2) has two nonzero columns
        let d = Mat2::ints(1, 1, 0, 0);
        assert!(matches!(
            rank_one_split(&z, &d, &z),
            Err(LaminateError::NonAxisNormal)
        ));
        // λ = 1 degenerate: C = A = B + e1⊗e1
        let b = Mat2::zero();
        let a = Mat2::ints(1, 0, 0, 0);
        assert!(matches!(
            rank_one_split(&a, &a, &b),
            Err(LaminateError::LambdaOutOfRange(_))
        ));
    }

    #[test]
    fn sawtooth_shape() {
        let h = sawtooth(&Rat::new(1, 2), &Rat::one());
        assert_eq!(h.eval(&Rat::new(1, 2)), Rat::new(1, 4));
        assert_eq!(h.eval(&Rat::zero()), Rat::zero());
        assert_eq!(h.eval(&Rat::one()), Rat::zero());
        assert!(h.is_continuous());
        let h3 = sawtooth(&Rat::new(1, 3), &Rat::one());
        assert_eq!(h3.pieces[0].slope, Rat::new(2, 3));
        assert_eq!(h3.pieces[1].slope, Rat::new(-1, 3));
        // integral over the period: λ(1-λ)/2 · period
        assert_eq!(h3.integral(), Rat::new(1, 9));
    }

    #[test]
    fn replace_hits_volume_fraction_exactly() {
        // u = C0 x on Ω0 = [1/4,3/4]^2 inside the unit square padded by zero
        let caps = Caps::default();
        let q = Rat::new(1, 4);
        let tq = Rat::new(3, 4);
        let pen = pencil(0);
        let cells = vec![
            PACell {
                rect: Rect::new(Rat::zero(), q.clone(), Rat::zero(), Rat::one()),
                map: AffineMap::zero(),
            },
            PACell {
                rect: Rect::new(tq.clone(), Rat::one(), Rat::zero(), Rat::one()),
                map: AffineMap::zero(),
            },
            PACell {
                rect: Rect::new(q.clone(), tq.clone(), Rat::zero(), q.clone()),
                map: AffineMap::zero(),
            },
            PACell {
                rect: Rect::new(q.clone(), tq.clone(), tq.clone(), Rat::one()),
                map: AffineMap::zero(),
            },
            PACell {
                rect: Rect::new(q.clone(), tq.clone(), q.clone(), tq.clone()),
                map: AffineMap::linear(pen.c_k.clone()),
            },
        ];
        let field = PAField::new(Rect::unit(), cells, &caps).unwrap();
        // split C0 = (3/4) A1 + (1/4)(-B1)
        let split = pen.second_split();
        let (v, rep) = laminate_replace(&field, &split, 0.25, &caps).unwrap();
        assert!(rep.lambda_area_exact);
        // area with gradient A1 = (3/4)·(1/4) = 3/16
        let next = pencil(1);
        assert_eq!(v.area_with_gradient(&next.a_k), Rat::new(3, 16));
        assert!(rep.sup_within_eps);
        assert!(rep.jump_within_eps);
        // untouched outside ω
        assert_eq!(v.area_with_gradient(&Mat2::zero()), Rat::new(3, 4));
    }

    #[test]
    fn first_split_volume_fraction_on_quarter_domain() {
        // u = A_0 x on Ω_0 = [1/4,3/4]²: replacing A_0 = (1/3)B_0 + (2/3)C_0
        // leaves area({∇v = B_0}) = (1/3)·(1/4) = 1/12 exactly
        let caps = Caps::default();
        let pen = pencil(0);
        let q = Rat::new(1, 4);
        let tq = Rat::new(3, 4);
        let mut cells = vec![PACell {
            rect: Rect::new(q.clone(), tq.clone(), q.clone(), tq.clone()),
            map: AffineMap::linear(pen.a_k.clone()),
        }];
        for r in crate::fields::rect_subtract(
            &Rect::unit(),
            &[Rect::new(q.clone(), tq.clone(), q, tq)],
        ) {
            cells.push(PACell { rect: r, map: AffineMap::zero() });
        }
        let field = PAField::new(Rect::unit(), cells, &caps).unwrap();
        let split = pen.first_split();
        let (v, rep) = laminate_replace(&field, &split, 0.01, &caps).unwrap();
        assert!(rep.lambda_area_exact);
        assert_eq!(v.area_with_gradient(&pen.b_k), Rat::new(1, 12));
        assert_eq!(v.area_with_gradient(&pen.c_k), Rat::new(1, 6));
        assert!(rep.measured_sup_delta <= 0.01);
    }

    #[test]
    fn empty_omega_rejected() {
        let field = PAField::uniform(Rect::unit(), AffineMap::zero());
        let split = pencil(0).first_split();
        assert!(matches!(
            laminate_replace(&field, &split, 0.5, &Caps::default()),
            Err(LaminateError::EmptyOmega)
        ));
    }
}
