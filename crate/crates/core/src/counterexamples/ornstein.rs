//! The alternating laminate iteration: at step `k` replace the gradient
//! `A_k` by `{B_k, C_k}` strips at fraction 1/3, then the new `C_k` region
//! by `{A_{k+1}, -B_{k+1}}` strips at fraction 3/4. Areas halve exactly per
//! step; the bulk gradient gains `(2/3)·sqrt(2)·area(Ω_0)` per step.

use crate::fields::{Caps, PAField};
use crate::laminate::{
    laminate_replace, min_single_period_eps, pencil, LaminateError, LaminateStepReport,
};
use crate::measures::strain_report;
use crate::numeric::{Mat2, Rat};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OrnsteinError {
    #[error("no cell carries the gradient A_{0}: precondition violated")]
    MissingGradient(u32),
    #[error("step produced a cell with unexpected non-skew gradient")]
    NonSkewResidue,
    #[error("exact area identity violated at step {0}")]
    AreaIdentity(u32),
    #[error(transparent)]
    Laminate(#[from] LaminateError),
    #[error("measure failure: {0}")]
    Measure(String),
}

/// One row of the iteration ledger.
#[derive(Clone, Debug, Serialize)]
pub struct TraceRow {
    pub k: u32,
    /// exact area of `Ω_k` (cells with gradient `A_k`)
    pub area_omega: Rat,
    /// `∫_{Ω \ Ω_k} |∇u_k| dx`
    pub grad_l1: f64,
    pub grad_increment: f64,
    pub jump_du: f64,
    pub jump_increment: f64,
    pub cells: usize,
}

pub const TRACE_CSV_HEADER: &str =
    "k,area_omega,grad_l1,grad_increment,jump_du,jump_increment,cells";

pub fn trace_csv_row(r: &TraceRow) -> String {
    use crate::report::fmt_f64 as f;
    format!(
        "{},{},{},{},{},{},{}",
        r.k,
        r.area_omega.to_frac_string(),
        f(r.grad_l1),
        f(r.grad_increment),
        f(r.jump_du),
        f(r.jump_increment),
        r.cells
    )
}

/// Bulk gradient mass over cells whose gradient differs from `a`.
pub fn bulk_grad_off(field: &PAField, a: &Mat2) -> f64 {
    let mut s = 0.0;
    for c in &field.cells {
        if &c.map.a != a {
            s += c.map.a.frobenius() * c.rect.area().to_f64();
        }
    }
    s
}

#[derive(Clone, Debug, Serialize)]
pub struct StepReport {
    pub k: u32,
    pub eps_requested: f64,
    pub eps_used_first: f64,
    pub eps_used_second: f64,
    pub first: LaminateStepReport,
    pub second: LaminateStepReport,
    /// `area(Ω̂_k) = (2/3) area(Ω_k)` held exactly
    pub hat_area_exact: bool,
    /// `area(Ω_{k+1}) = (1/2) area(Ω_k)` held exactly
    pub half_area_exact: bool,
    /// every non-skew gradient off `Ω_{k+1}` vanished
    pub skew_off_omega: bool,
    pub area_omega_next: Rat,
}

/// One full iteration step `(u_k, Ω_k) -> (u_{k+1}, Ω_{k+1})`. Both lemma
/// applications use the budget `eps_k`; with `relax_to_single_period` the
/// per-call budget is raised to the single-period minimum when `eps_k`
/// cannot be met (the used budgets are reported).
pub fn ornstein_iterate(
    field: &PAField,
    k: u32,
    eps_k: f64,
    relax_to_single_period: bool,
    caps: &Caps,
) -> Result<(PAField, StepReport), OrnsteinError> {
    let pen = pencil(k);
    let area_k = field.area_with_gradient(&pen.a_k);
    if !area_k.is_positive() {
        return Err(OrnsteinError::MissingGradient(k));
    }
    let split1 = pen.first_split();
    let eps1 = if relax_to_single_period {
        eps_k.max(min_single_period_eps(field, &split1)?)
    } else {
        eps_k
    };
    let (hat, rep1) = laminate_replace(field, &split1, eps1, caps)?;
    let hat_area = hat.area_with_gradient(&pen.c_k);
    let hat_exact = hat_area == &Rat::new(2, 3) * &area_k;

    let split2 = pen.second_split();
    let eps2 = if relax_to_single_period {
        eps_k.max(min_single_period_eps(&hat, &split2)?)
    } else {
        eps_k
    };
    let (next, rep2) = laminate_replace(&hat, &split2, eps2, caps)?;
    let next_pen = pencil(k + 1);
    let next_area = next.area_with_gradient(&next_pen.a_k);
    let half_exact = next_area == &Rat::new(1, 2) * &area_k;
    if !(hat_exact && half_exact) {
        return Err(OrnsteinError::AreaIdentity(k));
    }
    // e(u_{k+1}) = 0 off Ω_{k+1}: every non-skew cell carries A_{k+1}
    let skew_off = next
        .cells
        .iter()
        .all(|c| c.map.a.is_skew() || c.map.a == next_pen.a_k);
    if !skew_off {
        return Err(OrnsteinError::NonSkewResidue);
    }
    Ok((
        next,
        StepReport {
            k,
            eps_requested: eps_k,
            eps_used_first: eps1,
            eps_used_second: eps2,
            first: rep1,
            second: rep2,
            hat_area_exact: hat_exact,
            half_area_exact: half_exact,
            skew_off_omega: skew_off,
            area_omega_next: next_area,
        },
    ))
}

/// Outcome of running the iteration for several steps.
pub struct IterationOutcome {
    pub field: PAField,
    pub rows: Vec<TraceRow>,
    pub steps: Vec<StepReport>,
}

/// Run `k_max` steps from an initial field, collecting the trace. The trace
/// row for state `k` reports `Ω_k`'s exact area, the bulk gradient off
/// `Ω_k`, and the cumulative jump integral.
pub fn run_iteration(
    initial: PAField,
    k_max: u32,
    eps_schedule: impl Fn(u32) -> f64,
    relax_to_single_period: bool,
    caps: &Caps,
) -> Result<IterationOutcome, OrnsteinError> {
    let mut field = initial;
    let mut rows = Vec::with_capacity(k_max as usize + 1);
    let mut steps = Vec::with_capacity(k_max as usize);
    let report0 = strain_report(&field).map_err(|e| OrnsteinError::Measure(e.to_string()))?;
    let pen0 = pencil(0);
    rows.push(TraceRow {
        k: 0,
        area_omega: field.area_with_gradient(&pen0.a_k),
        grad_l1: bulk_grad_off(&field, &pen0.a_k),
        grad_increment: 0.0,
        jump_du: report0.jump_du.value,
        jump_increment: 0.0,
        cells: field.cells.len(),
    });
    for k in 0..k_max {
        let (next, step) =
            ornstein_iterate(&field, k, eps_schedule(k), relax_to_single_period, caps)?;
        field = next;
        let pen_next = pencil(k + 1);
        let grad_now = bulk_grad_off(&field, &pen_next.a_k);
        let prev = rows.last().unwrap();
        let jump_now = step.second.measured_jump_du_after;
        rows.push(TraceRow {
            k: k + 1,
            area_omega: step.area_omega_next.clone(),
            grad_l1: grad_now,
            grad_increment: grad_now - prev.grad_l1,
            jump_du: jump_now,
            jump_increment: jump_now - prev.jump_du,
            cells: field.cells.len(),
        });
        steps.push(step);
    }
    Ok(IterationOutcome { field, rows, steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counterexamples::pure_jump::initial_field;
    use crate::fields::Rect;

    #[test]
    fn first_step_identities() {
        let caps = Caps::default();
        let omega0 = Rect::new(Rat::new(1, 4), Rat::new(3, 4), Rat::new(1, 4), Rat::new(3, 4));
        let f0 = initial_field(&omega0, &caps).unwrap();
        let (f1, step) = ornstein_iterate(&f0, 0, 1.0, false, &caps).unwrap();
        assert!(step.hat_area_exact && step.half_area_exact && step.skew_off_omega);
        assert_eq!(step.area_omega_next, Rat::new(1, 8));
        // gradient increment = (2/3)·sqrt(2)·(1/4)
        let pen1 = pencil(1);
        let g1 = bulk_grad_off(&f1, &pen1.a_k);
        let g0 = bulk_grad_off(&f0, &pencil(0).a_k);
        let expect = 2.0 / 3.0 * 2.0f64.sqrt() * 0.25;
        assert!(
            ((g1 - g0) - expect).abs() <= 1e-9 * expect,
            "increment {} vs {}",
            g1 - g0,
            expect
        );
    }
}
