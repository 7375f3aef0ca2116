//! Closed-form partial sums for the disjoint-balls field
//! `u = Σ_k d_k A (x - x_k) χ_{B_k}`, `d_k = 2^{nk}/k²`, `r_k = 2^{-k}`,
//! `A` the elementary rotation generator. Purely analytic: geometry never
//! enters, only exact series terms.

use crate::numeric::Rat;
use serde::Serialize;

#[derive(Clone, Debug)]
pub struct BallsSpec {
    /// ambient dimension (analytic parameter)
    pub n: u32,
    /// truncation index
    pub k_max: u32,
    /// integrability exponent for the gradient scan
    pub q: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BallsRow {
    pub k: u32,
    pub r_k: Rat,
    pub d_k: Rat,
    /// surface measure of the sphere of radius r_k
    pub h1_term: f64,
    pub h1_partial: f64,
    /// `sqrt(2)·d_k·vol(B_{r_k})`
    pub grad_term: f64,
    pub grad_partial: f64,
    /// `(sqrt(2)·d_k)^q·vol(B_{r_k})`
    pub gradq_term: f64,
    pub gradq_partial: f64,
    /// ratio `t_{k+1}/t_k` of consecutive q-scan terms (filled for k >= 2)
    pub gradq_ratio: f64,
    /// `d_k r_k`, the per-ball sup of |u|
    pub sup_term: f64,
    pub sup_running_max: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BallsReport {
    pub n: u32,
    pub q: f64,
    pub rows: Vec<BallsRow>,
    /// limit of the q-term ratio, `2^{n(q-1)}`
    pub ratio_limit: f64,
    /// partial sums of the jump measure converge (geometric series)
    pub h1_limit: f64,
    /// `sup_k d_k r_k` grows without bound for n >= 2: the stated
    /// boundedness of the field fails and is flagged rather than asserted
    pub sup_unbounded_flag: bool,
}

fn unit_ball_volume(n: u32) -> f64 {
    // V_n = π^{n/2} / Γ(n/2 + 1)
    let half = n as f64 / 2.0;
    std::f64::consts::PI.powf(half) / gamma(half + 1.0)
}

fn unit_sphere_area(n: u32) -> f64 {
    // surface of the unit sphere in R^n: n·V_n
    n as f64 * unit_ball_volume(n)
}

/// Lanczos approximation, |error| < 1e-13 on the arguments used here.
fn gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut a = C[0];
        let t = x + G + 0.5;
        for (i, c) in C.iter().enumerate().skip(1) {
            a += c / (x + i as f64);
        }
        (2.0 * std::f64::consts::PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
    }
}

/// Exact-rational `d_k`, `r_k` with closed-form constants; all series terms
/// are products of a rational and a dimensional constant.
pub fn balls_partial(spec: &BallsSpec) -> BallsReport {
    assert!(spec.k_max >= 1 && spec.q >= 1.0 && spec.n >= 2);
    let vol = unit_ball_volume(spec.n);
    let surf = unit_sphere_area(spec.n);
    let sqrt2 = 2.0f64.sqrt();
    let mut rows: Vec<BallsRow> = Vec::with_capacity(spec.k_max as usize);
    let mut h1 = 0.0;
    let mut grad = 0.0;
    let mut gradq = 0.0;
    let mut sup = 0.0f64;
    for k in 1..=spec.k_max {
        let r_k = Rat::pow2(-(k as i32));
        let d_k = &Rat::pow2((spec.n * k) as i32) / &Rat::from_int((k as i64) * (k as i64));
        let rf = r_k.to_f64();
        let df = d_k.to_f64();
        let h1_term = surf * rf.powi(spec.n as i32 - 1);
        let grad_term = sqrt2 * df * vol * rf.powi(spec.n as i32);
        let gradq_term = (sqrt2 * df).powf(spec.q) * vol * rf.powi(spec.n as i32);
        let sup_term = df * rf;
        h1 += h1_term;
        grad += grad_term;
        gradq += gradq_term;
        sup = sup.max(sup_term);
        let ratio = if let Some(prev) = rows.last() {
            gradq_term / prev.gradq_term
        } else {
            f64::NAN
        };
        rows.push(BallsRow {
            k,
            r_k,
            d_k,
            h1_term,
            h1_partial: h1,
            grad_term,
            grad_partial: grad,
            gradq_term,
            gradq_partial: gradq,
            gradq_ratio: ratio,
            sup_term,
            sup_running_max: sup,
        });
    }
    BallsReport {
        n: spec.n,
        q: spec.q,
        rows,
        ratio_limit: (2.0f64).powf(spec.n as f64 * (spec.q - 1.0)),
        h1_limit: surf,
        sup_unbounded_flag: spec.n >= 2,
    }
}

pub const BALLS_CSV_HEADER: &str =
    "k,r_k,d_k,h1_term,h1_partial,grad_term,grad_partial,gradq_term,gradq_partial,gradq_ratio,sup_term,sup_running_max";

pub fn balls_csv_row(r: &BallsRow) -> String {
    use crate::report::fmt_f64 as f;
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        r.k,
        r.r_k.to_frac_string(),
        r.d_k.to_frac_string(),
        f(r.h1_term),
        f(r.h1_partial),
        f(r.grad_term),
        f(r.grad_partial),
        f(r.gradq_term),
        f(r.gradq_partial),
        if r.gradq_ratio.is_nan() { "nan".into() } else { f(r.gradq_ratio) },
        f(r.sup_term),
        f(r.sup_running_max)
    )
}
