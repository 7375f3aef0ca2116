//! Numerical embodiments of the two self-contained fine-property lemmas:
//! the multiscale density functional with its L^p tail bound and divergent
//! counterexample, and the affine-recovery inequality on balls with a
//! quarter-area excluded set. This module is float-quadrature based, unlike
//! the exact core: the claims checked here are inequalities with slack.

use crate::numeric::{gauss_1d_certified, seg_norm_integral, NormIntegral};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FinePropsError {
    #[error("quadrature failed at scale k = {k}: {msg}")]
    Quadrature { k: u32, msg: String },
    #[error("degenerate trial: |φ| below 1e-12 on B \\ ω")]
    DegenerateTrial,
    #[error("ω must not exceed a quarter of the ball")]
    OmegaTooLarge,
}

/// Built-in integrand samplers for the density probe.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProbeKind {
    Constant(f64),
    /// smooth radial plateau: 1 for |x| <= 3/2, cosine taper to 0 at |x| = 2
    Bump,
    /// `χ_{B_{1/2}}(x) / (|x_2| ln²(1/|x_2|))`, singular on the hyperplane
    Remark,
}

#[derive(Clone, Debug)]
pub struct DensityProbe {
    pub kind: ProbeKind,
    /// probe point (ball centers)
    pub center: (f64, f64),
    pub k_max: u32,
}

fn bump_radial(s: f64) -> f64 {
    if s <= 1.5 {
        1.0
    } else if s >= 2.0 {
        0.0
    } else {
        0.5 * (1.0 + (PI * (s - 1.5) / 0.5).cos())
    }
}

/// `∫_{B_r(x)} |f| dy` for the probe integrand, certified.
pub fn ball_integral(kind: ProbeKind, center: (f64, f64), r: f64, k: u32) -> Result<NormIntegral, FinePropsError> {
    match kind {
        ProbeKind::Constant(c) => Ok(NormIntegral::closed_form(c.abs() * PI * r * r)),
        ProbeKind::Bump => {
            // slices in x1: inner integral of the radial profile over x2
            let f = |x1: f64| {
                let w = (r * r - (x1 - center.0) * (x1 - center.0)).max(0.0).sqrt();
                let inner = |x2: f64| bump_radial(x2.hypot(x1));
                // 1-D Gauss on the chord
                crate::numeric::gauss_1d(&inner, center.1 - w, center.1 + w, 24)
            };
            gauss_1d_certified(&f, center.0 - r, center.0 + r, 32)
                .map_err(|e| FinePropsError::Quadrature { k, msg: e.to_string() })
        }
        ProbeKind::Remark => {
            // probe on the hyperplane {x2 = 0}; for r <= 1/2 and center at the
            // origin the ball stays inside the support.
            assert!(
                center.1 == 0.0,
                "the singular probe is defined on the hyperplane x2 = 0"
            );
            assert!(r <= 0.5, "ball must stay inside the support B_{{1/2}}");
            assert!(
                center.0.abs() + r <= 0.5 + 1e-15,
                "ball must stay inside the support B_{{1/2}}"
            );
            // ∫ = 2 ∫_0^r width(y) / (y ln²(1/y)) dy with width = 2 sqrt(r²-y²)
            // substitution u = 1/ln(1/y), y = e^{-1/u}: the singular factor
            // integrates exactly to du
            let u_max = 1.0 / (1.0 / r).ln();
            let f = |u: f64| {
                if u <= 0.0 {
                    return 2.0 * r;
                }
                let y = (-1.0 / u).exp();
                2.0 * (r * r - y * y).max(0.0).sqrt()
            };
            let v = gauss_1d_certified(&f, 0.0, u_max, 48)
                .map_err(|e| FinePropsError::Quadrature { k, msg: e.to_string() })?;
            Ok(v.scale(2.0))
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityRow {
    pub k: u32,
    pub r_k: f64,
    pub term: NormIntegral,
    pub partial: NormIntegral,
}

/// Partial sums `S_K = Σ_{k<=K} r_k^{1-n} ∫_{B_{r_k}(x)} |f| dy` with
/// `r_k = 2^{-k}`, `n = 2`.
pub fn density_partial_sums(probe: &DensityProbe) -> Result<Vec<DensityRow>, FinePropsError> {
    let mut rows = Vec::with_capacity(probe.k_max as usize);
    let mut partial = NormIntegral::zero();
    for k in 1..=probe.k_max {
        let r = (0.5f64).powi(k as i32);
        let term = ball_integral(probe.kind, probe.center, r, k)?.scale(1.0 / r);
        partial = partial.add(&term);
        rows.push(DensityRow { k, r_k: r, term, partial });
    }
    Ok(rows)
}

/// `L^4` norm of the bump integrand (radial closed quadrature), used for the
/// tail-bound comparison.
pub fn bump_lp_norm(p: f64) -> f64 {
    let f = |s: f64| 2.0 * PI * s * bump_radial(s).powf(p);
    crate::numeric::gauss_1d(&f, 0.0, 2.0, 64).powf(1.0 / p)
}

#[derive(Clone, Debug, Serialize)]
pub struct TailBound {
    pub p: f64,
    pub n: u32,
    pub norm_f_p: f64,
    pub k_max: u32,
    /// `‖f‖_p Σ_{k=0}^{K-1} 2^{k(n-p)/p}`
    pub partial: f64,
    /// closed form of the full series when p > n
    pub limit: Option<f64>,
    pub diverges: bool,
}

/// Geometric tail bound `‖f‖_p Σ_k 2^{k(n-p)/p}`; finite exactly when
/// `p > n`.
pub fn lp_tail_bound(norm_f_p: f64, p: f64, n: u32, k_max: u32) -> TailBound {
    assert!(p >= 1.0);
    let rho = (2.0f64).powf((n as f64 - p) / p);
    let partial = if (rho - 1.0).abs() < 1e-15 {
        norm_f_p * k_max as f64
    } else {
        norm_f_p * (1.0 - rho.powi(k_max as i32)) / (1.0 - rho)
    };
    let diverges = p <= n as f64;
    TailBound {
        p,
        n,
        norm_f_p,
        k_max,
        partial,
        limit: if diverges { None } else { Some(norm_f_p / (1.0 - rho)) },
        diverges,
    }
}

/// Excluded-set geometry for one affine-recovery trial.
#[derive(Clone, Debug)]
pub enum OmegaShape {
    /// half-plane cap `{e(θ)·(x - y) > t}` of exactly a quarter ball area
    Cap { theta: f64 },
    /// disjoint axis-aligned rectangles inside the ball, areas summing to a
    /// quarter ball area
    Rects(Vec<[f64; 4]>),
}

#[derive(Clone, Debug)]
pub struct AffineRecoveryTrial {
    pub center: (f64, f64),
    pub radius: f64,
    pub omega: OmegaShape,
    /// affine map φ(x) = M x + q (row major M)
    pub m: [[f64; 2]; 2],
    pub q: [f64; 2],
}

/// Cap height `t` with segment area exactly a quarter of the disk:
/// `ρ² acos(t/ρ) - t sqrt(ρ² - t²) = π ρ² / 4` (bisection to 1e-15).
pub fn quarter_cap_height(radius: f64) -> f64 {
    let target = PI * radius * radius / 4.0;
    let area = |t: f64| radius * radius * (t / radius).acos() - t * (radius * radius - t * t).sqrt();
    let mut lo = 0.0;
    let mut hi = radius;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if area(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `∫ |φ| dx` over `{x1 in [a, b]} ∩ B_ρ(y)` by exact inner segment
/// integrals and certified outer quadrature. The substitution
/// `x1 = y1 + ρ sin θ` removes the square-root endpoint singularity, so the
/// outer rule converges spectrally.
fn slab_integral(
    trial_m: [[f64; 2]; 2],
    trial_q: [f64; 2],
    center: (f64, f64),
    radius: f64,
    a: f64,
    b: f64,
) -> Result<NormIntegral, FinePropsError> {
    if b <= a {
        return Ok(NormIntegral::zero());
    }
    let clamp = |x: f64| ((x - center.0) / radius).clamp(-1.0, 1.0);
    let ta = clamp(a).asin();
    let tb = clamp(b).asin();
    if tb <= ta {
        return Ok(NormIntegral::zero());
    }
    let f = |theta: f64| {
        let w = radius * theta.cos();
        if w <= 0.0 {
            return 0.0;
        }
        let x1 = center.0 + radius * theta.sin();
        let y0 = center.1 - w;
        // φ along the chord: p + t q, t in [0, 2w]
        let p = (
            trial_m[0][0] * x1 + trial_m[0][1] * y0 + trial_q[0],
            trial_m[1][0] * x1 + trial_m[1][1] * y0 + trial_q[1],
        );
        let q = (trial_m[0][1], trial_m[1][1]);
        let inner = seg_norm_integral(p, q, 2.0 * w).map(|v| v.value).unwrap_or(0.0);
        inner * w // dx1 = ρ cos θ dθ = w dθ
    };
    gauss_1d_certified(&f, ta, tb, 48)
        .map_err(|e| FinePropsError::Quadrature { k: 0, msg: e.to_string() })
}

/// `∫_rect |φ| dx` (exact inner, certified outer).
fn rect_integral(
    trial_m: [[f64; 2]; 2],
    trial_q: [f64; 2],
    r: &[f64; 4],
) -> Result<NormIntegral, FinePropsError> {
    let f = |x1: f64| {
        let p = (
            trial_m[0][0] * x1 + trial_m[0][1] * r[2] + trial_q[0],
            trial_m[1][0] * x1 + trial_m[1][1] * r[2] + trial_q[1],
        );
        let q = (trial_m[0][1], trial_m[1][1]);
        seg_norm_integral(p, q, r[3] - r[2]).map(|v| v.value).unwrap_or(0.0)
    };
    gauss_1d_certified(&f, r[0], r[1], 32)
        .map_err(|e| FinePropsError::Quadrature { k: 0, msg: e.to_string() })
}

/// `‖φ‖_{L∞(B)}`: dense boundary sampling plus golden-section refinement
/// (the max of |affine| over a disk is attained on the boundary circle).
fn sup_on_ball(m: [[f64; 2]; 2], q: [f64; 2], center: (f64, f64), radius: f64) -> f64 {
    let val = |theta: f64| {
        let x = center.0 + radius * theta.cos();
        let y = center.1 + radius * theta.sin();
        let u = m[0][0] * x + m[0][1] * y + q[0];
        let v = m[1][0] * x + m[1][1] * y + q[1];
        u.hypot(v)
    };
    let n = 2048;
    let mut best = 0.0f64;
    let mut best_t = 0.0f64;
    for i in 0..n {
        let t = 2.0 * PI * i as f64 / n as f64;
        let v = val(t);
        if v > best {
            best = v;
            best_t = t;
        }
    }
    // golden-section refine around the best sample
    let gr = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut a = best_t - 2.0 * PI / n as f64;
    let mut b = best_t + 2.0 * PI / n as f64;
    for _ in 0..80 {
        let c = b - gr * (b - a);
        let d = a + gr * (b - a);
        if val(c) > val(d) {
            b = d;
        } else {
            a = c;
        }
    }
    best.max(val(0.5 * (a + b)))
}

/// `L²(B) ‖φ‖_{L∞(B)} / ‖φ‖_{L¹(B ∖ ω)}`.
pub fn affine_recovery_ratio(trial: &AffineRecoveryTrial) -> Result<f64, FinePropsError> {
    let (y, rho) = (trial.center, trial.radius);
    let ball_area = PI * rho * rho;
    let sup = sup_on_ball(trial.m, trial.q, y, rho);
    let l1 = match &trial.omega {
        OmegaShape::Cap { theta } => {
            // rotate so the cap normal is +x1; the ball is invariant, so in
            // the rotated recentered frame M' = M·R(θ) and φ'(x') = M'x' + φ(y)
            let t = quarter_cap_height(rho);
            let c = theta.cos();
            let s = theta.sin();
            let mp = [
                [trial.m[0][0] * c + trial.m[0][1] * s, -trial.m[0][0] * s + trial.m[0][1] * c],
                [trial.m[1][0] * c + trial.m[1][1] * s, -trial.m[1][0] * s + trial.m[1][1] * c],
            ];
            let qp = [
                trial.m[0][0] * y.0 + trial.m[0][1] * y.1 + trial.q[0],
                trial.m[1][0] * y.0 + trial.m[1][1] * y.1 + trial.q[1],
            ];
            slab_integral(mp, qp, (0.0, 0.0), rho, -rho, t)?
        }
        OmegaShape::Rects(rects) => {
            let total = slab_integral(trial.m, trial.q, y, rho, y.0 - rho, y.0 + rho)?;
            let mut acc = total;
            for r in rects {
                let v = rect_integral(trial.m, trial.q, r)?;
                acc = NormIntegral::with_bound(acc.value - v.value, acc.abs_error_bound + v.abs_error_bound);
            }
            acc
        }
    };
    if l1.value <= 1e-12 {
        return Err(FinePropsError::DegenerateTrial);
    }
    Ok(ball_area * sup / l1.value)
}

/// The proof-chain constant: `2·(8·sqrt(n)/δ*) + 4/3` where `δ*` solves
/// `L(B ∩ (B + δ e)) = (3/4) L(B)` on the unit disk.
pub fn proof_chain_constant() -> f64 {
    let overlap = |d: f64| 2.0 * (d / 2.0).acos() - (d / 2.0) * (4.0 - d * d).sqrt();
    let target = 0.75 * PI;
    let mut lo = 0.0;
    let mut hi = 2.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if overlap(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let delta = 0.5 * (lo + hi);
    2.0 * 8.0 * 2.0f64.sqrt() / delta + 4.0 / 3.0
}

/// Seeded trial generator: alternates caps and rectangle unions, with the
/// excluded area pinned to a quarter of the ball (to machine accuracy).
pub fn random_trial(seed: u64) -> AffineRecoveryTrial {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radius = rng.gen_range(0.5..2.0);
    let center = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let m = [
        [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
        [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
    ];
    let q = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
    let omega = if seed % 2 == 0 {
        OmegaShape::Cap { theta: rng.gen_range(0.0..2.0 * PI) }
    } else {
        // up to 3 disjoint rectangles in the inscribed square, the last one
        // sized to hit the quarter area exactly
        let target = PI * radius * radius / 4.0;
        let half = radius / 2.0f64.sqrt() * 0.95;
        let nx: usize = rng.gen_range(2..=3);
        let mut rects: Vec<[f64; 4]> = Vec::new();
        let slot_w = 2.0 * half / nx as f64;
        let mut remaining = target;
        for i in 0..nx {
            let x0 = center.0 - half + i as f64 * slot_w + 0.05 * slot_w;
            let w = slot_w * 0.9;
            let h = if i + 1 == nx {
                remaining / w
            } else {
                let frac = rng.gen_range(0.2..0.5);
                (target * frac / w).min(1.8 * half)
            };
            let y0 = center.1 - h / 2.0;
            rects.push([x0, x0 + w, y0, y0 + h]);
            remaining -= w * h;
        }
        OmegaShape::Rects(rects)
    };
    AffineRecoveryTrial { center, radius, omega, m, q }
}

pub fn omega_area(trial: &AffineRecoveryTrial) -> f64 {
    match &trial.omega {
        OmegaShape::Cap { .. } => {
            let t = quarter_cap_height(trial.radius);
            let rho = trial.radius;
            rho * rho * (t / rho).acos() - t * (rho * rho - t * t).sqrt()
        }
        OmegaShape::Rects(rects) => rects.iter().map(|r| (r[1] - r[0]) * (r[3] - r[2])).sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_probe_terms() {
        let probe = DensityProbe { kind: ProbeKind::Constant(1.0), center: (0.0, 0.0), k_max: 16 };
        let rows = density_partial_sums(&probe).unwrap();
        // term_k = π r_k; partial = π (1 - 2^{-K})
        for row in &rows {
            let expect = PI * row.r_k;
            assert!((row.term.value - expect).abs() <= 1e-13);
        }
        let last = rows.last().unwrap();
        let expect = PI * (1.0 - (0.5f64).powi(16));
        assert!((last.partial.value - expect).abs() <= 1e-12);
    }

    #[test]
    fn zero_probe() {
        let probe = DensityProbe { kind: ProbeKind::Constant(0.0), center: (0.0, 0.0), k_max: 8 };
        let rows = density_partial_sums(&probe).unwrap();
        assert!(rows.iter().all(|r| r.partial.value == 0.0));
    }

    #[test]
    fn tail_bound_cases() {
        let t = lp_tail_bound(1.0, 4.0, 2, 64);
        assert!((t.limit.unwrap() - 1.0 / (1.0 - 0.5f64.sqrt())).abs() < 1e-12);
        assert!(!t.diverges);
        let z = lp_tail_bound(0.0, 4.0, 2, 8);
        assert_eq!(z.partial, 0.0);
        let d = lp_tail_bound(1.0, 2.0, 2, 8);
        assert!(d.diverges);
        assert!((d.partial - 8.0).abs() < 1e-12);
    }

    #[test]
    fn ratio_of_constant_without_omega_is_one() {
        // ω = ∅ is modelled by an empty rect list (area slack is allowed
        // downward; the inequality only caps ω from above)
        let trial = AffineRecoveryTrial {
            center: (0.3, -0.2),
            radius: 1.2,
            omega: OmegaShape::Rects(vec![]),
            m: [[0.0, 0.0], [0.0, 0.0]],
            q: [2.0, 0.0],
        };
        let r = affine_recovery_ratio(&trial).unwrap();
        assert!((r - 1.0).abs() < 1e-10, "ratio {}", r);
    }

    #[test]
    fn quarter_cap_area_is_exact() {
        for rho in [0.5, 1.0, 1.7] {
            let t = quarter_cap_height(rho);
            let area = rho * rho * (t / rho).acos() - t * (rho * rho - t * t).sqrt();
            assert!((area - PI * rho * rho / 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn scale_invariance() {
        let trial = random_trial(42);
        let r1 = affine_recovery_ratio(&trial).unwrap();
        let mut scaled = trial.clone();
        for i in 0..2 {
            for j in 0..2 {
                scaled.m[i][j] *= 7.5;
            }
            scaled.q[i] *= 7.5;
        }
        let r2 = affine_recovery_ratio(&scaled).unwrap();
        assert!((r1 - r2).abs() <= 1e-12 * r1.max(1.0), "{} vs {}", r1, r2);
    }

    #[test]
    fn proof_chain_constant_value() {
        let c = proof_chain_constant();
        assert!(c > 50.0 && c < 70.0, "c = {}", c);
    }
}
