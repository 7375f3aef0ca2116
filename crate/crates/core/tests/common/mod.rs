//! Independent oracles for the integration tests. Everything here is
//! deliberately written with different algorithms than the library
//! (adaptive Simpson instead of Gauss-Legendre, brute-force loops instead
//! of sweeps) so the checks do not share an implementation path.

#![allow(dead_code)]

use bdforge::fields::Rect;
use bdforge::numeric::Rat;

/// Adaptive Simpson quadrature, tolerance-driven.
pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson_rule(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fa = f(a);
        let fm = f(m);
        let fb = f(b);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), fa, fm, fb)
    }
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        whole: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            rec(f, a, m, left, fa, flm, fm, tol / 2.0, depth - 1)
                + rec(f, m, b, right, fm, frm, fb, tol / 2.0, depth - 1)
        }
    }
    let (whole, fa, fm, fb) = simpson_rule(f, a, b);
    rec(f, a, b, whole, fa, fm, fb, tol, 40)
}

/// Brute-force overlay of two rectangle families: every positive-area
/// intersection by a double loop.
pub fn brute_force_overlay(a: &[Rect], b: &[Rect]) -> Vec<(Rect, usize, usize)> {
    let mut out = Vec::new();
    for (i, ra) in a.iter().enumerate() {
        for (j, rb) in b.iter().enumerate() {
            if let Some(r) = ra.intersect(rb) {
                out.push((r, i, j));
            }
        }
    }
    out
}

/// Least-squares slope of `y` against `x`.
pub fn regression_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(n, d)
}

/// `(2/3)^m` as an exact rational.
pub fn two_thirds_pow(m: u32) -> Rat {
    let mut r = Rat::one();
    for _ in 0..m {
        r = &r * &Rat::new(2, 3);
    }
    r
}
