//! Certified norm integrals: closed forms for segment integrals of
//! `sqrt(quadratic)` and tensor Gauss-Legendre quadrature with an
//! order-doubling error estimate.

use super::rat::Rat;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A floating-point integral value together with a bound on its absolute error.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct NormIntegral {
    pub value: f64,
    pub abs_error_bound: f64,
}

impl NormIntegral {
    pub fn zero() -> Self {
        NormIntegral { value: 0.0, abs_error_bound: 0.0 }
    }

    /// Closed-form evaluation: error is pure floating-point roundoff.
    pub fn closed_form(value: f64) -> Self {
        NormIntegral { value, abs_error_bound: 1e-14 * (1.0 + value.abs()) }
    }

    pub fn with_bound(value: f64, abs_error_bound: f64) -> Self {
        NormIntegral { value, abs_error_bound }
    }

    pub fn add(&self, o: &NormIntegral) -> NormIntegral {
        NormIntegral {
            value: self.value + o.value,
            abs_error_bound: self.abs_error_bound + o.abs_error_bound
                + f64::EPSILON * (self.value.abs() + o.value.abs()),
        }
    }

    pub fn scale(&self, s: f64) -> NormIntegral {
        NormIntegral {
            value: self.value * s,
            abs_error_bound: self.abs_error_bound * s.abs()
                + f64::EPSILON * (self.value * s).abs(),
        }
    }

    pub fn sum<I: IntoIterator<Item = NormIntegral>>(items: I) -> NormIntegral {
        items.into_iter().fold(NormIntegral::zero(), |a, b| a.add(&b))
    }
}

#[derive(Debug, Error)]
pub enum QuadError {
    #[error("non-finite input to norm integral")]
    NonFinite,
    #[error("quadrature order {0} outside [2, 64]")]
    BadOrder(usize),
    #[error("empty rectangle for quadrature")]
    EmptyRect,
}

/// Antiderivative-based evaluation of `∫_0^L sqrt(a t^2 + b t + c) dt`
/// where the quadratic is nonnegative on `[0, L]` (it always is for norm
/// integrands; tiny negative values from roundoff are clamped).
pub fn sqrt_quadratic_integral(a: f64, b: f64, c: f64, l: f64) -> Result<NormIntegral, QuadError> {
    if !(a.is_finite() && b.is_finite() && c.is_finite() && l.is_finite()) {
        return Err(QuadError::NonFinite);
    }
    if l == 0.0 {
        return Ok(NormIntegral::zero());
    }
    if a == 0.0 {
        // integrand sqrt(b t + c): affine under the root
        if b == 0.0 {
            let v = c.max(0.0).sqrt() * l;
            return Ok(NormIntegral::closed_form(v));
        }
        let f = |t: f64| {
            let u = (b * t + c).max(0.0);
            2.0 / (3.0 * b) * u.powf(1.5)
        };
        return Ok(NormIntegral::closed_form(f(l) - f(0.0)));
    }
    // a > 0 for norm integrands
    let t0 = -b / (2.0 * a); // vertex
    let m = (c - b * b / (4.0 * a)).max(0.0); // minimum value of the quadratic
    let sa = a.sqrt();
    // antiderivative F(s) of sqrt(a s^2 + m), s measured from the vertex
    let scale = (a.abs().max(m.abs()).max(1.0)) * f64::EPSILON;
    let degenerate = m <= 16.0 * scale;
    let f = |s: f64| -> f64 {
        if degenerate {
            // sqrt(a)|s| has antiderivative sqrt(a) s|s|/2
            sa * s * s.abs() / 2.0
        } else {
            let root = (a * s * s + m).sqrt();
            let arg = s * (a / m).sqrt();
            if arg.is_finite() {
                s / 2.0 * root + m / (2.0 * sa) * arg.asinh()
            } else {
                // overflow guard: asinh(x) ~ sign(x) ln(2|x|)
                let ln_term = (2.0 * s.abs()).ln() + 0.5 * (a / m).ln();
                s / 2.0 * root + m / (2.0 * sa) * ln_term.copysign(s)
            }
        }
    };
    let v = f(l - t0) - f(-t0);
    let mut bound = 1e-14 * (1.0 + v.abs());
    if degenerate {
        // |sqrt(q) - sqrt(a) |s|| <= sqrt(m)
        bound += m.sqrt() * l.abs();
    }
    Ok(NormIntegral::with_bound(v.max(0.0), bound))
}

/// `∫_0^L |p + t q| dt` for real 2-vectors, exact antiderivative.
pub fn seg_norm_integral(p: (f64, f64), q: (f64, f64), l: f64) -> Result<NormIntegral, QuadError> {
    if !(p.0.is_finite() && p.1.is_finite() && q.0.is_finite() && q.1.is_finite() && l.is_finite())
    {
        return Err(QuadError::NonFinite);
    }
    if l <= 0.0 {
        return Err(QuadError::NonFinite);
    }
    let a = q.0 * q.0 + q.1 * q.1;
    let b = 2.0 * (p.0 * q.0 + p.1 * q.1);
    let c = p.0 * p.0 + p.1 * p.1;
    sqrt_quadratic_integral(a, b, c, l)
}

/// Gauss-Legendre nodes and weights on [-1, 1], Newton iteration on the
/// Legendre recurrence.
pub fn legendre_rule(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    let mut out = Vec::with_capacity(n);
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j as f64 + 1.0) * x * p1 - j as f64 * p2) / (j as f64 + 1.0);
            }
            pp = n as f64 * (x * p0 - p1) / (x * x - 1.0);
            let dx = p0 / pp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * pp * pp);
        out.push((-x, w));
        if i != n - 1 - i {
            out.push((x, w));
        }
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    // pin the weight sum to 2 exactly so constants integrate exactly
    let sum: f64 = out.iter().map(|(_, w)| w).sum();
    let scale = 2.0 / sum;
    for p in &mut out {
        p.1 *= scale;
    }
    out
}

/// 1-D Gauss-Legendre on [a, b].
pub fn gauss_1d(f: &dyn Fn(f64) -> f64, a: f64, b: f64, order: usize) -> f64 {
    let rule = legendre_rule(order);
    let h = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut s = 0.0;
    for (x, w) in rule {
        s += w * f(mid + h * x);
    }
    s * h
}

/// 1-D quadrature with order-doubling error estimate.
pub fn gauss_1d_certified(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    order: usize,
) -> Result<NormIntegral, QuadError> {
    if !(2..=64).contains(&order) {
        return Err(QuadError::BadOrder(order));
    }
    if !(a.is_finite() && b.is_finite()) || b <= a {
        return Err(QuadError::EmptyRect);
    }
    let coarse = gauss_1d(f, a, b, order);
    let fine = gauss_1d(f, a, b, 2 * order);
    let abs = gauss_1d(&|x| f(x).abs(), a, b, 2 * order);
    let bound = (fine - coarse).abs() + 2.0 * f64::EPSILON * abs.abs();
    Ok(NormIntegral::with_bound(fine, bound))
}

/// Axis-aligned rectangle in raw floating-point coordinates for quadrature.
#[derive(Clone, Copy, Debug)]
pub struct QuadRect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl QuadRect {
    pub fn from_rats(x0: &Rat, x1: &Rat, y0: &Rat, y1: &Rat) -> Self {
        QuadRect {
            x0: x0.to_f64(),
            x1: x1.to_f64(),
            y0: y0.to_f64(),
            y1: y1.to_f64(),
        }
    }
}

fn tensor_gauss(f: &dyn Fn(f64, f64) -> f64, r: QuadRect, order: usize, absval: bool) -> f64 {
    let rule = legendre_rule(order);
    let hx = 0.5 * (r.x1 - r.x0);
    let mx = 0.5 * (r.x1 + r.x0);
    let hy = 0.5 * (r.y1 - r.y0);
    let my = 0.5 * (r.y1 + r.y0);
    // Kahan compensated summation keeps the roundoff near one ulp
    let mut s = 0.0;
    let mut comp = 0.0;
    for (xi, wi) in &rule {
        for (yj, wj) in &rule {
            let v = f(mx + hx * xi, my + hy * yj);
            let term = wi * wj * if absval { v.abs() } else { v };
            let y = term - comp;
            let t = s + y;
            comp = (t - s) - y;
            s = t;
        }
    }
    s * hx * hy
}

/// Tensor Gauss-Legendre on a rectangle with order-doubling Richardson
/// comparison for the error bound.
pub fn gauss_quad_2d(
    f: &dyn Fn(f64, f64) -> f64,
    rect: QuadRect,
    order: usize,
) -> Result<NormIntegral, QuadError> {
    if !(2..=64).contains(&order) {
        return Err(QuadError::BadOrder(order));
    }
    if !(rect.x0.is_finite() && rect.x1.is_finite() && rect.y0.is_finite() && rect.y1.is_finite())
        || rect.x1 <= rect.x0
        || rect.y1 <= rect.y0
    {
        return Err(QuadError::EmptyRect);
    }
    let coarse = tensor_gauss(f, rect, order, false);
    let fine = tensor_gauss(f, rect, 2 * order, false);
    let abs = tensor_gauss(f, rect, order, true);
    let bound = (fine - coarse).abs() + 2.0 * f64::EPSILON * abs.abs();
    Ok(NormIntegral::with_bound(fine, bound))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_segment() {
        let r = seg_norm_integral((1.0, 0.0), (0.0, 0.0), 2.0).unwrap();
        assert!((r.value - 2.0).abs() <= r.abs_error_bound);
    }

    #[test]
    fn linear_segment() {
        // ∫_0^1 t dt = 1/2, integrand |0 + t e1|
        let r = seg_norm_integral((0.0, 0.0), (1.0, 0.0), 1.0).unwrap();
        assert!((r.value - 0.5).abs() <= 1e-13);
    }

    #[test]
    fn sqrt_one_plus_t2() {
        // ∫_0^1 sqrt(1 + t^2) dt = (sqrt(2) + asinh(1)) / 2
        let r = seg_norm_integral((1.0, 0.0), (0.0, 1.0), 1.0).unwrap();
        let exact = (2.0f64.sqrt() + 1.0f64.asinh()) / 2.0;
        assert!((r.value - exact).abs() <= 1e-12, "value {} exact {}", r.value, exact);
    }

    #[test]
    fn kink_inside_interval() {
        // |t - 1/2| on [0,1] integrates to 1/4
        let r = seg_norm_integral((-0.5, 0.0), (1.0, 0.0), 1.0).unwrap();
        assert!((r.value - 0.25).abs() <= 1e-13);
    }

    #[test]
    fn unit_square_constant() {
        let r = gauss_quad_2d(&|_, _| 1.0, QuadRect { x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0 }, 4)
            .unwrap();
        assert!((r.value - 1.0).abs() <= 1e-15);
        assert!(r.abs_error_bound <= 1e-15);
    }

    #[test]
    fn polynomial_exactness() {
        let r = gauss_quad_2d(&|x, y| x * y, QuadRect { x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0 }, 4)
            .unwrap();
        assert!((r.value - 0.25).abs() <= 1e-15);
    }

    #[test]
    fn norm_integrand_on_square() {
        let exact = (2.0f64.sqrt() + 1.0f64.asinh()) / 3.0;
        let r = gauss_quad_2d(
            &|x, y| x.hypot(y),
            QuadRect { x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0 },
            32,
        )
        .unwrap();
        assert!((r.value - exact).abs() <= r.abs_error_bound.max(1e-7));
    }
}
