//! Exact rational scalars, 2-vectors, 2x2 matrices, and certified norm
//! integrals. Geometry and gradients stay rational; only norms (which
//! involve square roots) drop to floating point with tracked error bounds.

mod linalg;
pub mod quad;
mod rat;

pub use linalg::{Mat2, Vec2};
pub use quad::{
    gauss_1d, gauss_1d_certified, gauss_quad_2d, legendre_rule, seg_norm_integral,
    sqrt_quadratic_integral, NormIntegral, QuadError, QuadRect,
};
pub use rat::Rat;

/// Frobenius norm of the symmetric tensor product `a ⊙ ν` for a jump vector
/// `a` and unit normal `ν`: `|a ⊙ ν| = sqrt((|a|^2 + (a·ν)^2) / 2)`.
pub fn sym_tensor_norm(a: (f64, f64), nu: (f64, f64)) -> f64 {
    let a2 = a.0 * a.0 + a.1 * a.1;
    let d = a.0 * nu.0 + a.1 * nu.1;
    ((a2 + d * d) / 2.0).sqrt()
}
