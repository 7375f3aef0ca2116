//! Exact 2-vectors and 2x2 matrices over `Rat`, with floating-point norms.

use super::rat::Rat;
use serde::{Deserialize, Serialize};

/// Exact rational 2-vector.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: Rat,
    pub y: Rat,
}

impl std::fmt::Debug for Vec2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl Vec2 {
    pub fn new(x: Rat, y: Rat) -> Self {
        Vec2 { x, y }
    }

    pub fn zero() -> Self {
        Vec2 { x: Rat::zero(), y: Rat::zero() }
    }

    pub fn ints(x: i64, y: i64) -> Self {
        Vec2 { x: Rat::from_int(x), y: Rat::from_int(y) }
    }

    pub fn e1() -> Self {
        Self::ints(1, 0)
    }

    pub fn e2() -> Self {
        Self::ints(0, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn dot(&self, o: &Vec2) -> Rat {
        &(&self.x * &o.x) + &(&self.y * &o.y)
    }

    /// Outer product `self ⊗ o`.
    pub fn outer(&self, o: &Vec2) -> Mat2 {
        Mat2::new(
            &self.x * &o.x,
            &self.x * &o.y,
            &self.y * &o.x,
            &self.y * &o.y,
        )
    }

    pub fn scale(&self, s: &Rat) -> Vec2 {
        Vec2::new(&self.x * s, &self.y * s)
    }

    /// Euclidean norm, floating point (relative error <= 1e-14).
    pub fn norm(&self) -> f64 {
        let x = self.x.to_f64();
        let y = self.y.to_f64();
        x.hypot(y)
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.x.to_f64(), self.y.to_f64())
    }
}

impl std::ops::Add for &Vec2 {
    type Output = Vec2;
    fn add(self, o: &Vec2) -> Vec2 {
        Vec2::new(&self.x + &o.x, &self.y + &o.y)
    }
}

impl std::ops::Sub for &Vec2 {
    type Output = Vec2;
    fn sub(self, o: &Vec2) -> Vec2 {
        Vec2::new(&self.x - &o.x, &self.y - &o.y)
    }
}

impl std::ops::Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Exact rational 2x2 matrix, row major.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mat2 {
    pub m: [[Rat; 2]; 2],
}

impl std::fmt::Debug for Mat2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            self.m[0][0], self.m[0][1], self.m[1][0], self.m[1][1]
        )
    }
}

impl Mat2 {
    pub fn new(a11: Rat, a12: Rat, a21: Rat, a22: Rat) -> Self {
        Mat2 { m: [[a11, a12], [a21, a22]] }
    }

    pub fn zero() -> Self {
        Mat2::new(Rat::zero(), Rat::zero(), Rat::zero(), Rat::zero())
    }

    pub fn ints(a11: i64, a12: i64, a21: i64, a22: i64) -> Self {
        Mat2::new(
            Rat::from_int(a11),
            Rat::from_int(a12),
            Rat::from_int(a21),
            Rat::from_int(a22),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.m.iter().all(|r| r.iter().all(|e| e.is_zero()))
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2::new(
            self.m[0][0].clone(),
            self.m[1][0].clone(),
            self.m[0][1].clone(),
            self.m[1][1].clone(),
        )
    }

    /// Exact symmetric part `(M + M^T)/2`.
    pub fn sym(&self) -> Mat2 {
        let half = Rat::new(1, 2);
        let off = &(&self.m[0][1] + &self.m[1][0]) * &half;
        Mat2::new(self.m[0][0].clone(), off.clone(), off, self.m[1][1].clone())
    }

    /// Exact skew part `(M - M^T)/2`.
    pub fn skew(&self) -> Mat2 {
        let half = Rat::new(1, 2);
        let off = &(&self.m[0][1] - &self.m[1][0]) * &half;
        Mat2::new(Rat::zero(), off.clone(), -off, Rat::zero())
    }

    /// Exact test for skew symmetry (`sym(M) = 0`).
    pub fn is_skew(&self) -> bool {
        self.m[0][0].is_zero()
            && self.m[1][1].is_zero()
            && (&self.m[0][1] + &self.m[1][0]).is_zero()
    }

    pub fn det(&self) -> Rat {
        &(&self.m[0][0] * &self.m[1][1]) - &(&self.m[0][1] * &self.m[1][0])
    }

    pub fn matvec(&self, v: &Vec2) -> Vec2 {
        Vec2::new(
            &(&self.m[0][0] * &v.x) + &(&self.m[0][1] * &v.y),
            &(&self.m[1][0] * &v.x) + &(&self.m[1][1] * &v.y),
        )
    }

    pub fn row(&self, i: usize) -> Vec2 {
        Vec2::new(self.m[i][0].clone(), self.m[i][1].clone())
    }

    pub fn col(&self, j: usize) -> Vec2 {
        Vec2::new(self.m[0][j].clone(), self.m[1][j].clone())
    }

    pub fn scale(&self, s: &Rat) -> Mat2 {
        Mat2::new(
            &self.m[0][0] * s,
            &self.m[0][1] * s,
            &self.m[1][0] * s,
            &self.m[1][1] * s,
        )
    }

    /// Frobenius norm, floating point (relative error <= 1e-14).
    pub fn frobenius(&self) -> f64 {
        let mut s = 0.0f64;
        for r in &self.m {
            for e in r {
                let v = e.to_f64();
                s += v * v;
            }
        }
        s.sqrt()
    }

    /// Operator (spectral) norm in floating point.
    pub fn op_norm(&self) -> f64 {
        // singular values of a 2x2: sqrt of eigenvalues of M^T M
        let a = self.m[0][0].to_f64();
        let b = self.m[0][1].to_f64();
        let c = self.m[1][0].to_f64();
        let d = self.m[1][1].to_f64();
        let q = a * a + b * b + c * c + d * d;
        let det = a * d - b * c;
        let disc = (q * q - 4.0 * det * det).max(0.0).sqrt();
        ((q + disc) / 2.0).sqrt()
    }
}

impl std::ops::Add for &Mat2 {
    type Output = Mat2;
    fn add(self, o: &Mat2) -> Mat2 {
        Mat2::new(
            &self.m[0][0] + &o.m[0][0],
            &self.m[0][1] + &o.m[0][1],
            &self.m[1][0] + &o.m[1][0],
            &self.m[1][1] + &o.m[1][1],
        )
    }
}

impl std::ops::Sub for &Mat2 {
    type Output = Mat2;
    fn sub(self, o: &Mat2) -> Mat2 {
        Mat2::new(
            &self.m[0][0] - &o.m[0][0],
            &self.m[0][1] - &o.m[0][1],
            &self.m[1][0] - &o.m[1][0],
            &self.m[1][1] - &o.m[1][1],
        )
    }
}

impl std::ops::Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        Mat2::new(
            -self.m[0][0].clone(),
            -self.m[0][1].clone(),
            -self.m[1][0].clone(),
            -self.m[1][1].clone(),
        )
    }
}
