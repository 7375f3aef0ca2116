//! Rational rectangles and affine maps.

use crate::numeric::{Mat2, Rat, Vec2};
use serde::{Deserialize, Serialize};

/// Axis-aligned rectangle with rational corners and nonempty interior.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub x0: Rat,
    pub x1: Rat,
    pub y0: Rat,
    pub y1: Rat,
}

impl std::fmt::Debug for Rect {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{},{}]x[{},{}]", self.x0, self.x1, self.y0, self.y1)
    }
}

impl Rect {
    pub fn new(x0: Rat, x1: Rat, y0: Rat, y1: Rat) -> Self {
        assert!(x0 < x1 && y0 < y1, "rectangle must have nonempty interior");
        Rect { x0, x1, y0, y1 }
    }

    pub fn ints(x0: i64, x1: i64, y0: i64, y1: i64) -> Self {
        Rect::new(
            Rat::from_int(x0),
            Rat::from_int(x1),
            Rat::from_int(y0),
            Rat::from_int(y1),
        )
    }

    pub fn unit() -> Self {
        Rect::ints(0, 1, 0, 1)
    }

    pub fn width(&self) -> Rat {
        &self.x1 - &self.x0
    }

    pub fn height(&self) -> Rat {
        &self.y1 - &self.y0
    }

    pub fn area(&self) -> Rat {
        &self.width() * &self.height()
    }

    pub fn perimeter(&self) -> Rat {
        let two = Rat::from_int(2);
        &(&self.width() + &self.height()) * &two
    }

    pub fn min_side(&self) -> Rat {
        self.width().min(self.height())
    }

    pub fn center(&self) -> Vec2 {
        let half = Rat::new(1, 2);
        Vec2::new(
            &(&self.x0 + &self.x1) * &half,
            &(&self.y0 + &self.y1) * &half,
        )
    }

    pub fn corners(&self) -> [Vec2; 4] {
        [
            Vec2::new(self.x0.clone(), self.y0.clone()),
            Vec2::new(self.x1.clone(), self.y0.clone()),
            Vec2::new(self.x0.clone(), self.y1.clone()),
            Vec2::new(self.x1.clone(), self.y1.clone()),
        ]
    }

    pub fn contains_closed(&self, p: &Vec2) -> bool {
        self.x0 <= p.x && p.x <= self.x1 && self.y0 <= p.y && p.y <= self.y1
    }

    pub fn contains_interior(&self, p: &Vec2) -> bool {
        self.x0 < p.x && p.x < self.x1 && self.y0 < p.y && p.y < self.y1
    }

    pub fn contains_rect(&self, r: &Rect) -> bool {
        self.x0 <= r.x0 && r.x1 <= self.x1 && self.y0 <= r.y0 && r.y1 <= self.y1
    }

    /// Intersection with positive area, if any.
    pub fn intersect(&self, o: &Rect) -> Option<Rect> {
        let x0 = self.x0.clone().max(o.x0.clone());
        let x1 = self.x1.clone().min(o.x1.clone());
        let y0 = self.y0.clone().max(o.y0.clone());
        let y1 = self.y1.clone().min(o.y1.clone());
        if x0 < x1 && y0 < y1 {
            Some(Rect { x0, x1, y0, y1 })
        } else {
            None
        }
    }

    pub fn interiors_overlap(&self, o: &Rect) -> bool {
        self.intersect(o).is_some()
    }

    /// Rectangle shrunk by `d` on every side; `None` if it would collapse.
    pub fn inset(&self, d: &Rat) -> Option<Rect> {
        let x0 = &self.x0 + d;
        let x1 = &self.x1 - d;
        let y0 = &self.y0 + d;
        let y1 = &self.y1 - d;
        if x0 < x1 && y0 < y1 {
            Some(Rect { x0, x1, y0, y1 })
        } else {
            None
        }
    }

    /// Lexicographic key (lower-left corner first) used for the boundary
    /// evaluation convention and canonical cell ordering.
    pub fn lex_key(&self) -> (Rat, Rat, Rat, Rat) {
        (
            self.x0.clone(),
            self.y0.clone(),
            self.x1.clone(),
            self.y1.clone(),
        )
    }
}

/// Affine map `x ↦ A x + b` with exact rational coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct AffineMap {
    pub a: Mat2,
    pub b: Vec2,
}

impl AffineMap {
    pub fn new(a: Mat2, b: Vec2) -> Self {
        AffineMap { a, b }
    }

    pub fn zero() -> Self {
        AffineMap { a: Mat2::zero(), b: Vec2::zero() }
    }

    pub fn constant(b: Vec2) -> Self {
        AffineMap { a: Mat2::zero(), b }
    }

    pub fn linear(a: Mat2) -> Self {
        AffineMap { a, b: Vec2::zero() }
    }

    pub fn eval(&self, x: &Vec2) -> Vec2 {
        &self.a.matvec(x) + &self.b
    }

    pub fn sub(&self, o: &AffineMap) -> AffineMap {
        AffineMap { a: &self.a - &o.a, b: &self.b - &o.b }
    }

    pub fn add(&self, o: &AffineMap) -> AffineMap {
        AffineMap { a: &self.a + &o.a, b: &self.b + &o.b }
    }

    pub fn scale(&self, s: &Rat) -> AffineMap {
        AffineMap { a: self.a.scale(s), b: self.b.scale(s) }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
}
