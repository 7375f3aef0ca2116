//! Piecewise-affine scalar functions of one variable with exact breakpoints.

use crate::numeric::Rat;

/// One affine piece `t ↦ slope·t + icept` on `[breaks[i], breaks[i+1]]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piece {
    pub slope: Rat,
    pub icept: Rat,
}

impl Piece {
    pub fn eval(&self, t: &Rat) -> Rat {
        &(&self.slope * t) + &self.icept
    }

    pub fn is_flat(&self) -> bool {
        self.slope.is_zero()
    }
}

/// Piecewise-affine function on `[breaks[0], breaks[n]]` with strictly
/// increasing breakpoints; `cont[i]` records whether the function is
/// continuous at interior breakpoint `i+1` (checked exactly).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pw1D {
    pub breaks: Vec<Rat>,
    pub pieces: Vec<Piece>,
    pub cont: Vec<bool>,
}

impl Pw1D {
    pub fn new(breaks: Vec<Rat>, pieces: Vec<Piece>) -> Self {
        assert_eq!(breaks.len(), pieces.len() + 1);
        assert!(breaks.windows(2).all(|w| w[0] < w[1]), "breakpoints must increase");
        let mut cont = Vec::with_capacity(pieces.len().saturating_sub(1));
        for i in 0..pieces.len().saturating_sub(1) {
            let t = &breaks[i + 1];
            cont.push(pieces[i].eval(t) == pieces[i + 1].eval(t));
        }
        Pw1D { breaks, pieces, cont }
    }

    pub fn constant(lo: Rat, hi: Rat, value: Rat) -> Self {
        Pw1D::new(vec![lo, hi], vec![Piece { slope: Rat::zero(), icept: value }])
    }

    pub fn lo(&self) -> &Rat {
        &self.breaks[0]
    }

    pub fn hi(&self) -> &Rat {
        self.breaks.last().unwrap()
    }

    pub fn is_continuous(&self) -> bool {
        self.cont.iter().all(|&c| c)
    }

    /// Index of the piece containing `t` (left piece on shared breakpoints).
    pub fn piece_at(&self, t: &Rat) -> usize {
        assert!(t >= self.lo() && t <= self.hi(), "argument outside domain");
        match self.breaks.binary_search(t) {
            Ok(0) => 0,
            Ok(i) => i - 1,
            Err(i) => i - 1,
        }
    }

    pub fn eval(&self, t: &Rat) -> Rat {
        self.pieces[self.piece_at(t)].eval(t)
    }

    /// Exact total variation: sum over pieces of `|slope|·len` plus jump
    /// magnitudes at discontinuous breakpoints.
    pub fn total_variation(&self) -> Rat {
        let mut tv = Rat::zero();
        for (i, p) in self.pieces.iter().enumerate() {
            let len = &self.breaks[i + 1] - &self.breaks[i];
            tv = &tv + &(&p.slope.abs() * &len);
        }
        for i in 0..self.cont.len() {
            if !self.cont[i] {
                let t = &self.breaks[i + 1];
                let jump = &self.pieces[i + 1].eval(t) - &self.pieces[i].eval(t);
                tv = &tv + &jump.abs();
            }
        }
        tv
    }

    /// Exact integral over the whole domain.
    pub fn integral(&self) -> Rat {
        let half = Rat::new(1, 2);
        let mut s = Rat::zero();
        for (i, p) in self.pieces.iter().enumerate() {
            let a = &self.breaks[i];
            let b = &self.breaks[i + 1];
            let mean = &(&(p.eval(a) + p.eval(b)) * &half) * &(b - a);
            s = &s + &mean;
        }
        s
    }

    /// Exact min and max over the closed domain (attained at breakpoints).
    pub fn min_max(&self) -> (Rat, Rat) {
        let mut mn = self.pieces[0].eval(&self.breaks[0]);
        let mut mx = mn.clone();
        for (i, p) in self.pieces.iter().enumerate() {
            for t in [&self.breaks[i], &self.breaks[i + 1]] {
                let v = p.eval(t);
                if v < mn {
                    mn = v.clone();
                }
                if v > mx {
                    mx = v;
                }
            }
        }
        (mn, mx)
    }

    /// Lebesgue measure of the set where the function is not locally flat.
    pub fn non_flat_measure(&self) -> Rat {
        let mut s = Rat::zero();
        for (i, p) in self.pieces.iter().enumerate() {
            if !p.is_flat() {
                s = &s + &(&self.breaks[i + 1] - &self.breaks[i]);
            }
        }
        s
    }

    /// Precompose with the affine change of variable `t = c·s + d`,
    /// producing a function of `s`. Requires `c != 0`.
    pub fn precompose_affine(&self, c: &Rat, d: &Rat) -> Pw1D {
        assert!(!c.is_zero());
        let n = self.pieces.len();
        let mut breaks: Vec<Rat> = self.breaks.iter().map(|t| &(t - d) / c).collect();
        let mut pieces: Vec<Piece> = self
            .pieces
            .iter()
            .map(|p| Piece {
                slope: &p.slope * c,
                icept: &(&p.slope * d) + &p.icept,
            })
            .collect();
        if c.is_negative() {
            breaks.reverse();
            pieces.reverse();
        }
        let _ = n;
        Pw1D::new(breaks, pieces)
    }

    /// Postcompose with `v ↦ c·v + d`.
    pub fn postscale(&self, c: &Rat, d: &Rat) -> Pw1D {
        Pw1D::new(
            self.breaks.clone(),
            self.pieces
                .iter()
                .map(|p| Piece {
                    slope: &p.slope * c,
                    icept: &(&p.icept * c) + d,
                })
                .collect(),
        )
    }

    /// Glue functions on adjacent intervals (domains must abut).
    pub fn concat(parts: &[Pw1D]) -> Pw1D {
        assert!(!parts.is_empty());
        let mut breaks = vec![parts[0].breaks[0].clone()];
        let mut pieces = Vec::new();
        for p in parts {
            assert_eq!(&p.breaks[0], breaks.last().unwrap(), "parts must abut");
            breaks.extend(p.breaks[1..].iter().cloned());
            pieces.extend(p.pieces.iter().cloned());
        }
        Pw1D::new(breaks, pieces)
    }
}
