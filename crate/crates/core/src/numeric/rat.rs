//! Exact rational scalars.
//!
//! `Rat` is stored in lowest terms with a positive denominator. Values that
//! fit in `i64/i64` use an inline representation; everything else falls back
//! to `num::BigRational`. All arithmetic is exact, norms are the only place
//! floating point enters the crate.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num::bigint::{BigInt, Sign};
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

#[derive(Clone)]
enum Repr {
    Small { num: i64, den: i64 },
    Big(Box<BigRational>),
}

/// Arbitrary-precision rational, always in lowest terms, denominator > 0.
#[derive(Clone)]
pub struct Rat(Repr);

fn gcd_i128(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Rat {
    pub fn zero() -> Self {
        Rat(Repr::Small { num: 0, den: 1 })
    }

    pub fn one() -> Self {
        Rat(Repr::Small { num: 1, den: 1 })
    }

    pub fn from_int(n: i64) -> Self {
        Rat(Repr::Small { num: n, den: 1 })
    }

    /// `num/den` reduced to lowest terms. Panics if `den == 0`.
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "Rat denominator must be nonzero");
        Self::from_i128(num as i128, den as i128)
    }

    fn from_i128(num: i128, den: i128) -> Self {
        assert!(den != 0);
        let (mut n, mut d) = if den < 0 { (-num, -den) } else { (num, den) };
        let g = gcd_i128(n, d);
        if g > 1 {
            n /= g;
            d /= g;
        }
        if n >= i64::MIN as i128 && n <= i64::MAX as i128 && d <= i64::MAX as i128 {
            Rat(Repr::Small { num: n as i64, den: d as i64 })
        } else {
            Rat(Repr::Big(Box::new(BigRational::new(
                BigInt::from(n),
                BigInt::from(d),
            ))))
        }
    }

    fn from_big(r: BigRational) -> Self {
        // BigRational::new already reduces and fixes the sign.
        let (n, d) = (r.numer(), r.denom());
        if let (Some(n64), Some(d64)) = (n.to_i64(), d.to_i64()) {
            return Rat(Repr::Small { num: n64, den: d64 });
        }
        Rat(Repr::Big(Box::new(r)))
    }

    fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small { num, den } => {
                BigRational::new(BigInt::from(*num), BigInt::from(*den))
            }
            Repr::Big(b) => (**b).clone(),
        }
    }

    /// Exact conversion of a finite `f64` (every finite double is dyadic).
    pub fn from_f64_exact(x: f64) -> Option<Self> {
        if !x.is_finite() {
            return None;
        }
        let r = BigRational::from_float(x)?;
        Some(Self::from_big(r))
    }

    /// Power of two `2^k` for `k` possibly negative.
    pub fn pow2(k: i32) -> Self {
        if k >= 0 {
            if k < 63 {
                Rat::from_int(1i64 << k)
            } else {
                Self::from_big(BigRational::from_integer(BigInt::one() << k as usize))
            }
        } else {
            let k = (-k) as usize;
            if k < 63 {
                Rat::new(1, 1i64 << k)
            } else {
                Self::from_big(BigRational::new(BigInt::one(), BigInt::one() << k))
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(&self.0, Repr::Small { num: 0, .. })
    }

    pub fn is_negative(&self) -> bool {
        match &self.0 {
            Repr::Small { num, .. } => *num < 0,
            Repr::Big(b) => b.is_negative(),
        }
    }

    pub fn is_positive(&self) -> bool {
        match &self.0 {
            Repr::Small { num, .. } => *num > 0,
            Repr::Big(b) => b.is_positive(),
        }
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "division by zero Rat");
        match &self.0 {
            Repr::Small { num, den } => {
                let (n, d) = if *num < 0 { (-den, -num) } else { (*den, *num) };
                Rat(Repr::Small { num: n, den: d })
            }
            Repr::Big(b) => Self::from_big(b.recip()),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small { num, den } => *num as f64 / *den as f64,
            Repr::Big(b) => b.to_f64().unwrap_or_else(|| {
                let n = b.numer().to_f64().unwrap_or(f64::INFINITY);
                let d = b.denom().to_f64().unwrap_or(f64::INFINITY);
                n / d
            }),
        }
    }

    /// Floor of the rational as a big integer.
    pub fn floor_int(&self) -> BigInt {
        match &self.0 {
            Repr::Small { num, den } => BigInt::from(num.div_euclid(*den)),
            Repr::Big(b) => b.floor().to_integer(),
        }
    }

    /// Serialized canonical form `"p/q"`.
    pub fn to_frac_string(&self) -> String {
        match &self.0 {
            Repr::Small { num, den } => format!("{}/{}", num, den),
            Repr::Big(b) => format!("{}/{}", b.numer(), b.denom()),
        }
    }

    pub fn parse_frac(s: &str) -> Result<Self, String> {
        let t = s.trim();
        let (ns, ds) = match t.split_once('/') {
            Some((a, b)) => (a.trim(), b.trim()),
            None => (t, "1"),
        };
        let n = BigInt::from_str(ns).map_err(|e| format!("bad numerator {:?}: {}", ns, e))?;
        let d = BigInt::from_str(ds).map_err(|e| format!("bad denominator {:?}: {}", ds, e))?;
        if d.is_zero() {
            return Err(format!("zero denominator in {:?}", s));
        }
        if d.sign() == Sign::Minus {
            return Err(format!("denominator must be positive in {:?}", s));
        }
        Ok(Self::from_big(BigRational::new(n, d)))
    }
}

impl Default for Rat {
    fn default() -> Self {
        Rat::zero()
    }
}

impl PartialEq for Rat {
    fn eq(&self, other: &Self) -> bool {
        match (&self.0, &other.0) {
            (Repr::Small { num: a, den: b }, Repr::Small { num: c, den: d }) => a == c && b == d,
            // canonical representation: small never equals big
            (Repr::Small { .. }, Repr::Big(_)) | (Repr::Big(_), Repr::Small { .. }) => false,
            (Repr::Big(x), Repr::Big(y)) => x == y,
        }
    }
}

impl Eq for Rat {}

impl PartialOrd for Rat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rat {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small { num: a, den: b }, Repr::Small { num: c, den: d }) => {
                (*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128))
            }
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl std::hash::Hash for Rat {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        match &self.0 {
            Repr::Small { num, den } => {
                0u8.hash(state);
                num.hash(state);
                den.hash(state);
            }
            Repr::Big(b) => {
                1u8.hash(state);
                b.numer().hash(state);
                b.denom().hash(state);
            }
        }
    }
}

macro_rules! small_binop {
    ($a:expr, $b:expr, $nf:expr, $big:expr) => {{
        match (&$a.0, &$b.0) {
            (Repr::Small { num: an, den: ad }, Repr::Small { num: bn, den: bd }) => {
                let (n, d) = $nf(*an as i128, *ad as i128, *bn as i128, *bd as i128);
                Rat::from_i128(n, d)
            }
            _ => Rat::from_big($big(&$a.to_big(), &$b.to_big())),
        }
    }};
}

impl std::ops::Add for &Rat {
    type Output = Rat;
    fn add(self, rhs: &Rat) -> Rat {
        small_binop!(self, rhs, |an, ad, bn, bd| (an * bd + bn * ad, ad * bd), |x: &BigRational, y: &BigRational| x + y)
    }
}

impl std::ops::Sub for &Rat {
    type Output = Rat;
    fn sub(self, rhs: &Rat) -> Rat {
        small_binop!(self, rhs, |an, ad, bn, bd| (an * bd - bn * ad, ad * bd), |x: &BigRational, y: &BigRational| x - y)
    }
}

impl std::ops::Mul for &Rat {
    type Output = Rat;
    fn mul(self, rhs: &Rat) -> Rat {
        small_binop!(self, rhs, |an, ad, bn, bd| (an * bn, ad * bd), |x: &BigRational, y: &BigRational| x * y)
    }
}

impl std::ops::Div for &Rat {
    type Output = Rat;
    fn div(self, rhs: &Rat) -> Rat {
        assert!(!rhs.is_zero(), "division by zero Rat");
        small_binop!(self, rhs, |an, ad, bn, bd| (an * bd, ad * bn), |x: &BigRational, y: &BigRational| x / y)
    }
}

impl std::ops::Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        match self.0 {
            Repr::Small { num, den } => {
                if num == i64::MIN {
                    Rat::from_i128(-(num as i128), den as i128)
                } else {
                    Rat(Repr::Small { num: -num, den })
                }
            }
            Repr::Big(b) => Rat::from_big(-*b),
        }
    }
}

macro_rules! forward_owned {
    ($t:ident, $m:ident) => {
        impl std::ops::$t for Rat {
            type Output = Rat;
            fn $m(self, rhs: Rat) -> Rat {
                (&self).$m(&rhs)
            }
        }
        impl std::ops::$t<&Rat> for Rat {
            type Output = Rat;
            fn $m(self, rhs: &Rat) -> Rat {
                (&self).$m(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_frac_string())
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_frac_string())
    }
}

impl FromStr for Rat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse_frac(s)
    }
}

impl serde::Serialize for Rat {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_frac_string())
    }
}

impl<'de> serde::Deserialize<'de> for Rat {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Rat::parse_frac(&s).map_err(serde::de::Error::custom)
    }
}
