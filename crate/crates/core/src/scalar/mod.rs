//! Exact scalars: big rationals, Gaussian rationals, rational intervals,
//! roots of unity, and cyclotomic numbers.
//!
//! The whole workbench is built on the rule that a scalar is either exact
//! or an interval with exact rational endpoints; floating point never
//! appears. `Rat` is a re-export of `num_rational::BigRational`, the other
//! types are defined here.

mod cyclo;
mod interval;
mod roots;
mod trig;

pub use cyclo::Cyclo;
pub use interval::RationalInterval;
pub use roots::RootOfUnity;
pub use trig::{cos_enclosure, cyclo_enclosure, pi_enclosure, root_enclosure, sin_enclosure};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Exact rational scalar used throughout.
pub type Rat = num_rational::BigRational;

/// `n` as a rational.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// `n/d` as a rational. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// `2^-k` as a rational.
pub fn pow2_neg(k: u32) -> Rat {
    Rat::new(BigInt::one(), BigInt::one() << k)
}

/// Exact square root of a nonnegative rational, when it is rational.
pub fn exact_sqrt(q: &Rat) -> Option<Rat> {
    if q.is_negative() {
        return None;
    }
    let (num, den) = (q.numer(), q.denom());
    let sn = num.sqrt();
    let sd = den.sqrt();
    if &(&sn * &sn) == num && &(&sd * &sd) == den {
        Some(Rat::new(sn, sd))
    } else {
        None
    }
}

/// Encloses `sqrt(q)` for `q >= 0` in a dyadic interval of width at most
/// `2^-(k+1)`; returns a point interval when the root is exactly rational.
pub fn sqrt_enclose(q: &Rat, k: u32) -> RationalInterval {
    assert!(!q.is_negative(), "sqrt of negative rational");
    if let Some(r) = exact_sqrt(q) {
        return RationalInterval::point(r);
    }
    let m = k + 1;
    // floor(sqrt(q)) scaled by 2^m: isqrt commutes with floor on [0, inf).
    let scaled = (q.numer() << (2 * m as usize)).div_floor(q.denom());
    let n = scaled.sqrt();
    let d = BigInt::one() << m;
    RationalInterval::new(Rat::new(n.clone(), d.clone()), Rat::new(n + 1, d))
}

/// Gaussian rational `re + im*i` with exact rational parts.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct GaussRat {
    pub re: Rat,
    pub im: Rat,
}

impl GaussRat {
    pub fn new(re: Rat, im: Rat) -> Self {
        GaussRat { re, im }
    }

    pub fn from_rat(re: Rat) -> Self {
        GaussRat { re, im: Rat::zero() }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rat(rat_int(n))
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        GaussRat { re: Rat::zero(), im: Rat::one() }
    }

    pub fn conj(&self) -> Self {
        GaussRat { re: self.re.clone(), im: -self.im.clone() }
    }

    /// `|z|^2 = re^2 + im^2`, always an exact rational.
    pub fn abs_sq(&self) -> Rat {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn is_rational(&self) -> bool {
        self.im.is_zero()
    }

    pub fn scale(&self, c: &Rat) -> Self {
        GaussRat { re: &self.re * c, im: &self.im * c }
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.abs_sq();
        Some(GaussRat { re: &self.re / &n, im: -(&self.im / &n) })
    }
}

impl Zero for GaussRat {
    fn zero() -> Self {
        GaussRat::default()
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for GaussRat {
    fn one() -> Self {
        GaussRat::from_rat(Rat::one())
    }
}

impl Add for GaussRat {
    type Output = GaussRat;
    fn add(self, rhs: GaussRat) -> GaussRat {
        GaussRat { re: self.re + rhs.re, im: self.im + rhs.im }
    }
}

impl Sub for GaussRat {
    type Output = GaussRat;
    fn sub(self, rhs: GaussRat) -> GaussRat {
        GaussRat { re: self.re - rhs.re, im: self.im - rhs.im }
    }
}

impl Mul for GaussRat {
    type Output = GaussRat;
    fn mul(self, rhs: GaussRat) -> GaussRat {
        GaussRat {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl Div for GaussRat {
    type Output = GaussRat;
    fn div(self, rhs: GaussRat) -> GaussRat {
        self * rhs.inv().expect("division by zero GaussRat")
    }
}

impl Neg for GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat { re: -self.re, im: -self.im }
    }
}

impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return write!(f, "{}", self.re);
        }
        if self.re.is_zero() {
            return write!(f, "{}i", self.im);
        }
        if self.im.is_negative() {
            write!(f, "{}-{}i", self.re, -self.im.clone())
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}
