//! Closed intervals with exact rational endpoints.

use super::{sqrt_enclose, Rat};
use num_traits::{Signed, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// A closed interval `[lo, hi]` with rational endpoints, `lo <= hi`.
///
/// Every approximate quantity in the workbench is reported as one of
/// these: the invariant the callers rely on is that the true value lies
/// inside, and that an operation asked for precision `k` returns width
/// strictly below `2^-k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalInterval {
    pub lo: Rat,
    pub hi: Rat,
}

impl RationalInterval {
    pub fn new(lo: Rat, hi: Rat) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        RationalInterval { lo, hi }
    }

    pub fn point(v: Rat) -> Self {
        RationalInterval { lo: v.clone(), hi: v }
    }

    pub fn zero() -> Self {
        Self::point(Rat::zero())
    }

    pub fn width(&self) -> Rat {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rat {
        (&self.lo + &self.hi) / super::rat_int(2)
    }

    pub fn contains(&self, v: &Rat) -> bool {
        &self.lo <= v && v <= &self.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    /// True when every point of the interval is strictly positive.
    pub fn strictly_positive(&self) -> bool {
        self.lo.is_positive()
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_negative() {
            RationalInterval { lo: &self.hi * c, hi: &self.lo * c }
        } else {
            RationalInterval { lo: &self.lo * c, hi: &self.hi * c }
        }
    }

    /// Smallest interval containing both.
    pub fn hull(&self, other: &Self) -> Self {
        RationalInterval {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
        }
    }

    /// Intersects with `[0, inf)`; useful before taking square roots of
    /// quantities known to be nonnegative.
    pub fn clamp_nonneg(&self) -> Self {
        let lo = if self.lo.is_negative() { Rat::zero() } else { self.lo.clone() };
        let hi = if self.hi.is_negative() { Rat::zero() } else { self.hi.clone() };
        RationalInterval { lo, hi }
    }

    /// Encloses `sqrt` of a nonnegative interval, rounding endpoints
    /// outward with dyadic error at most `2^-(k+1)` on each side.
    pub fn sqrt(&self, k: u32) -> Self {
        let nn = self.clamp_nonneg();
        let lo_iv = sqrt_enclose(&nn.lo, k);
        let hi_iv = sqrt_enclose(&nn.hi, k);
        RationalInterval::new(lo_iv.lo, hi_iv.hi)
    }
}

impl Add for &RationalInterval {
    type Output = RationalInterval;
    fn add(self, rhs: &RationalInterval) -> RationalInterval {
        RationalInterval { lo: &self.lo + &rhs.lo, hi: &self.hi + &rhs.hi }
    }
}

impl Sub for &RationalInterval {
    type Output = RationalInterval;
    fn sub(self, rhs: &RationalInterval) -> RationalInterval {
        RationalInterval { lo: &self.lo - &rhs.hi, hi: &self.hi - &rhs.lo }
    }
}

impl Mul for &RationalInterval {
    type Output = RationalInterval;
    fn mul(self, rhs: &RationalInterval) -> RationalInterval {
        let candidates = [
            &self.lo * &rhs.lo,
            &self.lo * &rhs.hi,
            &self.hi * &rhs.lo,
            &self.hi * &rhs.hi,
        ];
        let lo = candidates.iter().min().unwrap().clone();
        let hi = candidates.iter().max().unwrap().clone();
        RationalInterval { lo, hi }
    }
}

impl Neg for &RationalInterval {
    type Output = RationalInterval;
    fn neg(self) -> RationalInterval {
        RationalInterval { lo: -self.hi.clone(), hi: -self.lo.clone() }
    }
}

impl fmt::Display for RationalInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{pow2_neg, rat, rat_int};

    #[test]
    fn arithmetic_encloses() {
        let a = RationalInterval::new(rat(1, 3), rat(1, 2));
        let b = RationalInterval::new(rat(-1, 4), rat(1, 4));
        let s = &a + &b;
        assert!(s.contains(&(rat(1, 3) + rat(-1, 4))));
        assert!(s.contains(&(rat(1, 2) + rat(1, 4))));
        let p = &a * &b;
        assert!(p.contains(&(rat(1, 2) * rat(-1, 4))));
        assert!(p.contains(&rat_int(0)));
    }

    #[test]
    fn sqrt_of_interval_brackets_endpoint_roots() {
        let a = RationalInterval::new(rat(1, 2), rat_int(2));
        let s = a.sqrt(10);
        assert!(&s.lo * &s.lo <= rat(1, 2));
        assert!(&s.hi * &s.hi >= rat_int(2));
        // Endpoint rounding adds at most 2^-11 per side beyond the true
        // sqrt image width.
        let true_width_bound = rat_int(2) - rat(1, 2); // crude: hi - lo
        assert!(s.width() <= true_width_bound + pow2_neg(10));
    }
}
