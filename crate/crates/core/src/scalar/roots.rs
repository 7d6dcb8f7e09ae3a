//! Exact roots of unity.

use super::GaussRat;
use num_integer::Integer;
use std::fmt;

/// The root of unity `e^(2*pi*i*k/n)`, stored in lowest terms with
/// `0 <= k < n`; the trivial root is `(0, 1)`.
///
/// Multiplying two roots lands in the lcm order, so arithmetic never
/// leaves the type, and equality of values is equality of representations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RootOfUnity {
    k: u64,
    n: u64,
}

impl RootOfUnity {
    pub fn new(k: i64, n: u64) -> Self {
        assert!(n > 0, "root of unity needs positive order");
        let k = k.rem_euclid(n as i64) as u64;
        if k == 0 {
            return RootOfUnity { k: 0, n: 1 };
        }
        let g = k.gcd(&n);
        RootOfUnity { k: k / g, n: n / g }
    }

    pub fn one() -> Self {
        RootOfUnity { k: 0, n: 1 }
    }

    pub fn is_one(&self) -> bool {
        self.n == 1
    }

    /// Numerator of the reduced exponent `k/n`.
    pub fn numer(&self) -> u64 {
        self.k
    }

    /// The multiplicative order of this root.
    pub fn order(&self) -> u64 {
        self.n
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.n.lcm(&other.n);
        let k = self.k * (n / self.n) + other.k * (n / other.n);
        RootOfUnity::new((k % n) as i64, n)
    }

    pub fn pow(&self, e: i64) -> Self {
        let k = (self.k as i128 * e as i128).rem_euclid(self.n as i128);
        RootOfUnity::new(k as i64, self.n)
    }

    /// Complex conjugate, i.e. the inverse.
    pub fn conj(&self) -> Self {
        RootOfUnity::new(-(self.k as i64), self.n)
    }

    /// The value as a Gaussian rational, when it is one (orders 1, 2, 4).
    pub fn to_gauss(&self) -> Option<GaussRat> {
        use num_traits::One;
        match (self.n, self.k) {
            (1, 0) => Some(GaussRat::one()),
            (2, 1) => Some(-GaussRat::one()),
            (4, 1) => Some(GaussRat::i()),
            (4, 3) => Some(-GaussRat::i()),
            _ => None,
        }
    }
}

impl fmt::Display for RootOfUnity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            write!(f, "1")
        } else {
            write!(f, "zeta({}/{})", self.k, self.n)
        }
    }
}
