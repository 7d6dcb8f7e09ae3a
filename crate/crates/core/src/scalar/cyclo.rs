//! Exact cyclotomic numbers.
//!
//! A [`Cyclo`] is an element of the field `Q(zeta_n)` for some order `n`,
//! stored as a polynomial in `zeta_n = e^(2*pi*i/n)` reduced modulo the
//! n-th cyclotomic polynomial. That representation is unique, so equality
//! of values is coefficient equality after lifting both operands into the
//! field of the lcm order. Rational and Gaussian-rational values are
//! compressed back to orders 1 and 4, which keeps the common case (matrix
//! entries that never leave `Q(i)`) fast.

use super::{GaussRat, Rat, RootOfUnity};
use crate::poly::Poly;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Mutex, OnceLock};

/// Euler's totient.
fn phi(n: u64) -> usize {
    let mut m = n;
    let mut result = n;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            while m % p == 0 {
                m /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if m > 1 {
        result -= result / m;
    }
    result as usize
}

fn divisors(n: u64) -> Vec<u64> {
    let mut ds: Vec<u64> = (1..=n).filter(|d| n % d == 0).collect();
    ds.sort_unstable();
    ds
}

/// The n-th cyclotomic polynomial, memoized. Computed by exact division of
/// `x^n - 1` by the cyclotomic polynomials of the proper divisors.
fn cyclotomic(n: u64) -> Poly<Rat> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Poly<Rat>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().unwrap().get(&n) {
        return p.clone();
    }
    let mut coeffs = vec![Rat::zero(); n as usize + 1];
    coeffs[0] = -Rat::one();
    coeffs[n as usize] = Rat::one();
    let mut p = Poly::from_coeffs(coeffs);
    for d in divisors(n) {
        if d < n {
            let (q, r) = p.divrem(&cyclotomic(d));
            debug_assert!(r.is_zero());
            p = q;
        }
    }
    cache.lock().unwrap().insert(n, p.clone());
    p
}

/// An exact element of a cyclotomic field.
#[derive(Debug, Clone)]
pub struct Cyclo {
    order: u64,
    /// Length `phi(order)`; entry `j` is the coefficient of `zeta_order^j`.
    coeffs: Vec<Rat>,
}

impl Cyclo {
    fn raw(order: u64, poly: Poly<Rat>) -> Self {
        let deg = phi(order);
        let reduced = if poly.degree().map_or(0, |d| d + 1) > deg {
            poly.divrem(&cyclotomic(order)).1
        } else {
            poly
        };
        let mut coeffs = reduced.coeffs().to_vec();
        coeffs.resize(deg, Rat::zero());
        Cyclo { order, coeffs }.compress()
    }

    /// Descends to order 1 or 4 when the value is rational or Gaussian.
    fn compress(self) -> Self {
        if self.order == 1 {
            return self;
        }
        if self.coeffs.iter().skip(1).all(|c| c.is_zero()) {
            return Cyclo { order: 1, coeffs: vec![self.coeffs[0].clone()] };
        }
        if self.order % 4 == 0 && self.order > 4 {
            let q = (self.order / 4) as usize;
            let gaussian = self
                .coeffs
                .iter()
                .enumerate()
                .all(|(j, c)| j == 0 || j == q || c.is_zero());
            if gaussian && q < self.coeffs.len() {
                return Cyclo {
                    order: 4,
                    coeffs: vec![self.coeffs[0].clone(), self.coeffs[q].clone()],
                };
            }
        }
        self
    }

    /// The same value as an element of `Q(zeta_target)`; `order` must
    /// divide `target`.
    fn lift(&self, target: u64) -> Poly<Rat> {
        debug_assert_eq!(target % self.order, 0);
        let step = (target / self.order) as usize;
        let mut coeffs = vec![Rat::zero(); (self.coeffs.len() - 1) * step + 1];
        for (j, c) in self.coeffs.iter().enumerate() {
            coeffs[j * step] = c.clone();
        }
        Poly::from_coeffs(coeffs)
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    /// Coefficients of the reduced representation: entry `j` multiplies
    /// `ζ_order^j`.
    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    /// An upper bound on the complex modulus: the 1-norm of the
    /// coefficient vector, since every power of `ζ` has modulus 1.
    pub fn abs_bound(&self) -> Rat {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }

    pub fn from_rat(c: Rat) -> Self {
        Cyclo { order: 1, coeffs: vec![c] }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rat(super::rat_int(n))
    }

    pub fn from_gauss(z: &GaussRat) -> Self {
        if z.im.is_zero() {
            Self::from_rat(z.re.clone())
        } else {
            Cyclo { order: 4, coeffs: vec![z.re.clone(), z.im.clone()] }
        }
    }

    pub fn from_root(r: &RootOfUnity) -> Self {
        let n = r.order();
        let mut coeffs = vec![Rat::zero(); r.numer() as usize + 1];
        coeffs[r.numer() as usize] = Rat::one();
        Cyclo::raw(n, Poly::from_coeffs(coeffs))
    }

    pub fn i() -> Self {
        Self::from_gauss(&GaussRat::i())
    }

    pub fn to_rat(&self) -> Option<Rat> {
        if self.order == 1 {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    pub fn to_gauss(&self) -> Option<GaussRat> {
        match self.order {
            1 => Some(GaussRat::from_rat(self.coeffs[0].clone())),
            4 => Some(GaussRat::new(self.coeffs[0].clone(), self.coeffs[1].clone())),
            _ => None,
        }
    }

    pub fn conj(&self) -> Self {
        let n = self.order;
        let mut poly = Poly::zero();
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let e = if j == 0 { 0 } else { (n as usize) - j };
            poly = poly.add(&Poly::constant(c.clone()).shift_up(e));
        }
        Cyclo::raw(n, poly)
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        if let Some(g) = self.to_gauss() {
            return Some(Self::from_gauss(&g.inv().unwrap()));
        }
        let p = Poly::from_coeffs(self.coeffs.clone());
        let (g, u, _) = poly_ext_gcd(&p, &cyclotomic(self.order));
        // g is a nonzero constant: the cyclotomic polynomial is
        // irreducible and p is nonzero of smaller degree.
        let c = g.coeff(0);
        debug_assert_eq!(g.degree(), Some(0));
        let inv = u.scale(&(Rat::one() / c));
        Some(Cyclo::raw(self.order, inv))
    }

    pub fn scale(&self, c: &Rat) -> Self {
        Cyclo { order: self.order, coeffs: self.coeffs.iter().map(|a| a * c).collect() }
            .compress()
    }
}

/// Extended Euclid over `Q[x]`: returns `(g, u, v)` with `u*a + v*b = g`.
fn poly_ext_gcd(a: &Poly<Rat>, b: &Poly<Rat>) -> (Poly<Rat>, Poly<Rat>, Poly<Rat>) {
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut u0, mut u1) = (Poly::constant(Rat::one()), Poly::<Rat>::zero());
    let (mut v0, mut v1) = (Poly::<Rat>::zero(), Poly::constant(Rat::one()));
    while !r1.is_zero() {
        let (q, r) = r0.divrem(&r1);
        let u = u0.sub(&q.mul(&u1));
        let v = v0.sub(&q.mul(&v1));
        r0 = r1;
        r1 = r;
        u0 = u1;
        u1 = u;
        v0 = v1;
        v1 = v;
    }
    (r0, u0, v0)
}

impl PartialEq for Cyclo {
    fn eq(&self, other: &Self) -> bool {
        if self.order == other.order {
            return self.coeffs == other.coeffs;
        }
        let target = self.order.lcm(&other.order);
        Cyclo::raw(target, self.lift(target)).coeffs
            == Cyclo::raw(target, other.lift(target)).coeffs
    }
}

impl Eq for Cyclo {}

impl Zero for Cyclo {
    fn zero() -> Self {
        Self::from_rat(Rat::zero())
    }

    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }
}

impl One for Cyclo {
    fn one() -> Self {
        Self::from_rat(Rat::one())
    }
}

impl Add for Cyclo {
    type Output = Cyclo;
    fn add(self, rhs: Cyclo) -> Cyclo {
        let target = self.order.lcm(&rhs.order);
        Cyclo::raw(target, self.lift(target).add(&rhs.lift(target)))
    }
}

impl Sub for Cyclo {
    type Output = Cyclo;
    fn sub(self, rhs: Cyclo) -> Cyclo {
        let target = self.order.lcm(&rhs.order);
        Cyclo::raw(target, self.lift(target).sub(&rhs.lift(target)))
    }
}

impl Mul for Cyclo {
    type Output = Cyclo;
    fn mul(self, rhs: Cyclo) -> Cyclo {
        if self.order == 1 {
            return rhs.scale(&self.coeffs[0]);
        }
        if rhs.order == 1 {
            return self.scale(&rhs.coeffs[0]);
        }
        let target = self.order.lcm(&rhs.order);
        Cyclo::raw(target, self.lift(target).mul(&rhs.lift(target)))
    }
}

impl Neg for Cyclo {
    type Output = Cyclo;
    fn neg(self) -> Cyclo {
        Cyclo { order: self.order, coeffs: self.coeffs.into_iter().map(|c| -c).collect() }
    }
}

impl Div for Cyclo {
    type Output = Cyclo;
    fn div(self, rhs: Cyclo) -> Cyclo {
        self * rhs.inv().expect("division by zero cyclotomic")
    }
}

impl fmt::Display for Cyclo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if j == 0 {
                write!(f, "{c}")?;
            } else {
                write!(f, "{c}*z{}^{}", self.order, j)?;
            }
        }
        Ok(())
    }
}
