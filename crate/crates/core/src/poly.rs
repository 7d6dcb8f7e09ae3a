//! Dense univariate polynomials over an exact coefficient ring, plus the
//! Sturm-sequence machinery used for sign analysis of rational-coefficient
//! polynomials.
//!
//! Coefficients are stored lowest degree first with no trailing zeros, so
//! the zero polynomial is the empty vector and representations are
//! canonical whenever the coefficient type's equality is.

use crate::scalar::{Rat, RationalInterval};
use num_traits::{One, Signed, Zero};
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Everything the generic polynomial ops need from a coefficient.
pub trait Coeff:
    Clone
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
}

impl<T> Coeff for T where
    T: Clone
        + PartialEq
        + Zero
        + One
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Neg<Output = T>
{
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly<T> {
    coeffs: Vec<T>,
}

impl<T: Coeff> Poly<T> {
    pub fn from_coeffs(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: T) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        Poly { coeffs: vec![T::zero(), T::one()] }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> T {
        self.coeffs.get(j).cloned().unwrap_or_else(T::zero)
    }

    pub fn leading(&self) -> Option<&T> {
        self.coeffs.last()
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|j| self.coeff(j) + other.coeff(j)).collect();
        Self::from_coeffs(coeffs)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|j| self.coeff(j) - other.coeff(j)).collect();
        Self::from_coeffs(coeffs)
    }

    pub fn neg(&self) -> Self {
        Poly { coeffs: self.coeffs.iter().map(|c| -c.clone()).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![T::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = coeffs[i + j].clone() + a.clone() * b.clone();
            }
        }
        Self::from_coeffs(coeffs)
    }

    pub fn scale(&self, c: &T) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|a| a.clone() * c.clone()).collect())
    }

    /// Multiplies by `x^k`.
    pub fn shift_up(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![T::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Poly { coeffs }
    }

    pub fn eval(&self, x: &T) -> T {
        let mut acc = T::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x.clone() + c.clone();
        }
        acc
    }

    /// Substitutes another polynomial for the variable.
    pub fn compose(&self, inner: &Self) -> Self {
        let mut acc = Self::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(inner).add(&Self::constant(c.clone()));
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, c)| small_int::<T>(j) * c.clone())
            .collect();
        Self::from_coeffs(coeffs)
    }
}

impl<T: Coeff + Div<Output = T>> Poly<T> {
    /// Antiderivative with zero constant term. Requires a field.
    pub fn antiderivative(&self) -> Self {
        let mut coeffs = vec![T::zero()];
        for (j, c) in self.coeffs.iter().enumerate() {
            coeffs.push(c.clone() / small_int::<T>(j + 1));
        }
        Self::from_coeffs(coeffs)
    }

    /// Euclidean division: `self = q * div + r` with `deg r < deg div`.
    /// Panics on a zero divisor.
    pub fn divrem(&self, div: &Self) -> (Self, Self) {
        let d = div.degree().expect("division by zero polynomial");
        let lead_inv = T::one() / div.leading().unwrap().clone();
        let mut rem = self.clone();
        let mut q = vec![T::zero(); self.coeffs.len().saturating_sub(d)];
        while let Some(rd) = rem.degree() {
            if rd < d {
                break;
            }
            let factor = rem.leading().unwrap().clone() * lead_inv.clone();
            q[rd - d] = factor.clone();
            let sub = div.scale(&factor).shift_up(rd - d);
            rem = rem.sub(&sub);
        }
        (Self::from_coeffs(q), rem)
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.divrem(&b);
            a = b;
            b = r;
        }
        match a.leading() {
            Some(lead) => {
                let inv = T::one() / lead.clone();
                a.scale(&inv)
            }
            None => a,
        }
    }

    /// `self / gcd(self, self')`: same distinct roots, all simple.
    pub fn squarefree_part(&self) -> Self {
        if self.degree().map_or(true, |d| d == 0) {
            return self.clone();
        }
        let g = self.gcd(&self.derivative());
        if g.degree() == Some(0) {
            self.clone()
        } else {
            self.divrem(&g).0
        }
    }
}

fn small_int<T: Coeff>(n: usize) -> T {
    let mut acc = T::zero();
    for _ in 0..n {
        acc = acc + T::one();
    }
    acc
}

impl Poly<Rat> {
    /// Encloses the range of the polynomial over an interval by interval
    /// Horner evaluation.
    pub fn eval_interval(&self, x: &RationalInterval) -> RationalInterval {
        let mut acc = RationalInterval::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * x) + &RationalInterval::point(c.clone());
        }
        acc
    }

    /// Sturm chain of the squarefree part; used to count distinct real
    /// roots in half-open intervals.
    pub fn sturm_chain(&self) -> Vec<Poly<Rat>> {
        let p = self.squarefree_part();
        let mut chain = vec![p.clone()];
        let dp = p.derivative();
        if dp.is_zero() {
            return chain;
        }
        chain.push(dp);
        loop {
            let n = chain.len();
            let (_, r) = chain[n - 2].divrem(&chain[n - 1]);
            if r.is_zero() {
                return chain;
            }
            chain.push(r.neg());
        }
    }

    fn sign_variations(chain: &[Poly<Rat>], x: &Rat) -> usize {
        let mut variations = 0;
        let mut last: Option<bool> = None;
        for p in chain {
            let v = p.eval(x);
            if v.is_zero() {
                continue;
            }
            let pos = v.is_positive();
            if let Some(prev) = last {
                if prev != pos {
                    variations += 1;
                }
            }
            last = Some(pos);
        }
        variations
    }

    /// Number of distinct real roots in `(a, b]`. Requires `a < b`.
    pub fn count_roots_in(chain: &[Poly<Rat>], a: &Rat, b: &Rat) -> usize {
        assert!(a < b);
        Self::sign_variations(chain, a) - Self::sign_variations(chain, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_int};

    fn p(coeffs: &[i64]) -> Poly<Rat> {
        Poly::from_coeffs(coeffs.iter().map(|&c| rat_int(c)).collect())
    }

    #[test]
    fn ring_ops() {
        // (x + 1)(x - 1) = x^2 - 1
        let a = p(&[1, 1]);
        let b = p(&[-1, 1]);
        assert_eq!(a.mul(&b), p(&[-1, 0, 1]));
        assert_eq!(a.mul(&b).eval(&rat_int(3)), rat_int(8));
        let (q, r) = p(&[-1, 0, 1]).divrem(&a);
        assert_eq!(q, b);
        assert!(r.is_zero());
    }

    #[test]
    fn compose_and_calculus() {
        // p(x) = x^2 + 1 composed with x - 2 gives x^2 - 4x + 5.
        let sq = p(&[1, 0, 1]);
        let shift = p(&[-2, 1]);
        assert_eq!(sq.compose(&shift), p(&[5, -4, 1]));
        assert_eq!(p(&[5, -4, 1]).derivative(), p(&[-4, 2]));
        let anti = p(&[0, 2]).antiderivative();
        assert_eq!(anti, p(&[0, 0, 1]));
    }

    #[test]
    fn sturm_counts_roots() {
        // (x^2 - 2)(x - 1) has roots -sqrt(2), 1, sqrt(2).
        let poly = p(&[-2, 0, 1]).mul(&p(&[-1, 1]));
        let chain = poly.sturm_chain();
        let count =
            |a: i64, b: i64| Poly::count_roots_in(&chain, &rat_int(a), &rat_int(b));
        assert_eq!(count(-2, 2), 3);
        assert_eq!(count(0, 2), 2);
        assert_eq!(count(-2, 0), 1);
        // Double roots are counted once.
        let dbl = p(&[-1, 1]).mul(&p(&[-1, 1]));
        let chain = dbl.sturm_chain();
        assert_eq!(Poly::count_roots_in(&chain, &rat_int(0), &rat_int(2)), 1);
    }

    #[test]
    fn interval_eval_encloses() {
        let poly = p(&[-2, 0, 1]);
        let iv = RationalInterval::new(rat_int(0), rat_int(2));
        let range = poly.eval_interval(&iv);
        assert!(range.contains(&rat_int(-2)));
        assert!(range.contains(&rat_int(2)));
        assert!(range.contains(&poly.eval(&rat(1, 2))));
    }
}
