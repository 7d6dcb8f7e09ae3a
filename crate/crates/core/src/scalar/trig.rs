//! Certified enclosures of the real and imaginary parts of roots of unity
//! and cyclotomic numbers.
//!
//! Rational and Gaussian values pass through exactly; everything else goes
//! through `π` by Machin's formula and rational Taylor sums for sine and
//! cosine, with explicit alternating-series and tail-ratio remainder
//! bounds, so the returned intervals are genuine enclosures at every
//! precision.

use super::{pow2_neg, rat_int, Cyclo, Rat, RationalInterval, RootOfUnity};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Encloses `π` to width below `2^-k`, by Machin's formula
/// `π = 16·arctan(1/5) − 4·arctan(1/239)`.
pub fn pi_enclosure(k: u32) -> RationalInterval {
    let a5 = arctan_recip(5, k + 5);
    let a239 = arctan_recip(239, k + 5);
    RationalInterval::new(
        rat_int(16) * &a5.lo - rat_int(4) * &a239.hi,
        rat_int(16) * &a5.hi - rat_int(4) * &a239.lo,
    )
}

/// `arctan(1/x)` for an integer `x ≥ 2`, to width below `2^-k`. The Taylor
/// series alternates with decreasing terms, so the tail after any partial
/// sum is bounded by the next term and carries its sign.
fn arctan_recip(x: i64, k: u32) -> RationalInterval {
    let eps = pow2_neg(k);
    let x2 = BigInt::from(x) * BigInt::from(x);
    let mut power = BigInt::from(x);
    let mut sum = Rat::zero();
    let mut i: u64 = 0;
    loop {
        let term = Rat::new(BigInt::one(), BigInt::from(2 * i + 1) * &power);
        if term < eps {
            return if i % 2 == 0 {
                RationalInterval::new(sum.clone(), sum + term)
            } else {
                RationalInterval::new(&sum - &term, sum.clone())
            };
        }
        if i % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
        power *= &x2;
        i += 1;
    }
}

/// Encloses `cos(t)` for rational `t` with `|t| ≤ 8`, to width below
/// `2^-k`.
pub fn cos_enclosure(t: &Rat, k: u32) -> RationalInterval {
    taylor_circular(t, k, true)
}

/// Encloses `sin(t)` for rational `t` with `|t| ≤ 8`, to width below
/// `2^-k`.
pub fn sin_enclosure(t: &Rat, k: u32) -> RationalInterval {
    taylor_circular(t, k, false)
}

fn taylor_circular(t: &Rat, k: u32, even: bool) -> RationalInterval {
    assert!(t.abs() <= rat_int(8), "Taylor window for sin/cos is |t| <= 8");
    let eps = pow2_neg(k + 2);
    let t2 = t * t;
    let mut degree: u64 = if even { 0 } else { 1 };
    let mut term: Rat = if even { Rat::one() } else { t.clone() };
    let mut sum = Rat::zero();
    loop {
        sum += &term;
        let step = rat_int(((degree + 1) * (degree + 2)) as i64);
        let next_mag = term.abs() * &t2 / &step;
        // Once successive omitted terms shrink by at least half, the tail
        // is below twice its first term.
        let ratio_ok = &t2 + &t2 <= rat_int(((degree + 3) * (degree + 4)) as i64);
        if ratio_ok && &next_mag + &next_mag <= eps {
            return RationalInterval::new(&sum - &eps, &sum + &eps);
        }
        term = -(term * &t2 / step);
        degree += 2;
    }
}

/// Encloses the real and imaginary parts of a root of unity to width
/// below `2^-k` each; exact points whenever the root is Gaussian.
pub fn root_enclosure(r: &RootOfUnity, k: u32) -> (RationalInterval, RationalInterval) {
    if let Some(g) = r.to_gauss() {
        return (RationalInterval::point(g.re), RationalInterval::point(g.im));
    }
    // θ = 2π·j/n, safely inside the Taylor window [0, 2π).
    let frac = Rat::new(BigInt::from(2 * r.numer()), BigInt::from(r.order()));
    let theta = pi_enclosure(k + 4).scale(&frac);
    let mid = theta.midpoint();
    let half = theta.width() / rat_int(2);
    // sin and cos are 1-Lipschitz, so widening the midpoint enclosure by
    // the angle uncertainty keeps the certificate honest.
    let c = cos_enclosure(&mid, k + 2);
    let s = sin_enclosure(&mid, k + 2);
    (
        RationalInterval::new(&c.lo - &half, &c.hi + &half),
        RationalInterval::new(&s.lo - &half, &s.hi + &half),
    )
}

/// Encloses the real and imaginary parts of a cyclotomic number to width
/// below `2^-k` each; exact points whenever the value is Gaussian.
pub fn cyclo_enclosure(c: &Cyclo, k: u32) -> (RationalInterval, RationalInterval) {
    if let Some(g) = c.to_gauss() {
        return (RationalInterval::point(g.re), RationalInterval::point(g.im));
    }
    // Per-term widths are scaled by |a_j| when summed, so the per-root
    // precision pays for the coefficient mass up front.
    let mass = c.abs_bound();
    let mut extra = 1u32;
    let mut covered = Rat::one();
    while covered < mass {
        covered *= rat_int(2);
        extra += 1;
    }
    let per_root = k + extra;
    let n = c.order();
    let mut re = RationalInterval::zero();
    let mut im = RationalInterval::zero();
    for (j, a) in c.coeffs().iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        let root = RootOfUnity::new(j as i64, n);
        let (r, i) = root_enclosure(&root, per_root);
        re = &re + &r.scale(a);
        im = &im + &i.scale(a);
    }
    (re, im)
}
