//! Computable presentations of the Banach *-algebra L¹(G): exact
//! group-algebra elements over a discrete group, and compactly supported
//! piecewise-polynomial functions on the real line.
//!
//! Indicators of rational intervals generate a dense subalgebra of L¹(ℝ),
//! but convolution immediately leaves the step functions — the convolution
//! square of a box is a triangle. Piecewise polynomials with rational
//! breakpoints are the closure of the indicators under the algebra
//! operations, and every operation on them stays exact: convolution is
//! symbolic integration piece against piece, with output breakpoints the
//! pairwise sums of input breakpoints.
//!
//! Norms are the only inexact quantity. `∫ |f|` is computed piece by
//! piece: a real-coefficient piece is handled exactly by isolating the
//! sign changes with Sturm counts and integrating the antiderivative
//! between them; a genuinely complex piece is enclosed by adaptive
//! bisection using a trapezoid rule whose error term comes from an exact
//! bound on the curvature of `sqrt(|f|²)`.

use crate::error::{Error, Result};
use crate::groups::{GroupElement, GroupSpec};
use crate::poly::Poly;
use crate::scalar::{pow2_neg, rat_int, sqrt_enclose, GaussRat, Rat, RationalInterval};
use num_traits::{Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// A finitely supported function `G → ℚ(i)`: an element of `ℓ¹(G)` with
/// exact coefficients. Zero values are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct L1Discrete {
    group: Arc<GroupSpec>,
    values: BTreeMap<GroupElement, GaussRat>,
}

impl L1Discrete {
    pub fn zero(group: Arc<GroupSpec>) -> L1Discrete {
        L1Discrete { group, values: BTreeMap::new() }
    }

    /// The point mass at a group element.
    pub fn delta(s: GroupElement) -> L1Discrete {
        let group = s.spec().clone();
        L1Discrete { group, values: BTreeMap::from([(s, GaussRat::from_int(1))]) }
    }

    pub fn from_terms(
        group: Arc<GroupSpec>,
        terms: Vec<(GroupElement, GaussRat)>,
    ) -> Result<L1Discrete> {
        let mut values = BTreeMap::new();
        for (s, c) in terms {
            if s.spec() != &group {
                return Err(Error::structural(
                    "support element from a different group",
                ));
            }
            let entry = values.remove(&s).unwrap_or_else(GaussRat::zero) + c;
            if !entry.is_zero() {
                values.insert(s, entry);
            }
        }
        Ok(L1Discrete { group, values })
    }

    pub fn group(&self) -> &Arc<GroupSpec> {
        &self.group
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, s: &GroupElement) -> GaussRat {
        self.values.get(s).cloned().unwrap_or_else(GaussRat::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&GroupElement, &GaussRat)> {
        self.values.iter()
    }

    pub fn support_size(&self) -> usize {
        self.values.len()
    }

    pub fn add(&self, other: &L1Discrete) -> Result<L1Discrete> {
        if self.group != other.group {
            return Err(Error::structural("sum of elements over different groups"));
        }
        let mut values = self.values.clone();
        for (s, c) in &other.values {
            let entry = values.remove(s).unwrap_or_else(GaussRat::zero) + c.clone();
            if !entry.is_zero() {
                values.insert(s.clone(), entry);
            }
        }
        Ok(L1Discrete { group: self.group.clone(), values })
    }

    pub fn scale(&self, c: &GaussRat) -> L1Discrete {
        if c.is_zero() {
            return L1Discrete::zero(self.group.clone());
        }
        let values = self
            .values
            .iter()
            .map(|(s, v)| (s.clone(), v.clone() * c.clone()))
            .collect();
        L1Discrete { group: self.group.clone(), values }
    }

    pub fn sub(&self, other: &L1Discrete) -> Result<L1Discrete> {
        self.add(&other.scale(&GaussRat::from_int(-1)))
    }

    /// The algebra product `(f*g)(r) = Σ_{st=r} f(s)·g(t)`, exact.
    pub fn convolve(&self, other: &L1Discrete) -> Result<L1Discrete> {
        if self.group != other.group {
            return Err(Error::structural(
                "convolution of elements over different groups",
            ));
        }
        let mut values: BTreeMap<GroupElement, GaussRat> = BTreeMap::new();
        for (s, a) in &self.values {
            for (t, b) in &other.values {
                let r = s.mul(t)?;
                let entry =
                    values.remove(&r).unwrap_or_else(GaussRat::zero) + a.clone() * b.clone();
                if !entry.is_zero() {
                    values.insert(r, entry);
                }
            }
        }
        Ok(L1Discrete { group: self.group.clone(), values })
    }

    /// The involution `f^♯(s) = conj(f(s^{-1}))` — the unimodular case,
    /// where no modular-function factor appears.
    pub fn involution(&self) -> L1Discrete {
        let values = self
            .values
            .iter()
            .map(|(s, c)| (s.inv(), c.conj()))
            .collect();
        L1Discrete { group: self.group.clone(), values }
    }

    /// Encloses `‖f‖₁ = Σ_s |f(s)|` within `2^-k`. Each modulus
    /// `sqrt(re² + im²)` is enclosed separately at a precision that makes
    /// the sum of the widths small enough; rational moduli come back
    /// exact.
    pub fn l1_norm(&self, k: u32) -> RationalInterval {
        if self.values.is_empty() {
            return RationalInterval::point(Rat::zero());
        }
        let extra = usize::BITS - (self.values.len() - 1).leading_zeros();
        let prec = k + extra + 1;
        let mut total = RationalInterval::point(Rat::zero());
        for c in self.values.values() {
            total = &total + &sqrt_enclose(&c.abs_sq(), prec);
        }
        total
    }

    /// `(group word, re, im)` rows in canonical support order.
    pub fn triples(&self) -> Vec<(String, Rat, Rat)> {
        self.values
            .iter()
            .map(|(s, c)| (s.to_string(), c.re.clone(), c.im.clone()))
            .collect()
    }
}

impl fmt::Display for L1Discrete {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.values.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .values
            .iter()
            .map(|(s, c)| format!("({c})*d[{s}]"))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// A compactly supported piecewise polynomial on ℝ with Gaussian-rational
/// coefficients and rational breakpoints: the closure of the rational
/// interval indicators under the L¹(ℝ) algebra operations.
///
/// Canonical form: strictly increasing breakpoints, one polynomial per
/// gap, no zero polynomial at either end, and no two adjacent equal
/// polynomials. The zero function stores no breakpoints at all, so
/// structural equality is equality almost everywhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct L1PiecewisePoly {
    breaks: Vec<Rat>,
    pieces: Vec<Poly<GaussRat>>,
}

impl L1PiecewisePoly {
    pub fn zero() -> L1PiecewisePoly {
        L1PiecewisePoly { breaks: Vec::new(), pieces: Vec::new() }
    }

    pub fn new(breaks: Vec<Rat>, pieces: Vec<Poly<GaussRat>>) -> Result<L1PiecewisePoly> {
        if breaks.is_empty() && pieces.is_empty() {
            return Ok(L1PiecewisePoly::zero());
        }
        if breaks.len() != pieces.len() + 1 {
            return Err(Error::structural(
                "piecewise polynomial needs exactly one more breakpoint than pieces",
            ));
        }
        if breaks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::structural(
                "breakpoints must be strictly increasing",
            ));
        }
        Ok(Self::canonical(breaks, pieces))
    }

    /// The indicator of `[a, b)`.
    pub fn indicator(a: Rat, b: Rat) -> Result<L1PiecewisePoly> {
        Self::new(vec![a, b], vec![Poly::constant(GaussRat::from_int(1))])
    }

    fn canonical(mut breaks: Vec<Rat>, mut pieces: Vec<Poly<GaussRat>>) -> L1PiecewisePoly {
        while pieces.first().is_some_and(Poly::is_zero) {
            pieces.remove(0);
            breaks.remove(0);
        }
        while pieces.last().is_some_and(Poly::is_zero) {
            pieces.pop();
            breaks.pop();
        }
        if pieces.is_empty() {
            return L1PiecewisePoly::zero();
        }
        let mut out_breaks = vec![breaks[0].clone()];
        let mut out_pieces: Vec<Poly<GaussRat>> = Vec::new();
        for (j, piece) in pieces.into_iter().enumerate() {
            if out_pieces.last() == Some(&piece) {
                continue;
            }
            if !out_pieces.is_empty() {
                out_breaks.push(breaks[j].clone());
            }
            out_pieces.push(piece);
        }
        out_breaks.push(breaks.last().unwrap().clone());
        L1PiecewisePoly { breaks: out_breaks, pieces: out_pieces }
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn breakpoints(&self) -> &[Rat] {
        &self.breaks
    }

    /// `(breakpoint list, coefficient rows)` — the serialization layout.
    pub fn rows(&self) -> (Vec<Rat>, Vec<Vec<GaussRat>>) {
        (
            self.breaks.clone(),
            self.pieces.iter().map(|p| p.coeffs().to_vec()).collect(),
        )
    }

    /// The polynomial in effect at a point (zero outside the support;
    /// half-open pieces `[b_j, b_{j+1})`).
    fn poly_on(&self, x: &Rat) -> Poly<GaussRat> {
        for j in 0..self.pieces.len() {
            if &self.breaks[j] <= x && x < &self.breaks[j + 1] {
                return self.pieces[j].clone();
            }
        }
        Poly::zero()
    }

    pub fn value_at(&self, x: &Rat) -> GaussRat {
        self.poly_on(x).eval(&GaussRat::from_rat(x.clone()))
    }

    pub fn add(&self, other: &L1PiecewisePoly) -> L1PiecewisePoly {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let mut cuts: Vec<Rat> = self.breaks.iter().chain(&other.breaks).cloned().collect();
        cuts.sort();
        cuts.dedup();
        let pieces = cuts
            .windows(2)
            .map(|w| {
                let m = (&w[0] + &w[1]) / rat_int(2);
                self.poly_on(&m).add(&other.poly_on(&m))
            })
            .collect();
        Self::canonical(cuts, pieces)
    }

    pub fn scale(&self, c: &GaussRat) -> L1PiecewisePoly {
        Self::canonical(
            self.breaks.clone(),
            self.pieces.iter().map(|p| p.scale(c)).collect(),
        )
    }

    pub fn sub(&self, other: &L1PiecewisePoly) -> L1PiecewisePoly {
        self.add(&other.scale(&GaussRat::from_int(-1)))
    }

    /// Translation `t ↦ f(t − c)`.
    pub fn translate(&self, c: &Rat) -> L1PiecewisePoly {
        let shift = Poly::from_coeffs(vec![
            GaussRat::from_rat(-c.clone()),
            GaussRat::from_int(1),
        ]);
        Self::canonical(
            self.breaks.iter().map(|b| b + c).collect(),
            self.pieces.iter().map(|p| p.compose(&shift)).collect(),
        )
    }

    /// The involution `f^♯(t) = conj(f(−t))` — reflection plus conjugate,
    /// the unimodular involution of L¹(ℝ).
    pub fn involution(&self) -> L1PiecewisePoly {
        let reflect = Poly::from_coeffs(vec![GaussRat::zero(), GaussRat::from_int(-1)]);
        let breaks = self.breaks.iter().rev().map(|b| -b.clone()).collect();
        let pieces = self
            .pieces
            .iter()
            .rev()
            .map(|p| {
                Poly::from_coeffs(p.coeffs().iter().map(GaussRat::conj).collect())
                    .compose(&reflect)
            })
            .collect();
        Self::canonical(breaks, pieces)
    }

    /// Exact convolution `(f*g)(x) = ∫ f(t)·g(x−t) dt`. The result is
    /// piecewise polynomial with breakpoints among the pairwise sums
    /// `aᵢ + bⱼ`: between two consecutive sums, the `t`-integration limits
    /// `max(aᵢ, x−bⱼ₊₁)` and `min(aᵢ₊₁, x−bⱼ)` settle on fixed linear
    /// branches, so each piece-pair contribution is one exact polynomial,
    /// obtained by integrating `P(t)·Q(x−t)` symbolically in `t` and
    /// substituting the branch polynomials for the limits.
    pub fn convolve(&self, other: &L1PiecewisePoly) -> L1PiecewisePoly {
        if self.is_zero() || other.is_zero() {
            return L1PiecewisePoly::zero();
        }
        let mut cuts = Vec::new();
        for a in &self.breaks {
            for b in &other.breaks {
                cuts.push(a + b);
            }
        }
        cuts.sort();
        cuts.dedup();
        // Antiderivative in t of P_i(t)·Q_j(x−t), as coefficients in t
        // whose entries are polynomials in x; computed once per pair.
        let anti: Vec<Vec<Vec<Poly<GaussRat>>>> = self
            .pieces
            .iter()
            .map(|p| other.pieces.iter().map(|q| anti_product(p, q)).collect())
            .collect();
        let two = rat_int(2);
        let mut pieces = Vec::with_capacity(cuts.len() - 1);
        for w in cuts.windows(2) {
            let m = (&w[0] + &w[1]) / &two;
            let mut acc: Poly<GaussRat> = Poly::zero();
            for i in 0..self.pieces.len() {
                let (a0, a1) = (&self.breaks[i], &self.breaks[i + 1]);
                for j in 0..other.pieces.len() {
                    let (b0, b1) = (&other.breaks[j], &other.breaks[j + 1]);
                    let lo_at_m = (&m - b1).max(a0.clone());
                    let hi_at_m = (&m - b0).min(a1.clone());
                    if lo_at_m >= hi_at_m {
                        continue;
                    }
                    let lo = if *a0 >= &m - b1 {
                        Poly::constant(GaussRat::from_rat(a0.clone()))
                    } else {
                        linear_x_minus(b1)
                    };
                    let hi = if *a1 <= &m - b0 {
                        Poly::constant(GaussRat::from_rat(a1.clone()))
                    } else {
                        linear_x_minus(b0)
                    };
                    let term = eval_in_t(&anti[i][j], &hi).sub(&eval_in_t(&anti[i][j], &lo));
                    acc = acc.add(&term);
                }
            }
            pieces.push(acc);
        }
        Self::canonical(cuts, pieces)
    }

    /// A rational bound on the essential sup of `|f|`, from interval
    /// evaluation of the real and imaginary parts over each piece.
    pub fn sup_bound(&self) -> Rat {
        let mut best = Rat::zero();
        for j in 0..self.pieces.len() {
            let span = RationalInterval::new(
                self.breaks[j].clone(),
                self.breaks[j + 1].clone(),
            );
            let (re, im) = split_parts(&self.pieces[j]);
            let bound = abs_max(&re.eval_interval(&span)) + abs_max(&im.eval_interval(&span));
            best = best.max(bound);
        }
        best
    }

    /// Encloses `‖f‖₁ = ∫ |f|` with width below `2^-k`.
    ///
    /// The integral is computed on a canonical representative of the
    /// reflection orbit `{f, f^♯}`, which makes the enclosure of `‖f^♯‖₁`
    /// literally identical to that of `‖f‖₁` (the norm itself is
    /// reflection- and conjugation-invariant). Per piece: real pieces get
    /// an exact sign split from Sturm counts; complex pieces an adaptive
    /// trapezoid enclosure.
    pub fn l1_norm(&self, k: u32) -> RationalInterval {
        if self.is_zero() {
            return RationalInterval::point(Rat::zero());
        }
        let refl = self.involution();
        let me = if refl.orbit_key() < self.orbit_key() { &refl } else { self };
        let budget = pow2_neg(k + 1) / rat_int(me.pieces.len() as i64);
        let mut total = RationalInterval::point(Rat::zero());
        for j in 0..me.pieces.len() {
            let part = piece_abs_integral(
                &me.pieces[j],
                &me.breaks[j],
                &me.breaks[j + 1],
                &budget,
            );
            total = &total + &part;
        }
        total
    }

    fn orbit_key(&self) -> (Vec<Rat>, Vec<Vec<(Rat, Rat)>>) {
        (
            self.breaks.clone(),
            self.pieces
                .iter()
                .map(|p| {
                    p.coeffs()
                        .iter()
                        .map(|c| (c.re.clone(), c.im.clone()))
                        .collect()
                })
                .collect(),
        )
    }
}

impl fmt::Display for L1PiecewisePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = (0..self.pieces.len())
            .map(|j| {
                let coeffs: Vec<String> =
                    self.pieces[j].coeffs().iter().map(|c| format!("({c})")).collect();
                format!(
                    "[{}, {}): {}",
                    self.breaks[j],
                    self.breaks[j + 1],
                    if coeffs.is_empty() { "0".to_string() } else { coeffs.join(" + t*") }
                )
            })
            .collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// `x − b` as a polynomial in `x`.
fn linear_x_minus(b: &Rat) -> Poly<GaussRat> {
    Poly::from_coeffs(vec![GaussRat::from_rat(-b.clone()), GaussRat::from_int(1)])
}

/// The antiderivative in `t` of `P(t)·Q(x−t)`: entry `l` is the
/// polynomial in `x` multiplying `t^l`.
fn anti_product(p: &Poly<GaussRat>, q: &Poly<GaussRat>) -> Vec<Poly<GaussRat>> {
    let (Some(pdeg), Some(qdeg)) = (p.degree(), q.degree()) else {
        return vec![Poly::zero()];
    };
    // Q(x−t) = Σ_l t^l · Σ_{m≥l} q_m·C(m,l)·(−1)^l·x^{m−l}.
    let qt: Vec<Poly<GaussRat>> = (0..=qdeg)
        .map(|l| {
            let sign = if l % 2 == 0 { 1 } else { -1 };
            Poly::from_coeffs(
                (l..=qdeg)
                    .map(|m| {
                        q.coeff(m) * GaussRat::from_rat(binomial(m, l) * rat_int(sign))
                    })
                    .collect(),
            )
        })
        .collect();
    let mut s: Vec<Poly<GaussRat>> = vec![Poly::zero(); pdeg + qdeg + 1];
    for (i, pc) in p.coeffs().iter().enumerate() {
        if pc.is_zero() {
            continue;
        }
        for (l, qc) in qt.iter().enumerate() {
            s[i + l] = s[i + l].add(&qc.scale(pc));
        }
    }
    let mut anti = vec![Poly::zero()];
    for (n, sn) in s.into_iter().enumerate() {
        let inv = GaussRat::from_rat(rat_int(1) / rat_int(n as i64 + 1));
        anti.push(sn.scale(&inv));
    }
    anti
}

/// Evaluates a `t`-antiderivative at `t = u(x)`, yielding a polynomial in
/// `x` by Horner in `u`.
fn eval_in_t(anti: &[Poly<GaussRat>], u: &Poly<GaussRat>) -> Poly<GaussRat> {
    let mut acc = Poly::zero();
    for a in anti.iter().rev() {
        acc = acc.mul(u).add(a);
    }
    acc
}

fn binomial(m: usize, l: usize) -> Rat {
    let mut acc = rat_int(1);
    for j in 0..l {
        acc = acc * rat_int((m - j) as i64) / rat_int((j + 1) as i64);
    }
    acc
}

fn split_parts(p: &Poly<GaussRat>) -> (Poly<Rat>, Poly<Rat>) {
    (
        Poly::from_coeffs(p.coeffs().iter().map(|c| c.re.clone()).collect()),
        Poly::from_coeffs(p.coeffs().iter().map(|c| c.im.clone()).collect()),
    )
}

fn abs_max(iv: &RationalInterval) -> Rat {
    iv.lo.abs().max(iv.hi.abs())
}

/// Smallest `j ≥ 0` with `2^-j ≤ q`; requires `q > 0`.
fn bits_for(q: &Rat) -> u32 {
    let mut j = 0;
    while pow2_neg(j) > *q && j < 4096 {
        j += 1;
    }
    j
}

/// Widens `iv` outward onto the grid of multiples of `2^-bits`. Costs at
/// most `2^(1-bits)` of width and keeps every accepted quadrature leaf on
/// a power-of-two denominator, so sums over many leaves stay small
/// instead of accreting the incommensurable denominators the trapezoid
/// arithmetic would otherwise produce.
fn snap_outward(iv: &RationalInterval, bits: u32) -> RationalInterval {
    let step = pow2_neg(bits);
    RationalInterval::new(
        (&iv.lo / &step).floor() * &step,
        (&iv.hi / &step).ceil() * &step,
    )
}

/// Encloses `∫_a^b |p|` within `budget`.
fn piece_abs_integral(
    p: &Poly<GaussRat>,
    a: &Rat,
    b: &Rat,
    budget: &Rat,
) -> RationalInterval {
    let (re, im) = split_parts(p);
    if re.is_zero() && im.is_zero() {
        return RationalInterval::point(Rat::zero());
    }
    if im.is_zero() {
        return real_abs_integral(&re, a, b, budget);
    }
    if re.is_zero() {
        return real_abs_integral(&im, a, b, budget);
    }
    let s = re.mul(&re).add(&im.mul(&im));
    complex_abs_integral(&s, a, b, budget)
}

/// Exact-where-possible `∫_a^b |p|` for a real polynomial: segments with
/// no interior sign change contribute the exact `|P(b) − P(a)|`; segments
/// still containing roots are bisected until the trivial bounds
/// `[|P(b)−P(a)|, (b−a)·sup|p|]` are tight enough. Near a root the sup
/// bound vanishes with the segment, so the recursion terminates.
fn real_abs_integral(p: &Poly<Rat>, a: &Rat, b: &Rat, budget: &Rat) -> RationalInterval {
    let chain = p.sturm_chain();
    let anti = p.antiderivative();
    fn segment(
        p: &Poly<Rat>,
        chain: &[Poly<Rat>],
        anti: &Poly<Rat>,
        a: &Rat,
        b: &Rat,
        budget: &Rat,
    ) -> RationalInterval {
        let mut interior = Poly::count_roots_in(chain, a, b);
        if interior > 0 && p.eval(b).is_zero() {
            interior -= 1;
        }
        let swept = (anti.eval(b) - anti.eval(a)).abs();
        if interior == 0 {
            return RationalInterval::point(swept);
        }
        let span = RationalInterval::new(a.clone(), b.clone());
        let upper = (b - a) * abs_max(&p.eval_interval(&span));
        if &upper - &swept <= *budget {
            return RationalInterval::new(swept, upper);
        }
        let m = (a + b) / rat_int(2);
        let half = budget / rat_int(2);
        let left = segment(p, chain, anti, a, &m, &half);
        let right = segment(p, chain, anti, &m, b, &half);
        &left + &right
    }
    segment(p, &chain, &anti, a, b, budget)
}

/// Encloses `∫_a^b sqrt(s)` for a real polynomial `s ≥ 0` (here
/// `s = re² + im²`, so every real zero of `s` has even multiplicity).
///
/// Adaptive bisection with two certified rules and a budget allocated in
/// proportion to segment length, so acceptance thresholds scale with the
/// segments and no uniform recursion depth is forced. The range rule
/// `(b−a)·sqrt(range of s)` settles segments near the zeros of `s`
/// quadratically. Elsewhere the sign of `y″ = (2ss″ − s′²)/(4s^{3/2})`
/// is certified by interval-evaluating its polynomial numerator; on a
/// segment of certified convexity the midpoint and trapezoid rules give
/// two-sided bounds (tangent lines versus chords), with no curvature
/// constant entering at all, and their gap telescopes along the
/// subdivision. A vanishing numerator means `sqrt(s)` is piecewise
/// linear, where the trapezoid value alone is exact.
fn complex_abs_integral(s: &Poly<Rat>, a: &Rat, b: &Rat, budget: &Rat) -> RationalInterval {
    let ds = s.derivative();
    let density = budget / (b - a);
    let ctx = SqrtQuadrature {
        s,
        ds: &ds,
        density: &density,
        prec_range: bits_for(&(&density / rat_int(2))) + 1,
        prec_value: bits_for(&(&density / rat_int(8))) + 1,
    };
    let va = sqrt_enclose(&s.eval(a), ctx.prec_value);
    let vb = sqrt_enclose(&s.eval(b), ctx.prec_value);
    ctx.segment(a, b, &va, &vb)
}

struct SqrtQuadrature<'a> {
    s: &'a Poly<Rat>,
    ds: &'a Poly<Rat>,
    density: &'a Rat,
    prec_range: u32,
    prec_value: u32,
}

impl SqrtQuadrature<'_> {
    /// Encloses `∫_a^b sqrt(s)` given enclosures of `sqrt(s)` at the two
    /// endpoints (which the recursion shares between siblings).
    fn segment(
        &self,
        a: &Rat,
        b: &Rat,
        va: &RationalInterval,
        vb: &RationalInterval,
    ) -> RationalInterval {
        let h = b - a;
        let share = self.density * &h;
        // Accept at half the share and spend the rest on snapping the
        // leaf to a dyadic grid, so the leaf still fits its share.
        let half_share = &share / rat_int(2);
        let grid = bits_for(&(&share / rat_int(4)));
        let m = (a + b) / rat_int(2);
        let smid = self.s.eval(&m);
        let span = RationalInterval::new(a.clone(), b.clone());
        // Range of s over the segment: plain interval Horner intersected
        // with the mean-value form s(m) + s′([a,b])·[±h/2]. The centered
        // form keeps the width proportional to the true local derivative,
        // which matters near the even-order zeros of s: there the Horner
        // width (scaling with coefficient size) gets divided by a
        // vanishing sqrt and would stall the subdivision.
        let plain = self.s.eval_interval(&span);
        let half = &h / rat_int(2);
        let dsr = self.ds.eval_interval(&span);
        let swing = &dsr * &RationalInterval::new(-half.clone(), half);
        let srange = RationalInterval::new(
            plain.lo.max(&smid + &swing.lo),
            plain.hi.min(&smid + &swing.hi),
        )
        .clamp_nonneg();
        let sq = srange.sqrt(self.prec_range);
        let by_range = sq.scale(&h);
        if by_range.width() <= half_share {
            return snap_outward(&by_range, grid).clamp_nonneg();
        }
        // Where s stays provably positive, sqrt(s) is differentiable with
        // derivative s′/(2·sqrt(s)), and the oscillation of that
        // derivative bounds the trapezoid error: the graph lies between
        // lines of extreme slope through the endpoints, pinching the
        // integral to within width(d)·h²/8 of the chord. Unlike the range
        // rule this is second order, so it accepts long segments wherever
        // sqrt(s) is close to straight — including the approach to a
        // double zero, where the range rule alone would grind along at a
        // fixed step set by the slope.
        if sq.lo.is_positive() {
            let recip = RationalInterval::new(
                rat_int(1) / (rat_int(2) * sq.hi.clone()),
                rat_int(1) / (rat_int(2) * sq.lo.clone()),
            );
            let d = &dsr * &recip;
            let err = d.width() * &h * &h / rat_int(8);
            let chord = (va + vb).scale(&(&h / rat_int(2)));
            let trap = RationalInterval::new(
                (&chord.lo - &err).max(by_range.lo.clone()),
                (&chord.hi + &err).min(by_range.hi.clone()),
            );
            if trap.width() <= half_share {
                return snap_outward(&trap, grid).clamp_nonneg();
            }
        }
        let vm = sqrt_enclose(&smid, self.prec_value);
        let left = self.segment(a, &m, va, &vm);
        let right = self.segment(&m, b, &vm, vb);
        &left + &right
    }
}
