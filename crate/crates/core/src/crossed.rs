//! Symbolic crossed products: expressions in `π(a)`, `u_s`, and scalars
//! over a base algebra with a group action, rewritten to the normal form
//! `Σ_s π(a_s)·u_s` with canonical coefficients.
//!
//! The rewriting follows the defining relations — `u_s^* = u_{s^{-1}}`,
//! `u_s·u_r = u_{sr}`, and `u_s·π(x)·u_s^* = π(α_s(x))` — applied as a
//! bottom-up evaluation into the normal-form algebra. Each step strictly
//! reduces the lexicographic measure (adjoints over non-leaves, then
//! unitaries standing right of a `π`, then adjacent unitary pairs), so the
//! rewriting terminates, and since the relations are confluent the result
//! does not depend on the application order.
//!
//! Two coefficient algebras are supported. Over a finite-dimensional base
//! every operation is exact. Over `L∞(C, μ)` with a measure-preserving
//! action the coefficients are cyclotomic step functions; an atom whose
//! cylinder image is a genuinely infinite union is truncated, and the
//! resulting normal form carries certified bounds on its 2-norm and
//! operator-norm distance from the true element, which every downstream
//! enclosure folds in.

use crate::cantor::{image_enclosure, ActionOracle, BitWord, CylinderUnion, MeasureOracle, Node};
use crate::error::{Error, Result};
use crate::findim::{FinBase, Matrix};
use crate::groups::{Character, GroupElement, GroupOps, GroupSpec};
use crate::presentations::{reduce, LInfinityPresentation, StarPoly};
use crate::scalar::{
    cyclo_enclosure, pow2_neg, rat_int, sqrt_enclose, Cyclo, GaussRat, Rat, RationalInterval,
};
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// A formal crossed-product expression: the free *-algebra over the
/// letters `π(poly)`, `u_s`, and scalars.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CrossedExpr {
    /// The base algebra embedded by the covariant representation.
    Pi(StarPoly),
    /// The translation unitary of a group element; `u_e` is the unit.
    U(GroupElement),
    Scalar(GaussRat),
    Add(Box<CrossedExpr>, Box<CrossedExpr>),
    Mul(Box<CrossedExpr>, Box<CrossedExpr>),
    Adjoint(Box<CrossedExpr>),
    ScalarMul(GaussRat, Box<CrossedExpr>),
}

impl CrossedExpr {
    pub fn pi(poly: StarPoly) -> CrossedExpr {
        CrossedExpr::Pi(poly)
    }

    pub fn u(s: GroupElement) -> CrossedExpr {
        CrossedExpr::U(s)
    }

    pub fn scalar(c: GaussRat) -> CrossedExpr {
        CrossedExpr::Scalar(c)
    }

    pub fn add(self, rhs: CrossedExpr) -> CrossedExpr {
        CrossedExpr::Add(Box::new(self), Box::new(rhs))
    }

    pub fn mul(self, rhs: CrossedExpr) -> CrossedExpr {
        CrossedExpr::Mul(Box::new(self), Box::new(rhs))
    }

    pub fn adjoint(self) -> CrossedExpr {
        CrossedExpr::Adjoint(Box::new(self))
    }

    pub fn scale(self, c: GaussRat) -> CrossedExpr {
        CrossedExpr::ScalarMul(c, Box::new(self))
    }

    pub fn sub(self, rhs: CrossedExpr) -> CrossedExpr {
        self.add(rhs.scale(GaussRat::from_int(-1)))
    }
}

impl fmt::Display for CrossedExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CrossedExpr::Pi(p) => write!(f, "pi({p})"),
            CrossedExpr::U(s) => write!(f, "u[{s}]"),
            CrossedExpr::Scalar(c) => write!(f, "({c})"),
            CrossedExpr::Add(a, b) => write!(f, "({a} + {b})"),
            CrossedExpr::Mul(a, b) => write!(f, "({a} * {b})"),
            CrossedExpr::Adjoint(a) => write!(f, "{a}^*"),
            CrossedExpr::ScalarMul(c, a) => write!(f, "(({c}) * {a})"),
        }
    }
}

/// A cyclotomic-valued step function on Cantor space in canonical trie
/// form: the coefficient algebra of crossed products over `L∞(C, μ)`.
/// Structural equality is equality as functions. This generalizes the
/// Gaussian-rational [`crate::presentations::IndicatorCombination`] just
/// enough to absorb the root-of-unity phases of the dual action.
#[derive(Clone, PartialEq, Eq)]
pub struct StepFn {
    root: Node<Cyclo>,
}

impl StepFn {
    pub fn zero() -> StepFn {
        StepFn { root: Node::Leaf(Cyclo::zero()) }
    }

    pub fn constant(c: Cyclo) -> StepFn {
        StepFn { root: Node::Leaf(c) }
    }

    pub fn indicator(w: &BitWord) -> StepFn {
        StepFn { root: Node::from_word(w.bits(), Cyclo::one(), Cyclo::zero()) }
    }

    /// The indicator of a finite cylinder union, scaled.
    pub fn on_union(u: &CylinderUnion, c: &Cyclo) -> StepFn {
        u.words().iter().fold(StepFn::zero(), |acc, w| {
            acc.add(&StepFn::indicator(w).scale(c))
        })
    }

    pub fn add(&self, other: &StepFn) -> StepFn {
        StepFn { root: self.root.merge(&other.root, &|a, b| a.clone() + b.clone()) }
    }

    /// Pointwise product on the common refinement.
    pub fn mul(&self, other: &StepFn) -> StepFn {
        StepFn { root: self.root.merge(&other.root, &|a, b| a.clone() * b.clone()) }
    }

    /// Pointwise complex conjugate — the adjoint of a function algebra.
    pub fn adjoint(&self) -> StepFn {
        StepFn { root: self.root.map(&|c| c.conj()) }
    }

    pub fn scale(&self, c: &Cyclo) -> StepFn {
        StepFn { root: self.root.map(&|a| a.clone() * c.clone()) }
    }

    pub fn is_zero(&self) -> bool {
        self.root == Node::Leaf(Cyclo::zero())
    }

    /// The non-zero steps of the canonical partition, sorted by word.
    pub fn terms(&self) -> Vec<(BitWord, Cyclo)> {
        let mut out: Vec<(BitWord, Cyclo)> =
            self.root.leaves().into_iter().filter(|(_, c)| !c.is_zero()).collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    /// `∫ f dμ`, exact.
    pub fn integral(&self, measure: &MeasureOracle) -> Cyclo {
        self.terms()
            .into_iter()
            .fold(Cyclo::zero(), |acc, (w, c)| acc + c.scale(&measure.word_measure(&w)))
    }

    /// `∫ |f|² dμ`, exact; a real cyclotomic number.
    pub fn norm_sq(&self, measure: &MeasureOracle) -> Cyclo {
        self.terms().into_iter().fold(Cyclo::zero(), |acc, (w, c)| {
            let sq = c.clone() * c.conj();
            acc + sq.scale(&measure.word_measure(&w))
        })
    }

    /// A rational upper bound on `‖f‖_∞`.
    pub fn sup_bound(&self) -> Rat {
        self.terms()
            .into_iter()
            .map(|(_, c)| c.abs_bound())
            .max()
            .unwrap_or_else(Rat::zero)
    }
}

impl fmt::Display for StepFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.terms();
        if terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = terms.iter().map(|(w, c)| format!("({c})*p[{w}]")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for StepFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A normal-form coefficient: a canonical step function over the Cantor
/// base, or an exact matrix over a finite-dimensional base.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Coefficient {
    Step(StepFn),
    Mat(Matrix),
}

impl Coefficient {
    fn add(&self, other: &Coefficient) -> Coefficient {
        match (self, other) {
            (Coefficient::Step(a), Coefficient::Step(b)) => Coefficient::Step(a.add(b)),
            (Coefficient::Mat(a), Coefficient::Mat(b)) => Coefficient::Mat(a.add(b)),
            _ => unreachable!("coefficient kinds are uniform within an algebra"),
        }
    }

    fn mul(&self, other: &Coefficient) -> Coefficient {
        match (self, other) {
            (Coefficient::Step(a), Coefficient::Step(b)) => Coefficient::Step(a.mul(b)),
            (Coefficient::Mat(a), Coefficient::Mat(b)) => Coefficient::Mat(a.mul(b)),
            _ => unreachable!("coefficient kinds are uniform within an algebra"),
        }
    }

    fn adjoint(&self) -> Coefficient {
        match self {
            Coefficient::Step(a) => Coefficient::Step(a.adjoint()),
            Coefficient::Mat(a) => Coefficient::Mat(a.conj_transpose()),
        }
    }

    fn scale(&self, c: &Cyclo) -> Coefficient {
        match self {
            Coefficient::Step(a) => Coefficient::Step(a.scale(c)),
            Coefficient::Mat(a) => Coefficient::Mat(a.scale(c)),
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            Coefficient::Step(a) => a.is_zero(),
            Coefficient::Mat(a) => a.is_zero(),
        }
    }

    /// A rational upper bound on the operator norm.
    fn sup_bound(&self) -> Rat {
        match self {
            Coefficient::Step(a) => a.sup_bound(),
            // Crude but sound: the operator norm is at most the entrywise
            // 1-norm (via the Frobenius norm).
            Coefficient::Mat(a) => {
                let mut sum = Rat::zero();
                for i in 0..a.rows() {
                    for j in 0..a.cols() {
                        sum += a.get(i, j).abs_bound();
                    }
                }
                sum
            }
        }
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Step(a) => write!(f, "{a}"),
            Coefficient::Mat(a) => write!(f, "{a}"),
        }
    }
}

/// The normal form `Σ_s π(a_s)·u_s`: a finite map from group elements to
/// canonical nonzero coefficients, plus certified bounds on how far the
/// stored element can sit from the element it denotes (zero over exact
/// bases; accrued only by truncated infinite cylinder images).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossedNormalForm {
    coeffs: BTreeMap<GroupElement, Coefficient>,
    defect_two: Rat,
    defect_sup: Rat,
}

impl CrossedNormalForm {
    fn build(coeffs: BTreeMap<GroupElement, Coefficient>, two: Rat, sup: Rat) -> Self {
        let coeffs = coeffs.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        CrossedNormalForm { coeffs, defect_two: two, defect_sup: sup }
    }

    pub fn coefficients(&self) -> &BTreeMap<GroupElement, Coefficient> {
        &self.coeffs
    }

    pub fn coefficient(&self, s: &GroupElement) -> Option<&Coefficient> {
        self.coeffs.get(s)
    }

    pub fn support(&self) -> Vec<GroupElement> {
        self.coeffs.keys().cloned().collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Bound on the 2-norm distance between the stored element and the
    /// element the original expression denotes.
    pub fn defect(&self) -> &Rat {
        &self.defect_two
    }

    /// True when the form denotes its element exactly.
    pub fn is_exact(&self) -> bool {
        self.defect_two.is_zero()
    }

    /// Serialization as (group word, coefficient) pairs in key order.
    pub fn pairs(&self) -> Vec<(String, String)> {
        self.coeffs.iter().map(|(s, c)| (s.to_string(), c.to_string())).collect()
    }

    /// Total operator-norm bound of the stored part.
    fn sup_bound(&self) -> Rat {
        self.coeffs.values().map(Coefficient::sup_bound).sum()
    }

    fn has_defect(&self) -> bool {
        !self.defect_two.is_zero() || !self.defect_sup.is_zero()
    }
}

impl fmt::Display for CrossedNormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .map(|(s, c)| {
                if s.is_identity() {
                    format!("pi({c})")
                } else {
                    format!("pi({c}) * u[{s}]")
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// The base data of a crossed product.
pub enum CrossedBase {
    /// `L∞(C, μ)` with a measure-preserving action given by cylinder
    /// image streams.
    LInfinity { presentation: LInfinityPresentation, action: ActionOracle },
    /// An exact finite-dimensional base.
    FinDim(FinBase),
}

/// A crossed product `A ⋊_α G` with a tracial state, presented by the
/// normal forms above. All operations are methods here because they need
/// the base action and measure.
pub struct CrossedAlgebra {
    group: Arc<GroupSpec>,
    base: CrossedBase,
    pull_budget: usize,
}

/// Pulls allowed per atom while enclosing a cylinder image; generous for
/// every built-in action at the precisions the tool exposes.
const DEFAULT_PULL_BUDGET: usize = 1 << 22;

impl CrossedAlgebra {
    /// The group measure space algebra `L∞(C, μ) ⋊ G`. The action must
    /// demonstrably preserve the measure — that is what makes the dual
    /// weight a trace, which the norm and trace computations here rely
    /// on.
    pub fn over_cantor(measure: MeasureOracle, action: ActionOracle) -> Result<CrossedAlgebra> {
        if !action.preserves(&measure) {
            return Err(Error::unsupported(
                "the crossed product needs an action that preserves the measure \
                 (coordinate rearrangements require an independent product law; \
                 the odometer preserves only the fair coin)",
            ));
        }
        Ok(CrossedAlgebra {
            group: action.group().clone(),
            base: CrossedBase::LInfinity {
                presentation: LInfinityPresentation::new(measure),
                action,
            },
            pull_budget: DEFAULT_PULL_BUDGET,
        })
    }

    /// The crossed product of a finite-dimensional base by its group; the
    /// state preservation checked at the base's construction makes the
    /// dual trace tracial.
    pub fn over_findim(base: FinBase) -> CrossedAlgebra {
        CrossedAlgebra {
            group: base.group().clone(),
            base: CrossedBase::FinDim(base),
            pull_budget: DEFAULT_PULL_BUDGET,
        }
    }

    /// Caps the stream pulls spent per cylinder-image enclosure; exceeding
    /// it surfaces as a budget error rather than a hang.
    pub fn with_pull_budget(mut self, budget: usize) -> CrossedAlgebra {
        self.pull_budget = budget;
        self
    }

    pub fn group(&self) -> &Arc<GroupSpec> {
        &self.group
    }

    pub fn base(&self) -> &CrossedBase {
        &self.base
    }

    pub fn zero(&self) -> CrossedNormalForm {
        CrossedNormalForm::build(BTreeMap::new(), Rat::zero(), Rat::zero())
    }

    pub fn one(&self) -> CrossedNormalForm {
        self.monomial(self.group.identity(), self.unit_coefficient())
    }

    fn monomial(&self, s: GroupElement, c: Coefficient) -> CrossedNormalForm {
        CrossedNormalForm::build(BTreeMap::from([(s, c)]), Rat::zero(), Rat::zero())
    }

    fn unit_coefficient(&self) -> Coefficient {
        match &self.base {
            CrossedBase::LInfinity { .. } => Coefficient::Step(StepFn::constant(Cyclo::one())),
            CrossedBase::FinDim(base) => Coefficient::Mat(base.one()),
        }
    }

    /// Checks that a normal form belongs to this algebra.
    fn check_form(&self, x: &CrossedNormalForm) -> Result<()> {
        for (s, c) in &x.coeffs {
            if s.spec() != &self.group {
                return Err(Error::structural(
                    "normal form indexed by a different group than the algebra's",
                ));
            }
            match (&self.base, c) {
                (CrossedBase::LInfinity { .. }, Coefficient::Step(_)) => {}
                (CrossedBase::FinDim(base), Coefficient::Mat(m)) => base.check_element(m)?,
                _ => {
                    return Err(Error::structural(
                        "normal form carries coefficients of a different base kind",
                    ))
                }
            }
        }
        Ok(())
    }

    /// Evaluates a base *-polynomial to a canonical coefficient.
    fn poly_coefficient(&self, poly: &StarPoly) -> Result<Coefficient> {
        match &self.base {
            CrossedBase::LInfinity { .. } => {
                let combo = reduce(poly);
                let steps = combo.terms().into_iter().fold(StepFn::zero(), |acc, (w, c)| {
                    acc.add(&StepFn::indicator(&w).scale(&Cyclo::from_gauss(&c)))
                });
                Ok(Coefficient::Step(steps))
            }
            CrossedBase::FinDim(base) => Ok(Coefficient::Mat(poly_matrix(base, poly)?)),
        }
    }

    /// `α_g` applied to a coefficient, together with certified bounds on
    /// the truncated remainder: its 2-norm and its sup-norm. Both are zero
    /// unless a cylinder image was a genuinely infinite union.
    fn apply_to_coefficient(
        &self,
        g: &GroupElement,
        c: &Coefficient,
        k: u32,
    ) -> Result<(Coefficient, Rat, Rat)> {
        match (&self.base, c) {
            (CrossedBase::FinDim(base), Coefficient::Mat(m)) => {
                Ok((Coefficient::Mat(base.apply(g, m)?), Rat::zero(), Rat::zero()))
            }
            (CrossedBase::LInfinity { presentation, action }, Coefficient::Step(f)) => {
                let measure = presentation.measure();
                let terms = f.terms();
                // Per-atom measure budgets chosen so the total truncated
                // 2-norm² stays below 2^-(2k+2).
                let count = terms.len().max(1) as i64;
                let budget_sq = &pow2_neg(2 * k + 2) / rat_int(count);
                let mut out = StepFn::zero();
                let mut missing_sq = Rat::zero();
                let mut sup_miss = Rat::zero();
                let mut all_exact = true;
                for (w, c) in terms {
                    let bound = c.abs_bound();
                    let eps = &budget_sq / (&bound * &bound);
                    let cyl = CylinderUnion::cylinder(&w);
                    let enc =
                        image_enclosure(action, measure, g, &cyl, &eps, self.pull_budget)?;
                    out = out.add(&StepFn::on_union(&enc.image, &c));
                    if !enc.exact {
                        all_exact = false;
                        missing_sq += &bound * &bound * (&enc.upper - &enc.lower);
                        sup_miss = sup_miss.max(bound);
                    }
                }
                let fresh_two = if all_exact {
                    Rat::zero()
                } else {
                    sqrt_enclose(&missing_sq, k + 2).hi
                };
                let sup_miss = if all_exact { Rat::zero() } else { sup_miss };
                Ok((Coefficient::Step(out), fresh_two, sup_miss))
            }
            _ => Err(Error::structural("coefficient kind does not match the base")),
        }
    }

    /// Rewrites an expression to normal form. Over an exact base the
    /// result denotes the expression exactly; over `L∞` with infinite
    /// cylinder images it carries a certified defect that shrinks as `k`
    /// grows.
    pub fn normalize(&self, expr: &CrossedExpr, k: u32) -> Result<CrossedNormalForm> {
        match expr {
            CrossedExpr::Pi(p) => Ok(CrossedNormalForm::build(
                BTreeMap::from([(self.group.identity(), self.poly_coefficient(p)?)]),
                Rat::zero(),
                Rat::zero(),
            )),
            CrossedExpr::U(s) => {
                if s.spec() != &self.group {
                    return Err(Error::structural(
                        "translation unitary indexed by a different group",
                    ));
                }
                Ok(self.monomial(s.clone(), self.unit_coefficient()))
            }
            CrossedExpr::Scalar(c) => {
                Ok(self.monomial(
                    self.group.identity(),
                    self.unit_coefficient().scale(&Cyclo::from_gauss(c)),
                ))
            }
            CrossedExpr::Add(a, b) => {
                let x = self.normalize(a, k)?;
                let y = self.normalize(b, k)?;
                self.add(&x, &y)
            }
            CrossedExpr::Mul(a, b) => {
                let x = self.normalize(a, k)?;
                let y = self.normalize(b, k)?;
                self.mul(&x, &y, k)
            }
            CrossedExpr::Adjoint(a) => {
                let x = self.normalize(a, k)?;
                self.adjoint(&x, k)
            }
            CrossedExpr::ScalarMul(c, a) => {
                let x = self.normalize(a, k)?;
                self.scale(c, &x)
            }
        }
    }

    pub fn add(
        &self,
        x: &CrossedNormalForm,
        y: &CrossedNormalForm,
    ) -> Result<CrossedNormalForm> {
        self.check_form(x)?;
        self.check_form(y)?;
        let mut out = x.coeffs.clone();
        for (s, c) in &y.coeffs {
            match out.remove(s) {
                Some(prev) => {
                    out.insert(s.clone(), prev.add(c));
                }
                None => {
                    out.insert(s.clone(), c.clone());
                }
            }
        }
        Ok(CrossedNormalForm::build(
            out,
            &x.defect_two + &y.defect_two,
            &x.defect_sup + &y.defect_sup,
        ))
    }

    /// The convolution product: the coefficient of `r` in `x·y` is
    /// `Σ_{st=r} a_s·α_s(b_t)`.
    pub fn mul(
        &self,
        x: &CrossedNormalForm,
        y: &CrossedNormalForm,
        k: u32,
    ) -> Result<CrossedNormalForm> {
        self.check_form(x)?;
        self.check_form(y)?;
        let mut out: BTreeMap<GroupElement, Coefficient> = BTreeMap::new();
        let mut fresh_two = Rat::zero();
        let mut fresh_sup = Rat::zero();
        for (s, a) in &x.coeffs {
            let mut a_sup = None;
            for (t, b) in &y.coeffs {
                let (moved, d2, dsup) = self.apply_to_coefficient(s, b, k)?;
                if !d2.is_zero() || !dsup.is_zero() {
                    // The truncated piece of α_s(b_t) enters the product
                    // multiplied by a_s, which the sup bound of a_s pays
                    // for.
                    let bound =
                        a_sup.get_or_insert_with(|| a.sup_bound()).clone();
                    fresh_two += &bound * &d2;
                    fresh_sup += &bound * &dsup;
                }
                let r = s.mul(t)?;
                let term = a.mul(&moved);
                match out.remove(&r) {
                    Some(prev) => {
                        out.insert(r, prev.add(&term));
                    }
                    None => {
                        out.insert(r, term);
                    }
                }
            }
        }
        // Carried defects: with x = x̃ + m_x and y = ỹ + m_y, the product
        // error is m_x·y + x̃·m_y, bounded through ‖ab‖₂ ≤ ‖a‖₂‖b‖ and
        // ‖ab‖₂ ≤ ‖a‖‖b‖₂ (the norms a trace gives a bimodule).
        let (carried_two, carried_sup) = if x.has_defect() || y.has_defect() {
            let x_sup = x.sup_bound();
            let y_sup = y.sup_bound();
            let y_true_sup = &y_sup + &y.defect_sup;
            (
                &x.defect_two * &y_true_sup + &x_sup * &y.defect_two,
                &x.defect_sup * &y_true_sup + &x_sup * &y.defect_sup,
            )
        } else {
            (Rat::zero(), Rat::zero())
        };
        Ok(CrossedNormalForm::build(
            out,
            fresh_two + carried_two,
            fresh_sup + carried_sup,
        ))
    }

    /// The involution: `(Σ π(a_s)u_s)^* = Σ π(α_{s^{-1}}(a_s^*))·u_{s^{-1}}`.
    pub fn adjoint(&self, x: &CrossedNormalForm, k: u32) -> Result<CrossedNormalForm> {
        self.check_form(x)?;
        let mut out = BTreeMap::new();
        let mut fresh_two = x.defect_two.clone();
        let mut fresh_sup = x.defect_sup.clone();
        for (s, a) in &x.coeffs {
            let inv = s.inv();
            let (moved, d2, dsup) = self.apply_to_coefficient(&inv, &a.adjoint(), k)?;
            fresh_two += d2;
            fresh_sup += dsup;
            out.insert(inv, moved);
        }
        Ok(CrossedNormalForm::build(out, fresh_two, fresh_sup))
    }

    pub fn scale(&self, c: &GaussRat, x: &CrossedNormalForm) -> Result<CrossedNormalForm> {
        self.check_form(x)?;
        let cy = Cyclo::from_gauss(c);
        let bound = c.re.abs() + c.im.abs();
        let out = x.coeffs.iter().map(|(s, a)| (s.clone(), a.scale(&cy))).collect();
        Ok(CrossedNormalForm::build(
            out,
            &x.defect_two * &bound,
            &x.defect_sup * &bound,
        ))
    }

    /// The realization of a normal form as one exact matrix, available
    /// over finite-dimensional bases.
    pub fn realize(&self, x: &CrossedNormalForm) -> Result<Matrix> {
        self.check_form(x)?;
        match &self.base {
            CrossedBase::FinDim(base) => {
                let coeffs: BTreeMap<GroupElement, Matrix> = x
                    .coeffs
                    .iter()
                    .map(|(s, c)| match c {
                        Coefficient::Mat(m) => (s.clone(), m.clone()),
                        Coefficient::Step(_) => unreachable!("checked against the base kind"),
                    })
                    .collect();
                base.realize(&coeffs)
            }
            CrossedBase::LInfinity { .. } => Err(Error::unsupported(
                "matrix realization needs a finite-dimensional base",
            )),
        }
    }

    /// The trace of a coefficient in the base state.
    fn coefficient_trace(&self, c: &Coefficient) -> Cyclo {
        match (&self.base, c) {
            (CrossedBase::LInfinity { presentation, .. }, Coefficient::Step(f)) => {
                f.integral(presentation.measure())
            }
            (CrossedBase::FinDim(base), Coefficient::Mat(m)) => base.state(m),
            _ => unreachable!("checked against the base kind"),
        }
    }

    /// `τ(c^* c)` of a coefficient — exact, real, nonnegative.
    fn coefficient_norm_sq(&self, c: &Coefficient) -> Cyclo {
        match (&self.base, c) {
            (CrossedBase::LInfinity { presentation, .. }, Coefficient::Step(f)) => {
                f.norm_sq(presentation.measure())
            }
            (CrossedBase::FinDim(base), Coefficient::Mat(m)) => {
                base.state(&m.conj_transpose().mul(m))
            }
            _ => unreachable!("checked against the base kind"),
        }
    }

    /// `τ(c c^*)` of a coefficient.
    fn coefficient_conorm_sq(&self, c: &Coefficient) -> Cyclo {
        match (&self.base, c) {
            (CrossedBase::LInfinity { .. }, _) => self.coefficient_norm_sq(c),
            (CrossedBase::FinDim(base), Coefficient::Mat(m)) => {
                base.state(&m.mul(&m.conj_transpose()))
            }
            _ => unreachable!("checked against the base kind"),
        }
    }

    /// The dual trace `τ̂(Σ π(a_s)u_s) = τ(a_e)`, returned as enclosures
    /// of its real and imaginary parts. Exact values give point intervals;
    /// a defective form widens both parts by its defect, since the dual
    /// trace is 1-Lipschitz for the 2-norm.
    pub fn dual_trace(
        &self,
        x: &CrossedNormalForm,
        k: u32,
    ) -> Result<(RationalInterval, RationalInterval)> {
        self.check_form(x)?;
        let value = x
            .coeffs
            .get(&self.group.identity())
            .map(|c| self.coefficient_trace(c))
            .unwrap_or_else(Cyclo::zero);
        let (re, im) = cyclo_enclosure(&value, k + 1);
        let widen = |iv: RationalInterval| -> RationalInterval {
            if x.defect_two.is_zero() {
                iv
            } else {
                RationalInterval::new(&iv.lo - &x.defect_two, &iv.hi + &x.defect_two)
            }
        };
        Ok((widen(re), widen(im)))
    }

    /// Encloses the squared 2-norm `τ̂(x^* x) = Σ_s τ(a_s^* a_s)` of the
    /// stored part — exact whenever the value is rational.
    fn norm_sq_enclosure(
        &self,
        x: &CrossedNormalForm,
        k: u32,
        co: bool,
    ) -> RationalInterval {
        let total = x.coeffs.values().fold(Cyclo::zero(), |acc, c| {
            acc + if co { self.coefficient_conorm_sq(c) } else { self.coefficient_norm_sq(c) }
        });
        match total.to_rat() {
            Some(q) => RationalInterval::point(q),
            None => cyclo_enclosure(&total, k).0.clamp_nonneg(),
        }
    }

    fn widen_by_defect(iv: RationalInterval, defect: &Rat) -> RationalInterval {
        if defect.is_zero() {
            return iv;
        }
        let lo = &iv.lo - defect;
        RationalInterval::new(
            if lo.is_negative() { Rat::zero() } else { lo },
            &iv.hi + defect,
        )
    }

    /// Encloses `‖x‖₂ = sqrt(τ̂(x^* x))`. The group pieces of a normal
    /// form are orthogonal for the dual trace, so the squared norm is the
    /// exact sum `Σ_s τ(a_s^* a_s)`; a defective form widens the enclosure
    /// by its defect. Width stays below `2^-k` plus twice the defect.
    pub fn norm2(&self, x: &CrossedNormalForm, k: u32) -> Result<RationalInterval> {
        self.check_form(x)?;
        let sq = self.norm_sq_enclosure(x, 2 * k + 4, false);
        Ok(Self::widen_by_defect(sq.sqrt(k + 2), &x.defect_two))
    }

    /// Encloses the ♯-norm `sqrt((τ̂(x^*x) + τ̂(xx^*))/2)`. Over the
    /// tracial bases here it coincides with the 2-norm, and the two
    /// enclosures always overlap; both are exposed because they are
    /// computed by different formulas.
    pub fn sharp_norm(&self, x: &CrossedNormalForm, k: u32) -> Result<RationalInterval> {
        self.check_form(x)?;
        let a = self.norm_sq_enclosure(x, 2 * k + 5, false);
        let b = self.norm_sq_enclosure(x, 2 * k + 5, true);
        let mean = RationalInterval::new(
            (&a.lo + &b.lo) / rat_int(2),
            (&a.hi + &b.hi) / rat_int(2),
        );
        Ok(Self::widen_by_defect(mean.sqrt(k + 2), &x.defect_two))
    }

    /// The dual action of a character: `π(a) ↦ π(a)` and
    /// `u_s ↦ conj(p(s))·u_s`, extended to normal forms coefficientwise.
    /// A *-automorphism, and `dual_action(p) ∘ dual_action(q) =
    /// dual_action(pq)`.
    pub fn dual_action(
        &self,
        p: &Character,
        x: &CrossedNormalForm,
    ) -> Result<CrossedNormalForm> {
        if self.group.order().is_none() || !self.group.is_abelian() {
            return Err(Error::unsupported(
                "the dual action needs a finite abelian group",
            ));
        }
        if p.spec() != &self.group {
            return Err(Error::structural("character of a different group"));
        }
        self.check_form(x)?;
        let mut out = BTreeMap::new();
        for (s, c) in &x.coeffs {
            let phase = Cyclo::from_root(&p.eval(s)?.conj());
            out.insert(s.clone(), c.scale(&phase));
        }
        // Unimodular phases leave both defect bounds unchanged.
        Ok(CrossedNormalForm::build(out, x.defect_two.clone(), x.defect_sup.clone()))
    }
}

/// Evaluates a *-polynomial in a finite-dimensional base: special point
/// `n` is the n-th canonical basis element.
fn poly_matrix(base: &FinBase, poly: &StarPoly) -> Result<Matrix> {
    match poly {
        StarPoly::Point(n) => {
            let basis = base.basis();
            basis.get(*n).cloned().ok_or_else(|| {
                Error::structural(format!(
                    "special point {n} outside the {}-dimensional base",
                    basis.len()
                ))
            })
        }
        StarPoly::Scalar(c) => Ok(base.one().scale(&Cyclo::from_gauss(c))),
        StarPoly::Add(a, b) => Ok(poly_matrix(base, a)?.add(&poly_matrix(base, b)?)),
        StarPoly::Mul(a, b) => Ok(poly_matrix(base, a)?.mul(&poly_matrix(base, b)?)),
        StarPoly::Adjoint(a) => Ok(poly_matrix(base, a)?.conj_transpose()),
        StarPoly::ScalarMul(c, a) => Ok(poly_matrix(base, a)?.scale(&Cyclo::from_gauss(c))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cantor::CoordPerm;
    use crate::findim::BaseKind;
    use crate::groups::characters;
    use crate::scalar::rat;
    use num_traits::One;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gauss(re: (i64, i64), im: (i64, i64)) -> GaussRat {
        GaussRat::new(rat(re.0, re.1), rat(im.0, im.1))
    }

    fn p(text: &str) -> StarPoly {
        StarPoly::indicator(&BitWord::parse(text).unwrap())
    }

    /// Z/2 swapping the first two coordinates of Cantor space — every
    /// cylinder image is finite, so this algebra is exact throughout.
    fn swap_algebra() -> CrossedAlgebra {
        let action = ActionOracle::coordinate_permutation(
            GroupSpec::cyclic(2),
            vec![CoordPerm::swap(0, 1)],
        )
        .unwrap();
        CrossedAlgebra::over_cantor(MeasureOracle::bernoulli(rat(1, 2)).unwrap(), action)
            .unwrap()
    }

    /// Z/3 cycling the first three coordinates.
    fn cycle_algebra() -> CrossedAlgebra {
        let action = ActionOracle::coordinate_permutation(
            GroupSpec::cyclic(3),
            vec![CoordPerm::cycle(&[0, 1, 2]).unwrap()],
        )
        .unwrap();
        CrossedAlgebra::over_cantor(MeasureOracle::bernoulli(rat(1, 2)).unwrap(), action)
            .unwrap()
    }

    /// The adding machine over the fair coin — the inexact workhorse.
    fn odometer_algebra() -> CrossedAlgebra {
        CrossedAlgebra::over_cantor(
            MeasureOracle::bernoulli(rat(1, 2)).unwrap(),
            ActionOracle::odometer(),
        )
        .unwrap()
    }

    fn flip_base() -> FinBase {
        FinBase::function_algebra(
            GroupSpec::cyclic(2),
            vec![rat(1, 2), rat(1, 2)],
            vec![vec![1, 0]],
        )
        .unwrap()
    }

    fn rotation_base() -> FinBase {
        FinBase::function_algebra(
            GroupSpec::cyclic(3),
            vec![rat(1, 3), rat(1, 3), rat(1, 3)],
            vec![vec![1, 2, 0]],
        )
        .unwrap()
    }

    fn pauli_base() -> FinBase {
        let x = Matrix::from_fn(2, 2, |i, j| {
            if i != j {
                Cyclo::one()
            } else {
                Cyclo::zero()
            }
        });
        FinBase::matrix_algebra(
            GroupSpec::cyclic(2),
            Matrix::diagonal(vec![
                Cyclo::from_rat(rat(1, 2)),
                Cyclo::from_rat(rat(1, 2)),
            ]),
            vec![x],
        )
        .unwrap()
    }

    fn random_poly(rng: &mut ChaCha8Rng, depth: usize, points: usize) -> StarPoly {
        if depth == 0 || rng.gen_bool(0.35) {
            return if rng.gen_bool(0.25) {
                StarPoly::scalar(gauss(
                    (rng.gen_range(-2..=2), rng.gen_range(1..=2)),
                    (rng.gen_range(-2..=2), rng.gen_range(1..=2)),
                ))
            } else {
                StarPoly::point(rng.gen_range(0..points))
            };
        }
        match rng.gen_range(0..4) {
            0 => random_poly(rng, depth - 1, points).add(random_poly(rng, depth - 1, points)),
            1 => random_poly(rng, depth - 1, points).mul(random_poly(rng, depth - 1, points)),
            2 => random_poly(rng, depth - 1, points).adjoint(),
            _ => random_poly(rng, depth - 1, points).scale(gauss(
                (rng.gen_range(-2..=2), rng.gen_range(1..=2)),
                (0, 1),
            )),
        }
    }

    fn random_expr(
        rng: &mut ChaCha8Rng,
        depth: usize,
        elements: &[GroupElement],
        points: usize,
    ) -> CrossedExpr {
        if depth == 0 || rng.gen_bool(0.3) {
            return match rng.gen_range(0..3) {
                0 => CrossedExpr::pi(random_poly(rng, 2, points)),
                1 => CrossedExpr::u(elements[rng.gen_range(0..elements.len())].clone()),
                _ => CrossedExpr::scalar(gauss(
                    (rng.gen_range(-2..=2), rng.gen_range(1..=2)),
                    (rng.gen_range(-2..=2), rng.gen_range(1..=2)),
                )),
            };
        }
        match rng.gen_range(0..4) {
            0 => random_expr(rng, depth - 1, elements, points)
                .add(random_expr(rng, depth - 1, elements, points)),
            1 => random_expr(rng, depth - 1, elements, points)
                .mul(random_expr(rng, depth - 1, elements, points)),
            2 => random_expr(rng, depth - 1, elements, points).adjoint(),
            _ => random_expr(rng, depth - 1, elements, points)
                .scale(gauss((rng.gen_range(-2..=2), rng.gen_range(1..=2)), (1, 2))),
        }
    }

    /// Independent evaluation of an expression directly into matrices,
    /// using only the representation operators of the base.
    fn realize_expr(base: &FinBase, e: &CrossedExpr) -> Matrix {
        let n = base.rep_dim().unwrap();
        match e {
            CrossedExpr::Pi(p) => base.rep_pi(&eval_poly(base, p)).unwrap(),
            CrossedExpr::U(s) => base.rep_lambda(s).unwrap(),
            CrossedExpr::Scalar(c) => {
                Matrix::identity(n).scale(&Cyclo::from_gauss(c))
            }
            CrossedExpr::Add(a, b) => realize_expr(base, a).add(&realize_expr(base, b)),
            CrossedExpr::Mul(a, b) => realize_expr(base, a).mul(&realize_expr(base, b)),
            CrossedExpr::Adjoint(a) => base.rep_adjoint(&realize_expr(base, a)).unwrap(),
            CrossedExpr::ScalarMul(c, a) => {
                realize_expr(base, a).scale(&Cyclo::from_gauss(c))
            }
        }
    }

    fn eval_poly(base: &FinBase, p: &StarPoly) -> Matrix {
        match p {
            StarPoly::Point(n) => base.basis()[*n].clone(),
            StarPoly::Scalar(c) => base.one().scale(&Cyclo::from_gauss(c)),
            StarPoly::Add(a, b) => eval_poly(base, a).add(&eval_poly(base, b)),
            StarPoly::Mul(a, b) => eval_poly(base, a).mul(&eval_poly(base, b)),
            StarPoly::Adjoint(a) => eval_poly(base, a).conj_transpose(),
            StarPoly::ScalarMul(c, a) => eval_poly(base, a).scale(&Cyclo::from_gauss(c)),
        }
    }

    #[test]
    fn defining_relations_normalize_as_stated() {
        let alg = swap_algebra();
        let s = alg.group().generator(0);

        // u_s · π(a) · u_s^* = π(α_s(a)): conjugating the indicator of
        // [01] by the coordinate swap moves it to [10].
        let conj = CrossedExpr::u(s.clone())
            .mul(CrossedExpr::pi(p("01")))
            .mul(CrossedExpr::u(s.clone()).adjoint());
        let nf = alg.normalize(&conj, 10).unwrap();
        assert!(nf.is_exact());
        assert_eq!(nf.support(), vec![alg.group().identity()]);
        let expected = alg
            .normalize(&CrossedExpr::pi(p("10")), 10)
            .unwrap();
        assert_eq!(nf, expected);

        // (π(a)·u_s)^* = π(α_{s^{-1}}(a^*))·u_{s^{-1}}.
        let adj = CrossedExpr::pi(p("01")).mul(CrossedExpr::u(s.clone())).adjoint();
        let nf = alg.normalize(&adj, 10).unwrap();
        assert_eq!(nf.support(), vec![s.clone()]); // s has order 2
        let direct = alg
            .normalize(
                &CrossedExpr::pi(p("10")).mul(CrossedExpr::u(s.clone())),
                10,
            )
            .unwrap();
        // α_{s^{-1}}(1_{[01]}^*) = 1_{[10]}, placed left of u_{s^{-1}} = u_s.
        assert_eq!(nf, direct);

        // u_s · u_{s^{-1}} = 1.
        let inv = CrossedExpr::u(s.clone()).mul(CrossedExpr::u(s.inv()));
        assert_eq!(alg.normalize(&inv, 10).unwrap(), alg.one());
        // u_e is the unit after normalization.
        let e = CrossedExpr::u(alg.group().identity());
        assert_eq!(alg.normalize(&e, 10).unwrap(), alg.one());
    }

    #[test]
    fn normalization_is_sound_for_the_matrix_realization() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for base in [flip_base(), rotation_base(), pauli_base()] {
            let alg = CrossedAlgebra::over_findim(base.clone());
            let elements = alg.group().elements().unwrap();
            let points = base.dim();
            for _ in 0..70 {
                let expr = random_expr(&mut rng, 5, &elements, points);
                let nf = alg.normalize(&expr, 10).unwrap();
                assert!(nf.is_exact());
                assert_eq!(
                    alg.realize(&nf).unwrap(),
                    realize_expr(&base, &expr),
                    "normal form changed the realized operator of {expr}"
                );
            }
        }
    }

    #[test]
    fn normal_form_operations_agree_with_normalization() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let base = rotation_base();
        let alg = CrossedAlgebra::over_findim(base);
        let elements = alg.group().elements().unwrap();
        for _ in 0..40 {
            let a = random_expr(&mut rng, 4, &elements, 3);
            let b = random_expr(&mut rng, 4, &elements, 3);
            let (na, nb) = (alg.normalize(&a, 10).unwrap(), alg.normalize(&b, 10).unwrap());
            assert_eq!(
                alg.normalize(&a.clone().mul(b.clone()), 10).unwrap(),
                alg.mul(&na, &nb, 10).unwrap()
            );
            assert_eq!(
                alg.normalize(&a.clone().add(b.clone()), 10).unwrap(),
                alg.add(&na, &nb).unwrap()
            );
            assert_eq!(
                alg.normalize(&a.clone().adjoint(), 10).unwrap(),
                alg.adjoint(&na, 10).unwrap()
            );
        }
    }

    #[test]
    fn product_is_associative_and_star_antimultiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        let alg = CrossedAlgebra::over_findim(pauli_base());
        let elements = alg.group().elements().unwrap();
        for _ in 0..25 {
            let x = alg
                .normalize(&random_expr(&mut rng, 3, &elements, 4), 10)
                .unwrap();
            let y = alg
                .normalize(&random_expr(&mut rng, 3, &elements, 4), 10)
                .unwrap();
            let z = alg
                .normalize(&random_expr(&mut rng, 3, &elements, 4), 10)
                .unwrap();
            let xy = alg.mul(&x, &y, 10).unwrap();
            let yz = alg.mul(&y, &z, 10).unwrap();
            assert_eq!(alg.mul(&xy, &z, 10).unwrap(), alg.mul(&x, &yz, 10).unwrap());
            assert_eq!(
                alg.adjoint(&xy, 10).unwrap(),
                alg.mul(
                    &alg.adjoint(&y, 10).unwrap(),
                    &alg.adjoint(&x, 10).unwrap(),
                    10
                )
                .unwrap()
            );
            assert_eq!(alg.adjoint(&alg.adjoint(&x, 10).unwrap(), 10).unwrap(), x);
        }
    }

    #[test]
    fn convolution_matches_the_closed_forms() {
        let alg = swap_algebra();
        let s = alg.group().generator(0);
        // {e ↦ a}·{s ↦ b} = {s ↦ a·b}.
        let x = alg.normalize(&CrossedExpr::pi(p("0")), 10).unwrap();
        let y = alg
            .normalize(&CrossedExpr::pi(p("00")).mul(CrossedExpr::u(s.clone())), 10)
            .unwrap();
        let xy = alg.mul(&x, &y, 10).unwrap();
        let direct = alg
            .normalize(
                &CrossedExpr::pi(p("0").mul(p("00"))).mul(CrossedExpr::u(s.clone())),
                10,
            )
            .unwrap();
        assert_eq!(xy, direct);
        // {s ↦ 1}·{s^{-1} ↦ 1} = {e ↦ 1}.
        let us = alg.normalize(&CrossedExpr::u(s.clone()), 10).unwrap();
        let usinv = alg.normalize(&CrossedExpr::u(s.inv()), 10).unwrap();
        assert_eq!(alg.mul(&us, &usinv, 10).unwrap(), alg.one());
        // adjoint({s ↦ a}) = {s^{-1} ↦ α_{s^{-1}}(a^*)}.
        let xa = alg
            .normalize(&CrossedExpr::pi(p("01")).mul(CrossedExpr::u(s.clone())), 10)
            .unwrap();
        let adj = alg.adjoint(&xa, 10).unwrap();
        assert_eq!(adj.support(), vec![s.clone()]);
        let coef = adj.coefficient(&s).unwrap();
        match coef {
            Coefficient::Step(f) => {
                let terms = f.terms();
                assert_eq!(terms.len(), 1);
                assert_eq!(terms[0].0, BitWord::parse("10").unwrap());
                assert!(terms[0].1.is_one());
            }
            Coefficient::Mat(_) => panic!("wrong coefficient kind"),
        }
    }

    #[test]
    fn dual_trace_reads_the_identity_coefficient() {
        // τ̂(π(a)·u_s) = 0 for s ≠ e, on both base kinds.
        let alg = swap_algebra();
        let s = alg.group().generator(0);
        let x = alg
            .normalize(&CrossedExpr::pi(p("0")).mul(CrossedExpr::u(s)), 10)
            .unwrap();
        let (re, im) = alg.dual_trace(&x, 10).unwrap();
        assert!(re.is_point() && re.contains(&Rat::zero()));
        assert!(im.is_point() && im.contains(&Rat::zero()));

        // τ̂(π(p_[0])) = μ([0]) = 1/2; τ̂(u_e) = 1.
        let y = alg.normalize(&CrossedExpr::pi(p("0")), 10).unwrap();
        let (re, _) = alg.dual_trace(&y, 10).unwrap();
        assert_eq!(re, RationalInterval::point(rat(1, 2)));
        let (re, _) = alg.dual_trace(&alg.one(), 10).unwrap();
        assert_eq!(re, RationalInterval::point(rat(1, 1)));

        // Over a finite-dimensional base the dual trace must match the
        // vector state of the realization — an independent computation.
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let base = pauli_base();
        let alg = CrossedAlgebra::over_findim(base.clone());
        let elements = alg.group().elements().unwrap();
        for _ in 0..30 {
            let nf = alg
                .normalize(&random_expr(&mut rng, 4, &elements, 4), 10)
                .unwrap();
            let (re, im) = alg.dual_trace(&nf, 10).unwrap();
            let via_matrix = base.vector_state(&alg.realize(&nf).unwrap()).unwrap();
            let g = via_matrix.to_gauss().expect("Gaussian data stays Gaussian");
            assert!(re.contains(&g.re) && im.contains(&g.im));
            assert!(re.is_point() && im.is_point());
        }
    }

    #[test]
    fn dual_trace_is_tracial() {
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        let alg = CrossedAlgebra::over_findim(rotation_base());
        let elements = alg.group().elements().unwrap();
        for _ in 0..25 {
            let x = alg
                .normalize(&random_expr(&mut rng, 3, &elements, 3), 10)
                .unwrap();
            let y = alg
                .normalize(&random_expr(&mut rng, 3, &elements, 3), 10)
                .unwrap();
            let xy = alg.mul(&x, &y, 10).unwrap();
            let yx = alg.mul(&y, &x, 10).unwrap();
            for k in [4, 10, 20] {
                let (re1, im1) = alg.dual_trace(&xy, k).unwrap();
                let (re2, im2) = alg.dual_trace(&yx, k).unwrap();
                assert!(re1.lo <= re2.hi && re2.lo <= re1.hi);
                assert!(im1.lo <= im2.hi && im2.lo <= im1.hi);
            }
        }
    }

    #[test]
    fn two_norms_match_known_values() {
        let alg = swap_algebra();
        let s = alg.group().generator(0);
        // ‖u_s‖₂ = 1 for every s.
        for g in alg.group().elements().unwrap() {
            let u = alg.normalize(&CrossedExpr::u(g), 12).unwrap();
            let n = alg.norm2(&u, 12).unwrap();
            assert!(n.contains(&rat(1, 1)));
            assert!(n.width() < pow2_neg(12));
        }
        // ‖π(p_[0])·u_s‖₂ = sqrt(1/2) under the fair coin.
        let x = alg
            .normalize(&CrossedExpr::pi(p("0")).mul(CrossedExpr::u(s)), 12)
            .unwrap();
        let n = alg.norm2(&x, 12).unwrap();
        assert!(&n.lo * &n.lo <= rat(1, 2) && rat(1, 2) <= &n.hi * &n.hi);
        // ‖π(p_[0]) + π(p_[1])‖₂ = ‖1‖₂ = 1.
        let one = alg
            .normalize(&CrossedExpr::pi(p("0")).add(CrossedExpr::pi(p("1"))), 12)
            .unwrap();
        assert_eq!(one, alg.one());
        assert!(alg.norm2(&one, 12).unwrap().contains(&rat(1, 1)));

        // Cross-check against the realization: the squared norm is the
        // vector state of R^♯·R.
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let base = flip_base();
        let alg = CrossedAlgebra::over_findim(base.clone());
        let elements = alg.group().elements().unwrap();
        for _ in 0..25 {
            let nf = alg
                .normalize(&random_expr(&mut rng, 4, &elements, 2), 12)
                .unwrap();
            let r = alg.realize(&nf).unwrap();
            let sq = base
                .vector_state(&base.rep_adjoint(&r).unwrap().mul(&r))
                .unwrap()
                .to_rat()
                .expect("squared norm of Gaussian data is rational");
            let n = alg.norm2(&nf, 14).unwrap();
            assert!(&n.lo * &n.lo <= sq && sq <= &n.hi * &n.hi);
            if !nf.is_zero() {
                assert!(n.lo.is_positive(), "nonzero form got a norm interval touching 0");
            }
        }
    }

    #[test]
    fn sharp_norm_overlaps_norm2() {
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        let alg = CrossedAlgebra::over_findim(pauli_base());
        let elements = alg.group().elements().unwrap();
        for _ in 0..20 {
            let nf = alg
                .normalize(&random_expr(&mut rng, 4, &elements, 4), 10)
                .unwrap();
            for k in [5, 12] {
                let a = alg.norm2(&nf, k).unwrap();
                let b = alg.sharp_norm(&nf, k).unwrap();
                assert!(a.lo <= b.hi && b.lo <= a.hi, "♯-norm and 2-norm intervals split");
            }
        }
    }

    #[test]
    fn dual_action_twists_by_character_phases() {
        // Z/2: the nontrivial character negates the u_s coefficient and
        // fixes the identity coefficient.
        let alg = swap_algebra();
        let s = alg.group().generator(0);
        let chars = characters(alg.group()).unwrap();
        let x = alg
            .normalize(
                &CrossedExpr::pi(p("0")).add(CrossedExpr::pi(p("1")).mul(CrossedExpr::u(s.clone()))),
                10,
            )
            .unwrap();
        let twisted = alg.dual_action(&chars[1], &x).unwrap();
        let expected = alg
            .normalize(
                &CrossedExpr::pi(p("0")).add(
                    CrossedExpr::pi(p("1"))
                        .mul(CrossedExpr::u(s.clone()))
                        .scale(GaussRat::from_int(-1)),
                ),
                10,
            )
            .unwrap();
        assert_eq!(twisted, expected);

        // It is a *-automorphism: compatible with mul and adjoint, and
        // composition follows the character group.
        let mut rng = ChaCha8Rng::seed_from_u64(79);
        let alg3 = cycle_algebra();
        let chars3 = characters(alg3.group()).unwrap();
        let elements = alg3.group().elements().unwrap();
        for _ in 0..10 {
            let a = alg3
                .normalize(&random_expr(&mut rng, 3, &elements, 6), 10)
                .unwrap();
            let b = alg3
                .normalize(&random_expr(&mut rng, 3, &elements, 6), 10)
                .unwrap();
            for q in &chars3 {
                let qa = alg3.dual_action(q, &a).unwrap();
                let qb = alg3.dual_action(q, &b).unwrap();
                assert_eq!(
                    alg3.dual_action(q, &alg3.mul(&a, &b, 10).unwrap()).unwrap(),
                    alg3.mul(&qa, &qb, 10).unwrap()
                );
                assert_eq!(
                    alg3.dual_action(q, &alg3.adjoint(&a, 10).unwrap()).unwrap(),
                    alg3.adjoint(&qa, 10).unwrap()
                );
                for r in &chars3 {
                    assert_eq!(
                        alg3.dual_action(r, &qa).unwrap(),
                        alg3.dual_action(&q.mul(r).unwrap(), &a).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn character_averaging_projects_onto_the_identity_coefficient() {
        // (1/|G|)·Σ_p α̂_p kills every coefficient off the identity —
        // character orthogonality, computed in exact cyclotomic arithmetic
        // over Z/3 where the phases are not Gaussian.
        let alg = cycle_algebra();
        let chars = characters(alg.group()).unwrap();
        let s = alg.group().generator(0);
        let x = alg
            .normalize(
                &CrossedExpr::pi(p("0"))
                    .add(CrossedExpr::pi(p("1")).mul(CrossedExpr::u(s.clone())))
                    .add(CrossedExpr::pi(p("00")).mul(CrossedExpr::u(s.clone()).mul(CrossedExpr::u(s.clone())))),
                10,
            )
            .unwrap();
        let mut avg = alg.zero();
        for q in &chars {
            avg = alg.add(&avg, &alg.dual_action(q, &x).unwrap()).unwrap();
        }
        let avg = alg.scale(&GaussRat::new(rat(1, 3), rat(0, 1)), &avg).unwrap();
        let projected = alg.normalize(&CrossedExpr::pi(p("0")), 10).unwrap();
        assert_eq!(avg, projected);
    }

    #[test]
    fn dual_fixed_points_are_the_identity_supported_forms() {
        let alg = cycle_algebra();
        let chars = characters(alg.group()).unwrap();
        let s = alg.group().generator(0);
        let fixed = alg.normalize(&CrossedExpr::pi(p("01")), 10).unwrap();
        let moving = alg
            .normalize(&CrossedExpr::pi(p("01")).mul(CrossedExpr::u(s)), 10)
            .unwrap();
        for q in &chars {
            assert_eq!(alg.dual_action(q, &fixed).unwrap(), fixed);
        }
        let moved_by_some = chars
            .iter()
            .any(|q| alg.dual_action(q, &moving).unwrap() != moving);
        assert!(moved_by_some, "a form supported off e must move under some character");
    }

    #[test]
    fn dual_action_requires_a_finite_abelian_group() {
        let odo = odometer_algebra();
        let p0 = Character::trivial(&GroupSpec::cyclic(2)).unwrap();
        assert!(matches!(
            odo.dual_action(&p0, &odo.one()),
            Err(Error::Unsupported(_))
        ));
        let alg = swap_algebra();
        let wrong = Character::trivial(&GroupSpec::cyclic(3)).unwrap();
        assert!(matches!(
            alg.dual_action(&wrong, &alg.one()),
            Err(Error::Structural(_))
        ));
    }

    #[test]
    fn truncated_images_carry_certified_defects() {
        let alg = odometer_algebra();
        let minus = alg.group().element_from_word(&[(0, -1)]).unwrap();
        // x = π(p_[1])·u_{-1} is exact; its adjoint needs α_{+1}(p_[1]),
        // whose support is the infinite union ∪_k [0^k 1].
        let x = alg
            .normalize(&CrossedExpr::pi(p("1")).mul(CrossedExpr::u(minus)), 14)
            .unwrap();
        assert!(x.is_exact());
        let xstar = alg.adjoint(&x, 14).unwrap();
        assert!(!xstar.is_exact());
        assert!(xstar.defect() < &pow2_neg(13));
        assert!(xstar.defect().is_positive());

        // Norms and traces still come back certified: ‖x^*‖₂ = sqrt(1/2).
        let n = alg.norm2(&xstar, 14).unwrap();
        assert!(&n.lo * &n.lo <= rat(1, 2) && rat(1, 2) <= &n.hi * &n.hi);

        // x^*·x = π(α_{+1}(p_[1])) has dual trace 1/2; the enclosure must
        // contain it despite the truncation.
        let prod = alg.mul(&xstar, &x, 14).unwrap();
        let (re, im) = alg.dual_trace(&prod, 14).unwrap();
        assert!(re.contains(&rat(1, 2)));
        assert!(im.contains(&Rat::zero()));
        // And traciality still holds at interval level.
        let prod2 = alg.mul(&x, &xstar, 14).unwrap();
        let (re2, _) = alg.dual_trace(&prod2, 14).unwrap();
        assert!(re.lo <= re2.hi && re2.lo <= re.hi);
    }

    #[test]
    fn defects_shrink_with_the_precision_parameter() {
        let alg = odometer_algebra();
        let minus = alg.group().element_from_word(&[(0, -1)]).unwrap();
        let expr = CrossedExpr::pi(p("1")).mul(CrossedExpr::u(minus)).adjoint();
        let mut last = None;
        for k in [6u32, 10, 16, 22] {
            let nf = alg.normalize(&expr, k).unwrap();
            let d = nf.defect().clone();
            assert!(d < pow2_neg(k - 1));
            if let Some(prev) = last {
                assert!(d < prev);
            }
            last = Some(d);
        }
    }

    #[test]
    fn mismatched_configurations_are_rejected() {
        let alg = swap_algebra();
        let other = cycle_algebra();
        // A unitary from a different group.
        let foreign = CrossedExpr::u(other.group().generator(0));
        assert!(matches!(alg.normalize(&foreign, 10), Err(Error::Structural(_))));
        // A normal form from a different algebra.
        let nf = other.normalize(&CrossedExpr::pi(p("0")), 10).unwrap();
        assert!(matches!(alg.add(&nf, &nf), Err(Error::Structural(_))));
        // Mixed coefficient kinds.
        let fin = CrossedAlgebra::over_findim(flip_base());
        let nf2 = alg.normalize(&CrossedExpr::pi(p("0")), 10).unwrap();
        assert!(matches!(fin.norm2(&nf2, 10), Err(Error::Structural(_))));
        // Point index out of range for a finite-dimensional base.
        assert!(matches!(
            fin.normalize(&CrossedExpr::pi(StarPoly::point(7)), 10),
            Err(Error::Structural(_))
        ));
        // A non-preserving pair is refused up front.
        assert!(matches!(
            CrossedAlgebra::over_cantor(
                MeasureOracle::bernoulli(rat(1, 3)).unwrap(),
                ActionOracle::odometer(),
            ),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn zero_coefficients_are_pruned() {
        let alg = swap_algebra();
        let x = alg.normalize(&CrossedExpr::pi(p("0")), 10).unwrap();
        let minus_x = alg.scale(&GaussRat::from_int(-1), &x).unwrap();
        let sum = alg.add(&x, &minus_x).unwrap();
        assert!(sum.is_zero());
        assert!(sum.coefficients().is_empty());
        assert_eq!(sum, alg.zero());
        let (re, im) = alg.dual_trace(&sum, 10).unwrap();
        assert!(re.contains(&Rat::zero()) && im.contains(&Rat::zero()));
        assert!(alg.norm2(&sum, 10).unwrap().contains(&Rat::zero()));
    }

    #[test]
    fn irrational_cyclotomic_traces_are_enclosed() {
        // Over Z/5 the dual action introduces fifth roots of unity; a
        // single twist of the unit has trace conj(ζ₅), whose real part
        // (√5 − 1)/4... is irrational — the enclosure must still converge.
        let action = ActionOracle::coordinate_permutation(
            GroupSpec::cyclic(5),
            vec![CoordPerm::cycle(&[0, 1, 2, 3, 4]).unwrap()],
        )
        .unwrap();
        let alg = CrossedAlgebra::over_cantor(
            MeasureOracle::bernoulli(rat(1, 2)).unwrap(),
            action,
        )
        .unwrap();
        let chars = characters(alg.group()).unwrap();
        let g = alg.group().generator(0);
        let u = alg.normalize(&CrossedExpr::u(g.clone()), 10).unwrap();
        let twisted = alg.dual_action(&chars[1], &u).unwrap();
        let uinv = alg.normalize(&CrossedExpr::u(g.inv()), 10).unwrap();
        // α̂_p(u_g)·u_g^{-1} = conj(p(g))·1, so the dual trace is the
        // conjugated character value itself.
        let back = alg.mul(&twisted, &uinv, 10).unwrap();
        let (re, im) = alg.dual_trace(&back, 30).unwrap();
        assert!(re.width() < pow2_neg(29) && im.width() < pow2_neg(29));
        // The trace is conj(ζ₅^j) for the generator's character value:
        // whichever fifth root it is, its real part solves 4x² + 2x = 1
        // (for the primitive ones): check |4x² + 2x − 1| small instead of
        // pinning the branch: evaluate at both endpoints and require a
        // sign change or near-zero.
        let f = |x: &Rat| rat(4, 1) * x * x + rat(2, 1) * x - rat(1, 1);
        let (flo, fhi) = (f(&re.lo), f(&re.hi));
        assert!(
            flo.is_negative() != fhi.is_negative()
                || flo.abs() < pow2_neg(20)
                || fhi.abs() < pow2_neg(20),
            "real part of a primitive fifth root must satisfy 4x²+2x−1 = 0"
        );
    }

    #[test]
    fn findim_bases_with_unchecked_data_still_multiply() {
        // The unchecked constructor exists for defect hunting; the crossed
        // product over it computes whatever the data says.
        let broken = FinBase::new_unchecked(
            GroupSpec::cyclic(2),
            BaseKind::FunctionAlgebra { weights: vec![rat(1, 3), rat(2, 3)] },
            vec![crate::findim::Automorphism::Permutation(vec![1, 0])],
        );
        let alg = CrossedAlgebra::over_findim(broken);
        let s = alg.group().generator(0);
        let x = alg
            .normalize(&CrossedExpr::pi(StarPoly::point(0)).mul(CrossedExpr::u(s)), 10)
            .unwrap();
        let xx = alg.mul(&alg.adjoint(&x, 10).unwrap(), &x, 10).unwrap();
        // x^*x = π(α_{s^{-1}}(point 0)) = π(point 1), whose skewed weight
        // is 2/3.
        let (re, _) = alg.dual_trace(&xx, 10).unwrap();
        assert_eq!(re, RationalInterval::point(rat(2, 3)));
    }
}
