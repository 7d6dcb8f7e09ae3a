//! Cylinder sets on Cantor space `C = {0,1}^N`, computable probability
//! measures, and measure-preserving group actions given by cylinder
//! streams.
//!
//! Finite unions of cylinders are kept in a canonical binary-trie form, so
//! equality of [`CylinderUnion`] values is equality of subsets of `C`. The
//! shipped measures (Bernoulli, two-state Markov) assign an exact rational
//! to every cylinder, so measures of unions are exact; interval answers
//! only appear where an action's image stream is genuinely infinite.

use crate::error::{Error, Result};
use crate::groups::{GroupElement, GroupOps, GroupSpec};
use crate::scalar::{pow2_neg, rat, Rat, RationalInterval};
use num_bigint::{BigInt, Sign};
use num_traits::{One, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

/// Scan cap for locating group elements in their fixed enumeration while
/// building shift images. Generous: the built-in groups need at most a few
/// hundred entries.
const INDEX_SCAN_CAP: usize = 1 << 20;

/// A finite binary word. `[w]` is the set of infinite sequences extending
/// `w`; the empty word denotes all of `C` and prints as `e`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitWord(Vec<u8>);

impl BitWord {
    pub fn empty() -> BitWord {
        BitWord(Vec::new())
    }

    pub fn from_bits(bits: &[u8]) -> Result<BitWord> {
        if let Some(&b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::structural(format!("bit out of range: {b}")));
        }
        Ok(BitWord(bits.to_vec()))
    }

    /// Parses `e` (the empty word) or a string of `0`/`1` characters.
    pub fn parse(text: &str) -> Result<BitWord> {
        if text == "e" {
            return Ok(BitWord::empty());
        }
        if text.is_empty() {
            return Err(Error::parse_at(1, 1, "empty cylinder word (use `e` for the full space)"));
        }
        let mut bits = Vec::with_capacity(text.len());
        for (i, c) in text.chars().enumerate() {
            match c {
                '0' => bits.push(0),
                '1' => bits.push(1),
                _ => {
                    return Err(Error::parse_at(
                        1,
                        i as u32 + 1,
                        format!("expected `0` or `1`, found `{c}`"),
                    ))
                }
            }
        }
        Ok(BitWord(bits))
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl PartialOrd for BitWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BitWord {
    /// Length first, then numeric value — the order of the fixed word
    /// enumeration in [`crate::seq::bit_word`].
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Display for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        for &b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}

/// Canonical binary trie with values on the leaves. The smart constructor
/// collapses any split whose children are equal leaves, so two tries are
/// structurally equal iff they define the same function on `C`.
#[derive(Clone, PartialEq, Eq)]
pub(crate) enum Node<V> {
    Leaf(V),
    Split(Box<Node<V>>, Box<Node<V>>),
}

impl<V: Clone + PartialEq> Node<V> {
    pub(crate) fn split(zero: Node<V>, one: Node<V>) -> Node<V> {
        if let (Node::Leaf(a), Node::Leaf(b)) = (&zero, &one) {
            if a == b {
                return zero;
            }
        }
        Node::Split(Box::new(zero), Box::new(one))
    }

    /// The trie that is `inside` on `[word]` and `outside` elsewhere.
    pub(crate) fn from_word(word: &[u8], inside: V, outside: V) -> Node<V> {
        match word.split_first() {
            None => Node::Leaf(inside),
            Some((&b, rest)) => {
                let path = Node::from_word(rest, inside, outside.clone());
                let off = Node::Leaf(outside);
                if b == 0 {
                    Node::split(path, off)
                } else {
                    Node::split(off, path)
                }
            }
        }
    }

    fn children(&self) -> (&Node<V>, &Node<V>) {
        match self {
            Node::Leaf(_) => (self, self),
            Node::Split(zero, one) => (zero, one),
        }
    }

    /// Pointwise combination; canonical if the inputs are.
    pub(crate) fn merge(&self, other: &Node<V>, f: &impl Fn(&V, &V) -> V) -> Node<V> {
        if let (Node::Leaf(a), Node::Leaf(b)) = (self, other) {
            return Node::Leaf(f(a, b));
        }
        let (s0, s1) = self.children();
        let (o0, o1) = other.children();
        Node::split(s0.merge(o0, f), s1.merge(o1, f))
    }

    pub(crate) fn map<W: Clone + PartialEq>(&self, f: &impl Fn(&V) -> W) -> Node<W> {
        match self {
            Node::Leaf(v) => Node::Leaf(f(v)),
            Node::Split(zero, one) => Node::split(zero.map(f), one.map(f)),
        }
    }

    pub(crate) fn leaves(&self) -> Vec<(BitWord, V)> {
        fn walk<V: Clone>(node: &Node<V>, prefix: &mut Vec<u8>, out: &mut Vec<(BitWord, V)>) {
            match node {
                Node::Leaf(v) => out.push((BitWord(prefix.clone()), v.clone())),
                Node::Split(zero, one) => {
                    prefix.push(0);
                    walk(zero, prefix, out);
                    prefix.pop();
                    prefix.push(1);
                    walk(one, prefix, out);
                    prefix.pop();
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    pub(crate) fn depth(&self) -> usize {
        match self {
            Node::Leaf(_) => 0,
            Node::Split(zero, one) => 1 + zero.depth().max(one.depth()),
        }
    }

    /// The constant value on `[word]`, when `word` is at least as deep as
    /// the trie along its path.
    pub(crate) fn value_on(&self, word: &[u8]) -> Option<&V> {
        match (self, word.split_first()) {
            (Node::Leaf(v), _) => Some(v),
            (Node::Split(..), None) => None,
            (Node::Split(zero, one), Some((&b, rest))) => {
                if b == 0 {
                    zero.value_on(rest)
                } else {
                    one.value_on(rest)
                }
            }
        }
    }
}

/// A finite union of cylinders in canonical form: the minimal prefix-free
/// antichain of words covering the set. Equality is set equality.
#[derive(Clone, PartialEq, Eq)]
pub struct CylinderUnion {
    root: Node<bool>,
}

impl CylinderUnion {
    pub fn empty() -> CylinderUnion {
        CylinderUnion { root: Node::Leaf(false) }
    }

    pub fn full() -> CylinderUnion {
        CylinderUnion { root: Node::Leaf(true) }
    }

    pub fn cylinder(w: &BitWord) -> CylinderUnion {
        CylinderUnion { root: Node::from_word(w.bits(), true, false) }
    }

    /// Canonicalizes an arbitrary finite list of words: merges sibling
    /// pairs, absorbs words into their prefixes. Idempotent.
    pub fn normalize<'a>(words: impl IntoIterator<Item = &'a BitWord>) -> CylinderUnion {
        words
            .into_iter()
            .fold(CylinderUnion::empty(), |acc, w| acc.join(&CylinderUnion::cylinder(w)))
    }

    /// The canonical antichain, sorted by (length, bits).
    pub fn words(&self) -> Vec<BitWord> {
        let mut out: Vec<BitWord> = self
            .root
            .leaves()
            .into_iter()
            .filter_map(|(w, v)| if v { Some(w) } else { None })
            .collect();
        out.sort();
        out
    }

    pub fn complement(&self) -> CylinderUnion {
        CylinderUnion { root: self.root.map(&|v| !v) }
    }

    pub fn meet(&self, other: &CylinderUnion) -> CylinderUnion {
        // Short-circuiting on constant leaves keeps intersecting a small
        // union into a large one proportional to the small one's depth.
        fn and(a: &Node<bool>, b: &Node<bool>) -> Node<bool> {
            match (a, b) {
                (Node::Leaf(false), _) | (_, Node::Leaf(false)) => Node::Leaf(false),
                (Node::Leaf(true), x) | (x, Node::Leaf(true)) => x.clone(),
                (Node::Split(a0, a1), Node::Split(b0, b1)) => {
                    Node::split(and(a0, b0), and(a1, b1))
                }
            }
        }
        CylinderUnion { root: and(&self.root, &other.root) }
    }

    pub fn join(&self, other: &CylinderUnion) -> CylinderUnion {
        fn or(a: &Node<bool>, b: &Node<bool>) -> Node<bool> {
            match (a, b) {
                (Node::Leaf(true), _) | (_, Node::Leaf(true)) => Node::Leaf(true),
                (Node::Leaf(false), x) | (x, Node::Leaf(false)) => x.clone(),
                (Node::Split(a0, a1), Node::Split(b0, b1)) => {
                    Node::split(or(a0, b0), or(a1, b1))
                }
            }
        }
        CylinderUnion { root: or(&self.root, &other.root) }
    }

    pub fn is_empty(&self) -> bool {
        self.root == Node::Leaf(false)
    }

    pub fn is_full(&self) -> bool {
        self.root == Node::Leaf(true)
    }

    /// Longest word in the canonical antichain (0 for `∅` and `C`).
    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    /// Membership of the whole cylinder `[w]`; `None` when `[w]` is split
    /// by the union (i.e. `|w|` is shallower than the trie along `w`).
    pub fn membership(&self, w: &BitWord) -> Option<bool> {
        self.root.value_on(w.bits()).copied()
    }

    /// Parses `-` (empty set) or a comma-separated list of words such as
    /// `01,001` (with `e` for the full space).
    pub fn parse(text: &str) -> Result<CylinderUnion> {
        if text == "-" {
            return Ok(CylinderUnion::empty());
        }
        let mut words = Vec::new();
        let mut col = 1u32;
        for part in text.split(',') {
            let w = BitWord::parse(part).map_err(|e| match e {
                Error::Parse { col: c, message, .. } => Error::parse_at(1, col + c - 1, message),
                other => other,
            })?;
            col += part.len() as u32 + 1;
            words.push(w);
        }
        Ok(CylinderUnion::normalize(&words))
    }
}

impl fmt::Display for CylinderUnion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "-");
        }
        let parts: Vec<String> = self.words().iter().map(|w| w.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl fmt::Debug for CylinderUnion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}

/// An exactly-computable probability measure on the cylinder σ-algebra.
#[derive(Clone, PartialEq, Eq)]
pub enum MeasureOracle {
    /// Independent coordinates; each bit equals 1 with probability `p`.
    Bernoulli { p: Rat },
    /// Two-state Markov chain: `initial[b]` weights the first bit, then
    /// `transition[prev][next]` weights each step.
    Markov { initial: [Rat; 2], transition: [[Rat; 2]; 2] },
}

impl MeasureOracle {
    pub fn bernoulli(p: Rat) -> Result<MeasureOracle> {
        if p < Rat::zero() || p > Rat::one() {
            return Err(Error::structural(format!("Bernoulli parameter {p} outside [0,1]")));
        }
        Ok(MeasureOracle::Bernoulli { p })
    }

    pub fn markov(initial: [Rat; 2], transition: [[Rat; 2]; 2]) -> Result<MeasureOracle> {
        let rows = [&initial, &transition[0], &transition[1]];
        for row in rows {
            if row.iter().any(|x| *x < Rat::zero()) {
                return Err(Error::structural("negative Markov parameter"));
            }
            if &row[0] + &row[1] != Rat::one() {
                return Err(Error::structural("Markov row does not sum to 1"));
            }
        }
        Ok(MeasureOracle::Markov { initial, transition })
    }

    /// `μ([w])`, exact.
    pub fn word_measure(&self, w: &BitWord) -> Rat {
        match self {
            MeasureOracle::Bernoulli { p } => {
                let q = Rat::one() - p;
                w.bits()
                    .iter()
                    .map(|&b| if b == 1 { p } else { &q })
                    .product()
            }
            MeasureOracle::Markov { initial, transition } => match w.bits().split_first() {
                None => Rat::one(),
                Some((&first, rest)) => {
                    let mut acc = initial[first as usize].clone();
                    let mut prev = first as usize;
                    for &b in rest {
                        acc *= &transition[prev][b as usize];
                        prev = b as usize;
                    }
                    acc
                }
            },
        }
    }

    /// `μ(U)`, exact: the sum over the canonical (disjoint) antichain.
    pub fn union_measure(&self, u: &CylinderUnion) -> Rat {
        u.words().iter().map(|w| self.word_measure(w)).sum()
    }

    /// Interval interface: the value is rational, so the enclosure is a
    /// point interval whatever the requested precision.
    pub fn measure(&self, u: &CylinderUnion, _k: u32) -> RationalInterval {
        RationalInterval::point(self.union_measure(u))
    }

    /// The bit probability when the measure is an independent product: a
    /// Bernoulli oracle directly, or a Markov oracle whose next-bit law
    /// neither depends on the previous bit nor differs from the initial
    /// one.
    pub fn as_bernoulli(&self) -> Option<Rat> {
        match self {
            MeasureOracle::Bernoulli { p } => Some(p.clone()),
            MeasureOracle::Markov { initial, transition } => {
                if initial[1] == transition[0][1] && initial[1] == transition[1][1] {
                    Some(initial[1].clone())
                } else {
                    None
                }
            }
        }
    }
}

/// A permutation of the coordinates `0..n` (identity beyond `n`), stored
/// as its image table with trailing fixed points trimmed.
#[derive(Clone, PartialEq, Eq)]
pub struct CoordPerm(Vec<u32>);

impl CoordPerm {
    pub fn new(images: Vec<u32>) -> Result<CoordPerm> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if (i as usize) >= n || seen[i as usize] {
                return Err(Error::structural("coordinate map is not a permutation"));
            }
            seen[i as usize] = true;
        }
        Ok(CoordPerm::trimmed(images))
    }

    fn trimmed(mut images: Vec<u32>) -> CoordPerm {
        while images.last().is_some_and(|&i| i as usize == images.len() - 1) {
            images.pop();
        }
        CoordPerm(images)
    }

    pub fn identity() -> CoordPerm {
        CoordPerm(Vec::new())
    }

    pub fn swap(i: u32, j: u32) -> CoordPerm {
        let n = i.max(j) + 1;
        let mut images: Vec<u32> = (0..n).collect();
        images.swap(i as usize, j as usize);
        CoordPerm::trimmed(images)
    }

    /// The cyclic shift `points[0] → points[1] → … → points[0]`.
    pub fn cycle(points: &[u32]) -> Result<CoordPerm> {
        let n = points.iter().copied().max().map_or(0, |m| m + 1);
        let mut images: Vec<u32> = (0..n).collect();
        for (a, b) in points.iter().zip(points.iter().cycle().skip(1)) {
            if images[*a as usize] != *a {
                return Err(Error::structural("repeated point in cycle"));
            }
            images[*a as usize] = *b;
        }
        // A 1-cycle sets images[a] = a back; detect duplicates instead.
        CoordPerm::new(images)
    }

    pub fn apply(&self, i: u32) -> u32 {
        self.0.get(i as usize).copied().unwrap_or(i)
    }

    /// `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &CoordPerm) -> CoordPerm {
        let n = self.0.len().max(other.0.len());
        CoordPerm::trimmed((0..n as u32).map(|i| self.apply(other.apply(i))).collect())
    }

    pub fn inverse(&self) -> CoordPerm {
        let mut images = vec![0u32; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            images[j as usize] = i as u32;
        }
        CoordPerm(images)
    }
}

/// How a group acts on Cantor space.
#[derive(Clone)]
enum ActionKind {
    /// Binary add-with-carry by the generator of `Z`; coordinate 0 is the
    /// least significant bit.
    Odometer,
    /// One finite-support coordinate permutation per group generator;
    /// points move by `(α_g x)_i = x_{σ_g^{-1}(i)}`.
    CoordinatePermutation(Vec<CoordPerm>),
    /// Left translation on `{0,1}^G` pulled back through the group's
    /// fixed enumeration: coordinate `m` holds the bit at `s_m`.
    BernoulliShift,
}

/// A computable measure-preserving action: per group element and cylinder
/// word, a stream of cylinders whose union is the image.
#[derive(Clone)]
pub struct ActionOracle {
    group: Arc<GroupSpec>,
    kind: ActionKind,
}

impl ActionOracle {
    /// The `+1` adding machine of `Z = FreeAbelian(1)`.
    pub fn odometer() -> ActionOracle {
        ActionOracle { group: GroupSpec::free_abelian(1), kind: ActionKind::Odometer }
    }

    /// Coordinate permutations, one per generator of `group`. The
    /// assignment must be a homomorphism: generator relations of the
    /// group are verified against the permutations at construction.
    pub fn coordinate_permutation(
        group: Arc<GroupSpec>,
        perms: Vec<CoordPerm>,
    ) -> Result<ActionOracle> {
        if perms.len() != group.generator_count() {
            return Err(Error::structural(format!(
                "expected {} permutations, got {}",
                group.generator_count(),
                perms.len()
            )));
        }
        validate_perm_assignment(&group, &perms)?;
        Ok(ActionOracle { group, kind: ActionKind::CoordinatePermutation(perms) })
    }

    /// The shift action of `group` on `{0,1}^group`.
    pub fn bernoulli_shift(group: Arc<GroupSpec>) -> ActionOracle {
        ActionOracle { group, kind: ActionKind::BernoulliShift }
    }

    pub fn group(&self) -> &Arc<GroupSpec> {
        &self.group
    }

    /// True when the action demonstrably preserves `measure`, so that
    /// image enclosures converge and measure-theoretic identities like
    /// `μ(α_g(U)) = μ(U)` hold exactly. Conservative: coordinate
    /// rearrangements preserve exactly the independent product measures,
    /// and the odometer is uniquely ergodic with the fair coin as its
    /// invariant law.
    pub fn preserves(&self, measure: &MeasureOracle) -> bool {
        match &self.kind {
            ActionKind::Odometer => measure.as_bernoulli() == Some(rat(1, 2)),
            ActionKind::CoordinatePermutation(_) | ActionKind::BernoulliShift => {
                measure.as_bernoulli().is_some()
            }
        }
    }

    /// A stream of words whose cylinders union to `α_g([w])`. The stream
    /// ends (returns `None`) exactly when that union is a finite one, in
    /// which case the emitted words cover the image exactly.
    pub fn image_stream(&self, g: &GroupElement, w: &BitWord) -> Result<ImageStream> {
        if g.spec() != &self.group {
            return Err(Error::structural("group element does not belong to the action's group"));
        }
        match &self.kind {
            ActionKind::Odometer => {
                let n = g.word().first().map_or(0, |&(_, e)| e);
                odometer_stream(n, w)
            }
            ActionKind::CoordinatePermutation(perms) => {
                let sigma = element_perm(perms, g);
                Ok(constraint_stream(|j| sigma.apply(j), w))
            }
            ActionKind::BernoulliShift => {
                let coords = self.shift_coordinates(g, w.len())?;
                Ok(constraint_stream(|j| coords[j as usize], w))
            }
        }
    }

    /// Coordinates receiving the first `n` coordinates under the shift by
    /// `g`: position `m` maps to the enumeration index of `g·s_m`. For a
    /// finite group, coordinates past its order carry no group label and
    /// stay fixed.
    fn shift_coordinates(&self, g: &GroupElement, n: usize) -> Result<Vec<u32>> {
        let cap = self.group.order().map_or(INDEX_SCAN_CAP, |o| o as usize);
        let elems = self.group.enumerate(n);
        let mut out = Vec::with_capacity(n);
        for s in &elems {
            let idx = self.group.enumeration_index(&g.mul(s)?, cap)?;
            out.push(idx as u32);
        }
        out.extend((elems.len()..n).map(|m| m as u32));
        Ok(out)
    }

    /// Pulls the image streams of all atoms of `u` (round-robin, at most
    /// `budget` pulls in total) and returns the accumulated union together
    /// with an exactness flag: `true` means every stream was exhausted and
    /// the union equals `α_g(u)`.
    pub fn image_union(
        &self,
        g: &GroupElement,
        u: &CylinderUnion,
        budget: usize,
    ) -> Result<(CylinderUnion, bool)> {
        let mut multi = MultiStream::new(
            u.words()
                .iter()
                .map(|w| self.image_stream(g, w))
                .collect::<Result<Vec<_>>>()?,
        );
        let mut acc = CylinderUnion::empty();
        for _ in 0..budget {
            match multi.next() {
                Some(w) => acc = acc.join(&CylinderUnion::cylinder(&w)),
                None => return Ok((acc, true)),
            }
        }
        Ok((acc, multi.next().is_none()))
    }
}

/// Verifies that assigning `perms[i]` to generator `i` defines an action
/// of the group (not merely of the free group on its generators).
fn validate_perm_assignment(group: &Arc<GroupSpec>, perms: &[CoordPerm]) -> Result<()> {
    match &**group {
        GroupSpec::FiniteByTable { .. } => {
            let elements = group.elements()?;
            for a in &elements {
                let pa = element_perm(perms, a);
                for b in &elements {
                    let pb = element_perm(perms, b);
                    let pab = element_perm(perms, &a.mul(b)?);
                    if pa.compose(&pb) != pab {
                        return Err(Error::structural(format!(
                            "permutations are inconsistent with the group law at {a}·{b}"
                        )));
                    }
                }
            }
            Ok(())
        }
        GroupSpec::FreeAbelian { .. } => {
            for (i, p) in perms.iter().enumerate() {
                for q in &perms[i + 1..] {
                    if p.compose(q) != q.compose(p) {
                        return Err(Error::structural(
                            "permutations of commuting generators must commute",
                        ));
                    }
                }
            }
            Ok(())
        }
        GroupSpec::Free { .. } => Ok(()),
        GroupSpec::DirectProduct(parts) => {
            let mut offset = 0usize;
            let mut slices = Vec::new();
            for part in parts {
                let m = part.generator_count();
                slices.push((Arc::new(part.clone()), perms[offset..offset + m].to_vec()));
                offset += m;
            }
            for (part, slice) in &slices {
                validate_perm_assignment(part, slice)?;
            }
            // Generators of different factors commute.
            for (i, (_, left)) in slices.iter().enumerate() {
                for (_, right) in &slices[i + 1..] {
                    for p in left {
                        for q in right {
                            if p.compose(q) != q.compose(p) {
                                return Err(Error::structural(
                                    "permutations of distinct factors must commute",
                                ));
                            }
                        }
                    }
                }
            }
            Ok(())
        }
    }
}

/// The permutation of a full group element: letter permutations composed
/// left to right (the rightmost letter acts first).
fn element_perm(perms: &[CoordPerm], g: &GroupElement) -> CoordPerm {
    let mut sigma = CoordPerm::identity();
    for (idx, exp) in g.letters() {
        let p = if exp >= 0 { perms[idx as usize].clone() } else { perms[idx as usize].inverse() };
        sigma = sigma.compose(&p);
    }
    sigma
}

/// Image of `[w]` under a coordinate relabeling `j ↦ target(j)`: the new
/// word constrains `target(j)` to `w_j` and ranges over all free bits.
fn constraint_stream(target: impl Fn(u32) -> u32, w: &BitWord) -> ImageStream {
    if w.is_empty() {
        return ImageStream::finite(vec![BitWord::empty()]);
    }
    let targets: Vec<u32> = (0..w.len() as u32).map(target).collect();
    let m = (*targets.iter().max().unwrap() as usize) + 1;
    let mut template = vec![2u8; m]; // 2 marks a free coordinate
    for (j, &t) in targets.iter().enumerate() {
        template[t as usize] = w.bits()[j];
    }
    let free: Vec<usize> =
        template.iter().enumerate().filter_map(|(i, &b)| (b == 2).then_some(i)).collect();
    let mut words = Vec::with_capacity(1 << free.len());
    for value in 0u64..(1u64 << free.len()) {
        let mut bits = template.clone();
        for (pos, &coord) in free.iter().enumerate() {
            bits[coord] = ((value >> (free.len() - 1 - pos)) & 1) as u8;
        }
        words.push(BitWord(bits));
    }
    ImageStream::finite(words)
}

/// Largest supported magnitude (in bits) of a single odometer translation.
/// Image construction fans out over `2^bits` prefix extensions, so this
/// bounds work, not correctness.
const ODOMETER_STEP_BITS: usize = 16;

/// Image stream of the odometer element `+n` applied to `[w]`, built in
/// one stage. Extend `w` with free coordinates until `|n|` fits strictly
/// below the prefix; on each extension the translation acts on the prefix
/// value directly. An extension whose sum stays inside the prefix maps to
/// a single cylinder; a carry (or borrow) escaping into the unconstrained
/// tail turns the tail into a `±1` odometer image — one geometric stream
/// of cylinders per escaping extension, missing only a single point.
fn odometer_stream(n: i64, w: &BitWord) -> Result<ImageStream> {
    if n == 0 {
        return Ok(ImageStream::finite(vec![w.clone()]));
    }
    let magnitude = n.unsigned_abs();
    let m = (64 - magnitude.leading_zeros()) as usize;
    if m > ODOMETER_STEP_BITS {
        return Err(Error::unsupported(format!(
            "odometer translation by {n} is outside the supported range"
        )));
    }
    let depth = w.len().max(m);
    let free = depth - w.len();
    let modulus = BigInt::one() << depth;

    let mut words = Vec::new();
    let mut parts: Vec<ImageStream> = Vec::new();
    for ext in 0u64..(1u64 << free) {
        let mut bits = w.bits().to_vec();
        bits.extend((0..free).map(|j| ((ext >> j) & 1) as u8));
        // Coordinate 0 is the least significant bit.
        let value = bits
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, &b| (acc << 1) + BigInt::from(b));
        let sum = value + BigInt::from(n);
        if sum.sign() == Sign::Minus {
            // Borrow from the tail: x − |n| = prefix + 2^depth·(y − 1).
            let prefix = lsb_bits(&(sum + &modulus), depth);
            parts.push(ImageStream::Tail(TailStream { prefix, repeat: 1, stop: 0, k: 0 }));
        } else if sum < modulus {
            words.push(BitWord(lsb_bits(&sum, depth)));
        } else {
            // Carry into the tail: x + n = prefix + 2^depth·(y + 1).
            let prefix = lsb_bits(&(sum - &modulus), depth);
            parts.push(ImageStream::Tail(TailStream { prefix, repeat: 0, stop: 1, k: 0 }));
        }
    }
    if parts.is_empty() {
        return Ok(ImageStream::finite(words));
    }
    if !words.is_empty() {
        parts.insert(0, ImageStream::finite(words));
    }
    Ok(ImageStream::Fan(Box::new(MultiStream::new(parts))))
}

/// The low `depth` bits of a non-negative integer, least significant
/// first.
fn lsb_bits(value: &BigInt, depth: usize) -> Vec<u8> {
    (0..depth as u64).map(|j| value.bit(j) as u8).collect()
}

/// A stream of cylinder words. Iteration order is deterministic; `None`
/// means the emitted words exactly cover the image.
pub enum ImageStream {
    Finite(std::vec::IntoIter<BitWord>),
    Tail(TailStream),
    Fan(Box<MultiStream>),
}

impl ImageStream {
    fn finite(words: Vec<BitWord>) -> ImageStream {
        ImageStream::Finite(words.into_iter())
    }
}

impl Iterator for ImageStream {
    type Item = BitWord;

    fn next(&mut self) -> Option<BitWord> {
        match self {
            ImageStream::Finite(it) => it.next(),
            ImageStream::Tail(t) => t.next(),
            ImageStream::Fan(f) => f.next(),
        }
    }
}

/// Emits `[prefix repeat^k stop]` for `k = k, k+1, k+2, …` — never
/// exhausts, and its tail of unemitted cylinders shrinks geometrically.
pub struct TailStream {
    prefix: Vec<u8>,
    repeat: u8,
    stop: u8,
    k: usize,
}

impl Iterator for TailStream {
    type Item = BitWord;

    fn next(&mut self) -> Option<BitWord> {
        let mut bits = self.prefix.clone();
        bits.extend(std::iter::repeat(self.repeat).take(self.k));
        bits.push(self.stop);
        self.k += 1;
        Some(BitWord(bits))
    }
}

/// Round-robin merge of several image streams (the atoms of a union, or
/// the prefix extensions of one odometer image).
pub struct MultiStream {
    streams: Vec<ImageStream>,
    done: Vec<bool>,
    cursor: usize,
}

impl MultiStream {
    fn new(streams: Vec<ImageStream>) -> MultiStream {
        let done = vec![false; streams.len()];
        MultiStream { streams, done, cursor: 0 }
    }
}

impl Iterator for MultiStream {
    type Item = BitWord;

    fn next(&mut self) -> Option<BitWord> {
        let n = self.streams.len();
        for t in 0..n {
            let i = (self.cursor + t) % n;
            if self.done[i] {
                continue;
            }
            match self.streams[i].next() {
                Some(w) => {
                    self.cursor = (i + 1) % n;
                    return Some(w);
                }
                None => self.done[i] = true,
            }
        }
        None
    }
}

/// Result of a two-sided image enclosure: a certified inner approximation
/// of `α_g(U)` together with exact measure bounds.
pub struct ImageEnclosure {
    /// Accumulated union of image cylinders; always a subset of `α_g(U)`,
    /// and equal to it when `exact` holds.
    pub image: CylinderUnion,
    /// `μ(image)`, a lower bound for `μ(α_g(U))`.
    pub lower: Rat,
    /// `1 − μ(image of complement)`, an upper bound for `μ(α_g(U))`.
    pub upper: Rat,
    /// The image stream exhausted: `image` is exactly `α_g(U)` and both
    /// bounds equal its true measure.
    pub exact: bool,
}

/// Encloses `α_g(U)` to measure gap `< eps` by the two-sided scheme: the
/// image stream of `U` yields increasing lower bounds, the image stream of
/// the complement yields lower bounds on the complementary measure, hence
/// `1 − (·)` upper bounds. A measure-preserving action closes the gap; the
/// pull `budget` turns a misconfigured oracle into an error instead of a
/// hang.
pub fn image_enclosure(
    action: &ActionOracle,
    measure: &MeasureOracle,
    g: &GroupElement,
    u: &CylinderUnion,
    eps: &Rat,
    budget: usize,
) -> Result<ImageEnclosure> {
    let make = |set: &CylinderUnion| -> Result<MultiStream> {
        Ok(MultiStream::new(
            set.words()
                .iter()
                .map(|w| action.image_stream(g, w))
                .collect::<Result<Vec<_>>>()?,
        ))
    };
    let mut lower_stream = make(u)?;
    let mut upper_stream = make(&u.complement())?;
    let mut image = CylinderUnion::empty();
    let mut lower_done = false;
    let mut upper_done = false;
    // Cylinders emitted on one side are pairwise disjoint (disjoint atoms
    // have disjoint images under a bijection), so each side's measure
    // accumulates one exact word measure per pull.
    let mut lower = Rat::zero();
    let mut co_measure = Rat::zero();

    for step in 0..budget {
        if lower_done {
            // The image stream exhausted, so `image` IS α_g(U) and `lower`
            // its exact measure; the complement side no longer matters
            // (it may even be an infinite union when the image is finite).
            return Ok(ImageEnclosure { image, lower: lower.clone(), upper: lower, exact: true });
        }
        let upper = Rat::one() - &co_measure;
        if &upper - &lower < *eps {
            // Gap closed. One grace pull on the image stream upgrades the
            // answer to exact if it was about to exhaust anyway; a word it
            // yields instead is folded in, not discarded.
            match lower_stream.next() {
                Some(w) => {
                    lower += measure.word_measure(&w);
                    image = image.join(&CylinderUnion::cylinder(&w));
                    return Ok(ImageEnclosure { image, lower, upper, exact: false });
                }
                None => {
                    return Ok(ImageEnclosure {
                        image,
                        lower: lower.clone(),
                        upper: lower,
                        exact: true,
                    })
                }
            }
        }
        if step % 2 == 0 || upper_done {
            match lower_stream.next() {
                Some(w) => {
                    lower += measure.word_measure(&w);
                    image = image.join(&CylinderUnion::cylinder(&w));
                }
                None => lower_done = true,
            }
        } else {
            match upper_stream.next() {
                Some(w) => co_measure += measure.word_measure(&w),
                None => upper_done = true,
            }
        }
    }
    Err(Error::budget_exceeded(
        budget as u64,
        format!("enclosing an image to measure gap {eps}"),
    ))
}

/// Encloses `μ(α_g(U))` to width `< 2^-k`. When both image streams
/// exhaust, the answer collapses to the exact rational.
pub fn image_measure(
    action: &ActionOracle,
    measure: &MeasureOracle,
    g: &GroupElement,
    u: &CylinderUnion,
    k: u32,
    budget: usize,
) -> Result<RationalInterval> {
    let enc = image_enclosure(action, measure, g, u, &pow2_neg(k), budget)?;
    Ok(RationalInterval::new(enc.lower, enc.upper))
}
