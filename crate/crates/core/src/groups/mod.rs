//! Finitely generated groups with exactly decidable word problems.
//!
//! Four kinds are supported: finite groups given by a Cayley table, free
//! abelian groups, free groups, and finite direct products of these. Each
//! kind fixes a canonical word form, so equality of elements is equality
//! of canonical words — no search is ever involved.

mod character;

pub use character::{characters, fourier, inverse_fourier, Character};

use crate::error::{Error, Result};
use crate::scalar::Rat;
use num_traits::One;
use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

/// Description of a group. Construct through the checked constructors
/// ([`GroupSpec::finite_by_table`] and friends), which validate the data
/// and return an [`Arc`] to share among elements.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum GroupSpec {
    /// A finite group as a full Cayley table: `table[a][b]` is the index
    /// of the product `a * b`. `generators` index into the element list
    /// and must generate the group.
    FiniteByTable {
        table: Vec<Vec<u32>>,
        names: Vec<String>,
        identity: u32,
        generators: Vec<u32>,
    },
    /// `Z^rank` with named basis generators.
    FreeAbelian { rank: u32, names: Vec<String> },
    /// The free group on `rank` named generators.
    Free { rank: u32, names: Vec<String> },
    /// A finite direct product of the other kinds.
    DirectProduct(Vec<GroupSpec>),
}

/// An element of a [`GroupSpec`], as a canonical word.
///
/// The word is a sequence of `(generator index, exponent)` pairs whose
/// meaning depends on the kind: a single `(element index, 1)` pair for
/// table groups, a sorted exponent vector for free abelian groups, a
/// freely reduced word for free groups, and a concatenation of component
/// words (with offset indices) for products. The empty word is the
/// identity for every kind.
#[derive(Debug, Clone)]
pub struct GroupElement {
    spec: Arc<GroupSpec>,
    word: Vec<(u32, i64)>,
}

impl GroupSpec {
    /// Validates a Cayley table and wraps it as a group.
    pub fn finite_by_table(
        table: Vec<Vec<u32>>,
        names: Vec<String>,
        generators: Vec<u32>,
    ) -> Result<Arc<GroupSpec>> {
        let n = table.len();
        if n == 0 {
            return Err(Error::structural("empty Cayley table"));
        }
        if names.len() != n {
            return Err(Error::structural(format!(
                "expected {n} element names, got {}",
                names.len()
            )));
        }
        if names.iter().collect::<BTreeSet<_>>().len() != n {
            return Err(Error::structural("duplicate element names"));
        }
        for row in &table {
            if row.len() != n || row.iter().any(|&v| v as usize >= n) {
                return Err(Error::structural("Cayley table is not square over 0..n"));
            }
        }
        let identity = (0..n as u32)
            .find(|&e| {
                (0..n as u32).all(|a| {
                    table[e as usize][a as usize] == a && table[a as usize][e as usize] == a
                })
            })
            .ok_or_else(|| Error::structural("Cayley table has no identity"))?;
        for a in 0..n {
            if !(0..n).any(|b| table[a][b] == identity && table[b][a] == identity) {
                return Err(Error::structural(format!("element {a} has no inverse")));
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let left = table[table[a][b] as usize][c];
                    let right = table[a][table[b][c] as usize];
                    if left != right {
                        return Err(Error::structural(format!(
                            "Cayley table not associative at ({a}, {b}, {c})"
                        )));
                    }
                }
            }
        }
        let generators = if generators.is_empty() {
            (0..n as u32).filter(|&i| i != identity).collect()
        } else {
            if generators.iter().any(|&g| g as usize >= n) {
                return Err(Error::structural("generator index out of range"));
            }
            generators
        };
        let spec = GroupSpec::FiniteByTable { table, names, identity, generators };
        if spec.reachable_from_generators().len() != n {
            return Err(Error::structural("designated generators do not generate"));
        }
        Ok(Arc::new(spec))
    }

    /// The cyclic group of order `n`, elements named `e, s, s2, ...`,
    /// generated by `s`.
    pub fn cyclic(n: u32) -> Arc<GroupSpec> {
        assert!(n > 0);
        let table = (0..n)
            .map(|a| (0..n).map(|b| (a + b) % n).collect())
            .collect();
        let names = (0..n)
            .map(|i| match i {
                0 => "e".to_string(),
                1 => "s".to_string(),
                _ => format!("s{i}"),
            })
            .collect();
        let generators = if n == 1 { vec![] } else { vec![1] };
        GroupSpec::finite_by_table(table, names, generators).expect("cyclic table is a group")
    }

    /// The symmetric group on `n` letters (`n <= 4`) as a Cayley table.
    /// Elements are named by one-line notation (`e`, `p102`, ...);
    /// the designated generators are the n-cycle and the transposition
    /// swapping the first two letters.
    pub fn symmetric(n: usize) -> Arc<GroupSpec> {
        assert!((1..=4).contains(&n), "symmetric groups are shipped up to n = 4");
        let mut perms: Vec<Vec<usize>> = Vec::new();
        let mut current: Vec<usize> = (0..n).collect();
        fn emit(rest: &mut Vec<usize>, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if rest.is_empty() {
                out.push(prefix.clone());
                return;
            }
            for i in 0..rest.len() {
                let v = rest.remove(i);
                prefix.push(v);
                emit(rest, prefix, out);
                prefix.pop();
                rest.insert(i, v);
            }
        }
        emit(&mut current, &mut Vec::new(), &mut perms);
        let index = |p: &[usize]| perms.iter().position(|q| q == p).unwrap() as u32;
        let compose = |p: &[usize], q: &[usize]| -> Vec<usize> {
            (0..n).map(|x| p[q[x]]).collect()
        };
        let table: Vec<Vec<u32>> = perms
            .iter()
            .map(|p| perms.iter().map(|q| index(&compose(p, q))).collect())
            .collect();
        let names: Vec<String> = perms
            .iter()
            .map(|p| {
                if p.iter().enumerate().all(|(i, &v)| i == v) {
                    "e".to_string()
                } else {
                    let digits: String = p.iter().map(|v| v.to_string()).collect();
                    format!("p{digits}")
                }
            })
            .collect();
        let generators = if n == 1 {
            vec![]
        } else {
            let cycle: Vec<usize> = (0..n).map(|x| (x + 1) % n).collect();
            let mut swap: Vec<usize> = (0..n).collect();
            swap.swap(0, 1);
            vec![index(&cycle), index(&swap)]
        };
        GroupSpec::finite_by_table(table, names, generators)
            .expect("permutation table is a group")
    }

    pub fn free_abelian(rank: u32) -> Arc<GroupSpec> {
        let names = (0..rank).map(|i| default_gen_name(i, rank)).collect();
        Arc::new(GroupSpec::FreeAbelian { rank, names })
    }

    pub fn free(rank: u32) -> Arc<GroupSpec> {
        let names = (0..rank).map(|i| default_gen_name(i, rank)).collect();
        Arc::new(GroupSpec::Free { rank, names })
    }

    pub fn direct_product(parts: Vec<Arc<GroupSpec>>) -> Result<Arc<GroupSpec>> {
        if parts.is_empty() {
            return Err(Error::structural("empty direct product"));
        }
        let parts: Vec<GroupSpec> = parts.iter().map(|p| (**p).clone()).collect();
        let mut seen = BTreeSet::new();
        for part in &parts {
            for i in 0..part.generator_count() {
                if !seen.insert(part.generator_name(i).to_string()) {
                    return Err(Error::structural(format!(
                        "duplicate generator name `{}` across product components",
                        part.generator_name(i)
                    )));
                }
            }
        }
        Ok(Arc::new(GroupSpec::DirectProduct(parts)))
    }

    /// Number of elements, or `None` when infinite.
    pub fn order(&self) -> Option<u64> {
        match self {
            GroupSpec::FiniteByTable { table, .. } => Some(table.len() as u64),
            GroupSpec::FreeAbelian { rank, .. } | GroupSpec::Free { rank, .. } => {
                if *rank == 0 {
                    Some(1)
                } else {
                    None
                }
            }
            GroupSpec::DirectProduct(parts) => {
                parts.iter().map(|p| p.order()).product::<Option<u64>>()
            }
        }
    }

    pub fn is_abelian(&self) -> bool {
        match self {
            GroupSpec::FiniteByTable { table, .. } => {
                let n = table.len();
                (0..n).all(|a| (a..n).all(|b| table[a][b] == table[b][a]))
            }
            GroupSpec::FreeAbelian { .. } => true,
            GroupSpec::Free { rank, .. } => *rank <= 1,
            GroupSpec::DirectProduct(parts) => parts.iter().all(|p| p.is_abelian()),
        }
    }

    /// Number of designated generators (flattened, for products).
    pub fn generator_count(&self) -> usize {
        match self {
            GroupSpec::FiniteByTable { generators, .. } => generators.len(),
            GroupSpec::FreeAbelian { rank, .. } | GroupSpec::Free { rank, .. } => {
                *rank as usize
            }
            GroupSpec::DirectProduct(parts) => {
                parts.iter().map(|p| p.generator_count()).sum()
            }
        }
    }

    pub fn generator_name(&self, index: usize) -> &str {
        match self {
            GroupSpec::FiniteByTable { names, generators, .. } => {
                &names[generators[index] as usize]
            }
            GroupSpec::FreeAbelian { names, .. } | GroupSpec::Free { names, .. } => {
                &names[index]
            }
            GroupSpec::DirectProduct(parts) => {
                let (part, local) = self.locate_generator(index);
                parts[part].generator_name(local)
            }
        }
    }

    fn locate_generator(&self, index: usize) -> (usize, usize) {
        let GroupSpec::DirectProduct(parts) = self else {
            return (0, index);
        };
        let mut rest = index;
        for (j, part) in parts.iter().enumerate() {
            let count = part.generator_count();
            if rest < count {
                return (j, rest);
            }
            rest -= count;
        }
        panic!("generator index {index} out of range");
    }
}

fn default_gen_name(i: u32, rank: u32) -> String {
    if rank == 1 {
        "a".to_string()
    } else {
        let letters = ["a", "b", "c", "d"];
        letters
            .get(i as usize)
            .map(|s| s.to_string())
            .unwrap_or_else(|| format!("g{i}"))
    }
}

/// Operations bound to an `Arc<GroupSpec>`.
pub trait GroupOps {
    fn identity(&self) -> GroupElement;
    /// The designated generator with the given flattened index.
    fn generator(&self, index: usize) -> GroupElement;
    /// Canonicalizes an arbitrary word over generator indices.
    fn element_from_word(&self, word: &[(u32, i64)]) -> Result<GroupElement>;
    /// For table groups (and products of them), the element with a given
    /// display name.
    fn element_named(&self, name: &str) -> Option<GroupElement>;
    /// First `n` elements of the fixed enumeration (identity first); for a
    /// finite group the stream is capped at its order.
    fn enumerate(&self, n: usize) -> Vec<GroupElement>;
    /// All elements of a finite group, in enumeration order.
    fn elements(&self) -> Result<Vec<GroupElement>>;
    /// Position of `g` in the fixed enumeration, scanning at most
    /// `budget` entries.
    fn enumeration_index(&self, g: &GroupElement, budget: usize) -> Result<usize>;
}

impl GroupOps for Arc<GroupSpec> {
    fn identity(&self) -> GroupElement {
        GroupElement { spec: self.clone(), word: Vec::new() }
    }

    fn generator(&self, index: usize) -> GroupElement {
        let word = match &**self {
            GroupSpec::FiniteByTable { generators, identity, .. } => {
                let g = generators[index];
                if g == *identity {
                    Vec::new()
                } else {
                    vec![(g, 1)]
                }
            }
            GroupSpec::FreeAbelian { .. } | GroupSpec::Free { .. } => {
                vec![(index as u32, 1)]
            }
            GroupSpec::DirectProduct(parts) => {
                let (part_idx, local) = self.locate_generator(index);
                let mut offset = 0u32;
                for part in parts.iter().take(part_idx) {
                    offset += part.index_space();
                }
                let part = &parts[part_idx];
                let local_word = match part {
                    GroupSpec::FiniteByTable { generators, identity, .. } => {
                        let g = generators[local];
                        if g == *identity {
                            Vec::new()
                        } else {
                            vec![(g, 1)]
                        }
                    }
                    _ => vec![(local as u32, 1)],
                };
                local_word.into_iter().map(|(i, e)| (i + offset, e)).collect()
            }
        };
        GroupElement { spec: self.clone(), word }
    }

    fn element_from_word(&self, word: &[(u32, i64)]) -> Result<GroupElement> {
        let canonical = canonicalize(self, word)?;
        Ok(GroupElement { spec: self.clone(), word: canonical })
    }

    fn element_named(&self, name: &str) -> Option<GroupElement> {
        match &**self {
            GroupSpec::FiniteByTable { names, identity, .. } => {
                let idx = names.iter().position(|n| n == name)? as u32;
                let word = if idx == *identity { Vec::new() } else { vec![(idx, 1)] };
                Some(GroupElement { spec: self.clone(), word })
            }
            GroupSpec::DirectProduct(parts) => {
                let mut offset = 0u32;
                for part in parts {
                    if let GroupSpec::FiniteByTable { names, identity, .. } = part {
                        if let Some(idx) = names.iter().position(|n| n == name) {
                            let idx = idx as u32;
                            let word = if idx == *identity {
                                Vec::new()
                            } else {
                                vec![(idx + offset, 1)]
                            };
                            return Some(GroupElement { spec: self.clone(), word });
                        }
                    }
                    offset += part.index_space();
                }
                None
            }
            _ => None,
        }
    }

    fn enumerate(&self, n: usize) -> Vec<GroupElement> {
        enumerate_words(self)
            .take(n)
            .map(|word| GroupElement { spec: self.clone(), word })
            .collect()
    }

    fn elements(&self) -> Result<Vec<GroupElement>> {
        let order = self
            .order()
            .ok_or_else(|| Error::unsupported("element list of an infinite group"))?;
        Ok(self.enumerate(order as usize))
    }

    fn enumeration_index(&self, g: &GroupElement, budget: usize) -> Result<usize> {
        for (i, word) in enumerate_words(self).take(budget).enumerate() {
            if word == g.word {
                return Ok(i);
            }
        }
        Err(Error::BudgetExceeded {
            budget: budget as u64,
            context: format!("locating {g} in the group enumeration"),
        })
    }
}

impl GroupSpec {
    /// Width of the generator-index space used inside canonical words.
    fn index_space(&self) -> u32 {
        match self {
            GroupSpec::FiniteByTable { table, .. } => table.len() as u32,
            GroupSpec::FreeAbelian { rank, .. } | GroupSpec::Free { rank, .. } => *rank,
            GroupSpec::DirectProduct(parts) => {
                parts.iter().map(|p| p.index_space()).sum()
            }
        }
    }

    fn reachable_from_generators(&self) -> Vec<u32> {
        let GroupSpec::FiniteByTable { table, identity, generators, .. } = self else {
            return Vec::new();
        };
        let mut seen = vec![false; table.len()];
        let mut queue = vec![*identity];
        seen[*identity as usize] = true;
        while let Some(a) = queue.pop() {
            for &g in generators {
                let b = table[a as usize][g as usize];
                if !seen[b as usize] {
                    seen[b as usize] = true;
                    queue.push(b);
                }
            }
        }
        (0..table.len() as u32).filter(|&i| seen[i as usize]).collect()
    }

    /// Expresses a table element as a product of designated generators
    /// (positive letters only), by breadth-first search.
    fn table_letters(&self, target: u32) -> Vec<(u32, i8)> {
        let GroupSpec::FiniteByTable { table, identity, generators, .. } = self else {
            unreachable!("table_letters on a non-table group");
        };
        if target == *identity {
            return Vec::new();
        }
        let n = table.len();
        let mut prev: Vec<Option<(u32, usize)>> = vec![None; n];
        let mut queue = std::collections::VecDeque::from([*identity]);
        let mut seen = vec![false; n];
        seen[*identity as usize] = true;
        while let Some(a) = queue.pop_front() {
            for (gi, &g) in generators.iter().enumerate() {
                let b = table[a as usize][g as usize];
                if !seen[b as usize] {
                    seen[b as usize] = true;
                    prev[b as usize] = Some((a, gi));
                    queue.push_back(b);
                }
            }
        }
        let mut letters = Vec::new();
        let mut cur = target;
        while cur != *identity {
            let (parent, gi) = prev[cur as usize].expect("generators generate the group");
            letters.push((gi as u32, 1i8));
            cur = parent;
        }
        letters.reverse();
        letters
    }
}

fn canonicalize(spec: &GroupSpec, word: &[(u32, i64)]) -> Result<Vec<(u32, i64)>> {
    match spec {
        GroupSpec::FiniteByTable { table, identity, .. } => {
            let n = table.len() as u32;
            let mut acc = *identity;
            for &(idx, exp) in word {
                if idx >= n {
                    return Err(Error::structural(format!("element index {idx} out of range")));
                }
                let idx_pow = table_pow(table, *identity, idx, exp);
                acc = table[acc as usize][idx_pow as usize];
            }
            Ok(if acc == *identity { Vec::new() } else { vec![(acc, 1)] })
        }
        GroupSpec::FreeAbelian { rank, .. } => {
            let mut exps = vec![0i64; *rank as usize];
            for &(idx, exp) in word {
                if idx >= *rank {
                    return Err(Error::structural(format!("generator index {idx} out of range")));
                }
                exps[idx as usize] += exp;
            }
            Ok(exps
                .into_iter()
                .enumerate()
                .filter(|(_, e)| *e != 0)
                .map(|(i, e)| (i as u32, e))
                .collect())
        }
        GroupSpec::Free { rank, .. } => {
            let mut out: Vec<(u32, i64)> = Vec::new();
            for &(idx, exp) in word {
                if idx >= *rank {
                    return Err(Error::structural(format!("generator index {idx} out of range")));
                }
                if exp == 0 {
                    continue;
                }
                match out.last_mut() {
                    Some((last, e)) if *last == idx => {
                        *e += exp;
                        if *e == 0 {
                            out.pop();
                        }
                    }
                    _ => out.push((idx, exp)),
                }
            }
            Ok(out)
        }
        GroupSpec::DirectProduct(parts) => {
            let mut out = Vec::new();
            let mut offset = 0u32;
            for part in parts {
                let width = part.index_space();
                let local: Vec<(u32, i64)> = word
                    .iter()
                    .filter(|(i, _)| *i >= offset && *i < offset + width)
                    .map(|&(i, e)| (i - offset, e))
                    .collect();
                let canon = canonicalize(part, &local)?;
                out.extend(canon.into_iter().map(|(i, e)| (i + offset, e)));
                offset += width;
            }
            let total = spec.index_space();
            if word.iter().any(|(i, _)| *i >= total) {
                return Err(Error::structural("generator index out of range"));
            }
            Ok(out)
        }
    }
}

fn table_pow(table: &[Vec<u32>], identity: u32, base: u32, exp: i64) -> u32 {
    let mut acc = identity;
    if exp >= 0 {
        for _ in 0..exp {
            acc = table[acc as usize][base as usize];
        }
    } else {
        let inv = (0..table.len() as u32)
            .find(|&b| table[base as usize][b as usize] == identity)
            .expect("validated tables have inverses");
        for _ in 0..(-exp) {
            acc = table[acc as usize][inv as usize];
        }
    }
    acc
}

impl GroupElement {
    pub fn spec(&self) -> &Arc<GroupSpec> {
        &self.spec
    }

    pub fn word(&self) -> &[(u32, i64)] {
        &self.word
    }

    pub fn is_identity(&self) -> bool {
        self.word.is_empty()
    }

    fn check_same_spec(&self, other: &GroupElement) -> Result<()> {
        if Arc::ptr_eq(&self.spec, &other.spec) || self.spec == other.spec {
            Ok(())
        } else {
            Err(Error::structural("elements belong to different groups"))
        }
    }

    pub fn mul(&self, other: &GroupElement) -> Result<GroupElement> {
        self.check_same_spec(other)?;
        let mut word = self.word.clone();
        word.extend_from_slice(&other.word);
        self.spec.element_from_word(&word)
    }

    pub fn inv(&self) -> GroupElement {
        let word: Vec<(u32, i64)> =
            self.word.iter().rev().map(|&(i, e)| (i, -e)).collect();
        self.spec
            .element_from_word(&word)
            .expect("inverting a canonical word cannot fail")
    }

    pub fn pow(&self, exp: i64) -> GroupElement {
        let base = if exp >= 0 { self.clone() } else { self.inv() };
        let mut acc = self.spec.identity();
        for _ in 0..exp.unsigned_abs() {
            acc = acc.mul(&base).expect("same spec");
        }
        acc
    }

    /// The modular function evaluated at this element. All our group
    /// kinds are discrete with counting Haar measure, so it is 1.
    pub fn modulus(&self) -> Rat {
        Rat::one()
    }

    /// Decomposes the element into designated-generator letters
    /// `(generator index, +-1)` whose ordered product is the element.
    pub fn letters(&self) -> Vec<(u32, i8)> {
        match &*self.spec {
            GroupSpec::FiniteByTable { .. } => self
                .word
                .first()
                .map(|&(idx, _)| self.spec.table_letters(idx))
                .unwrap_or_default(),
            GroupSpec::FreeAbelian { .. } | GroupSpec::Free { .. } => self
                .word
                .iter()
                .flat_map(|&(i, e)| {
                    let sign: i8 = if e >= 0 { 1 } else { -1 };
                    std::iter::repeat((i, sign)).take(e.unsigned_abs() as usize)
                })
                .collect(),
            GroupSpec::DirectProduct(parts) => {
                let mut letters = Vec::new();
                let mut offset = 0u32;
                let mut gen_offset = 0u32;
                for part in parts {
                    let width = part.index_space();
                    let local: Vec<(u32, i64)> = self
                        .word
                        .iter()
                        .filter(|(i, _)| *i >= offset && *i < offset + width)
                        .map(|&(i, e)| (i - offset, e))
                        .collect();
                    let part_arc = Arc::new(part.clone());
                    let elem = GroupElement { spec: part_arc, word: local };
                    letters.extend(
                        elem.letters().into_iter().map(|(i, s)| (i + gen_offset, s)),
                    );
                    offset += width;
                    gen_offset += part.generator_count() as u32;
                }
                letters
            }
        }
    }
}

impl PartialEq for GroupElement {
    fn eq(&self, other: &Self) -> bool {
        self.word == other.word
            && (Arc::ptr_eq(&self.spec, &other.spec) || self.spec == other.spec)
    }
}

impl Eq for GroupElement {}

impl PartialOrd for GroupElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GroupElement {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.word.cmp(&other.word) {
            Ordering::Equal => {
                if Arc::ptr_eq(&self.spec, &other.spec) {
                    Ordering::Equal
                } else {
                    self.spec.cmp(&other.spec)
                }
            }
            ord => ord,
        }
    }
}

impl Hash for GroupElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.word.hash(state);
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_empty() {
            return write!(f, "e");
        }
        match &*self.spec {
            GroupSpec::FiniteByTable { names, .. } => {
                write!(f, "{}", names[self.word[0].0 as usize])
            }
            GroupSpec::FreeAbelian { names, .. } | GroupSpec::Free { names, .. } => {
                let parts: Vec<String> = self
                    .word
                    .iter()
                    .map(|&(i, e)| {
                        if e == 1 {
                            names[i as usize].clone()
                        } else {
                            format!("{}^{}", names[i as usize], e)
                        }
                    })
                    .collect();
                write!(f, "{}", parts.join(" "))
            }
            GroupSpec::DirectProduct(parts) => {
                let mut rendered = Vec::new();
                let mut offset = 0u32;
                for part in parts {
                    let width = part.index_space();
                    let local: Vec<(u32, i64)> = self
                        .word
                        .iter()
                        .filter(|(i, _)| *i >= offset && *i < offset + width)
                        .map(|&(i, e)| (i - offset, e))
                        .collect();
                    if !local.is_empty() {
                        let elem =
                            GroupElement { spec: Arc::new(part.clone()), word: local };
                        rendered.push(elem.to_string());
                    }
                    offset += width;
                }
                write!(f, "{}", rendered.join(" "))
            }
        }
    }
}

/// Enumerates canonical words of the fixed element enumeration.
fn enumerate_words(spec: &Arc<GroupSpec>) -> Box<dyn Iterator<Item = Vec<(u32, i64)>>> {
    match &**spec {
        GroupSpec::FiniteByTable { table, identity, .. } => {
            let identity = *identity;
            let n = table.len() as u32;
            Box::new(
                std::iter::once(Vec::new()).chain(
                    (0..n).filter(move |&i| i != identity).map(|i| vec![(i, 1)]),
                ),
            )
        }
        GroupSpec::FreeAbelian { rank, .. } => {
            let rank = *rank as usize;
            if rank == 0 {
                return Box::new(std::iter::once(Vec::new()));
            }
            Box::new((0u64..).flat_map(move |level| free_abelian_shell(rank, level)))
        }
        GroupSpec::Free { rank, .. } => {
            let rank = *rank;
            if rank == 0 {
                return Box::new(std::iter::once(Vec::new()));
            }
            Box::new((0usize..).flat_map(move |len| free_shell(rank, len)))
        }
        GroupSpec::DirectProduct(parts) => {
            let parts = parts.clone();
            let sizes: Vec<Option<u64>> = parts.iter().map(|p| p.order()).collect();
            let part_specs: Vec<Arc<GroupSpec>> =
                parts.iter().map(|p| Arc::new(p.clone())).collect();
            Box::new((0u64..).flat_map(move |level| {
                product_shell(&part_specs, &sizes, level)
            }))
        }
    }
}

/// Words of `Z^rank` whose max coordinate index (in zigzag order) is
/// exactly `level`, in lexicographic order of zigzag indices.
fn free_abelian_shell(rank: usize, level: u64) -> Vec<Vec<(u32, i64)>> {
    let mut out = Vec::new();
    let mut indices = vec![0u64; rank];
    loop {
        if indices.iter().copied().max().unwrap() == level {
            let word: Vec<(u32, i64)> = indices
                .iter()
                .enumerate()
                .filter_map(|(i, &zi)| {
                    let e = crate::seq::zigzag_int(zi);
                    (e != 0).then_some((i as u32, e))
                })
                .collect();
            out.push(word);
        }
        // Odometer over the box [0, level]^rank.
        let mut pos = rank;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            if indices[pos] < level {
                indices[pos] += 1;
                for idx in indices.iter_mut().skip(pos + 1) {
                    *idx = 0;
                }
                break;
            }
        }
    }
}

/// Freely reduced words of exact length `len`, in lexicographic order of
/// the letter alphabet `g0, g0^-1, g1, g1^-1, ...`.
fn free_shell(rank: u32, len: usize) -> Vec<Vec<(u32, i64)>> {
    let mut out = Vec::new();
    let mut letters: Vec<u32> = Vec::new(); // letter code: 2*gen + (neg ? 1 : 0)
    fn emit(rank: u32, len: usize, letters: &mut Vec<u32>, out: &mut Vec<Vec<(u32, i64)>>) {
        if letters.len() == len {
            let mut word: Vec<(u32, i64)> = Vec::new();
            for &code in letters.iter() {
                let gen = code / 2;
                let exp: i64 = if code % 2 == 0 { 1 } else { -1 };
                match word.last_mut() {
                    Some((g, e)) if *g == gen => *e += exp,
                    _ => word.push((gen, exp)),
                }
            }
            out.push(word);
            return;
        }
        for code in 0..2 * rank {
            // Skip letters that cancel the previous one.
            if let Some(&prev) = letters.last() {
                if prev / 2 == code / 2 && prev % 2 != code % 2 {
                    continue;
                }
            }
            letters.push(code);
            emit(rank, len, letters, out);
            letters.pop();
        }
    }
    emit(rank, len, &mut letters, &mut out);
    out
}

/// Product words whose max component enumeration index is exactly
/// `level`, in lexicographic order of component indices.
fn product_shell(
    parts: &[Arc<GroupSpec>],
    sizes: &[Option<u64>],
    level: u64,
) -> Vec<Vec<(u32, i64)>> {
    // Cap each component index by its order when finite.
    let caps: Vec<u64> = sizes
        .iter()
        .map(|s| s.map_or(level, |n| level.min(n - 1)))
        .collect();
    if caps.iter().copied().max().unwrap_or(0) < level && level > 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut indices = vec![0u64; parts.len()];
    'outer: loop {
        let hits_level = indices
            .iter()
            .zip(sizes)
            .any(|(&i, s)| i == level && s.map_or(true, |n| level < n));
        let in_range = indices.iter().zip(&caps).all(|(&i, &c)| i <= c);
        if (level == 0 || hits_level) && in_range {
            let mut word = Vec::new();
            let mut offset = 0u32;
            for (j, part) in parts.iter().enumerate() {
                let part_word = enumerate_words(part)
                    .nth(indices[j] as usize)
                    .expect("index within cap");
                word.extend(part_word.into_iter().map(|(i, e)| (i + offset, e)));
                offset += part.index_space();
            }
            out.push(word);
        }
        let mut pos = parts.len();
        loop {
            if pos == 0 {
                break 'outer;
            }
            pos -= 1;
            if indices[pos] < caps[pos] {
                indices[pos] += 1;
                for idx in indices.iter_mut().skip(pos + 1) {
                    *idx = 0;
                }
                break;
            }
        }
    }
    out
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_group_word_problem() {
        let z3 = GroupSpec::cyclic(3);
        let s = z3.generator(0);
        let s2 = s.mul(&s).unwrap();
        assert!(!s2.is_identity());
        assert!(s2.mul(&s).unwrap().is_identity());
        assert_eq!(s.inv(), s2);
        assert_eq!(s.pow(-4), s2);
    }

    #[test]
    fn free_group_reduction() {
        let f2 = GroupSpec::free(2);
        let a = f2.generator(0);
        let b = f2.generator(1);
        // a b b^-1 a^-1 = e
        let w = a
            .mul(&b)
            .unwrap()
            .mul(&b.inv())
            .unwrap()
            .mul(&a.inv())
            .unwrap();
        assert!(w.is_identity());
        // a b a^-1 stays reduced of length 3.
        let c = a.mul(&b).unwrap().mul(&a.inv()).unwrap();
        assert_eq!(c.word().len(), 3);
        assert_eq!(c.inv().mul(&c).unwrap(), f2.identity());
    }

    #[test]
    fn free_abelian_collects_exponents() {
        let z2 = GroupSpec::free_abelian(2);
        let a = z2.generator(0);
        let b = z2.generator(1);
        let w = b.mul(&a).unwrap().mul(&b).unwrap(); // b a b = a b^2
        assert_eq!(w.word(), &[(0, 1), (1, 2)]);
        assert_eq!(w.mul(&w.inv()).unwrap(), z2.identity());
    }

    #[test]
    fn enumeration_is_prefix_stable_and_matches_the_documented_order() {
        let z = GroupSpec::free_abelian(1);
        let first: Vec<String> =
            z.enumerate(5).iter().map(|g| g.to_string()).collect();
        assert_eq!(first, vec!["e", "a", "a^-1", "a^2", "a^-2"]);
        let ten = z.enumerate(10);
        assert_eq!(&ten[..5], &z.enumerate(5)[..]);

        let f1 = GroupSpec::free(1);
        let first: Vec<String> =
            f1.enumerate(3).iter().map(|g| g.to_string()).collect();
        assert_eq!(first, vec!["e", "a", "a^-1"]);

        // Injectivity over a decent prefix for every kind.
        for spec in [
            GroupSpec::cyclic(6),
            GroupSpec::free_abelian(2),
            GroupSpec::free(2),
            GroupSpec::direct_product(vec![GroupSpec::cyclic(2), GroupSpec::free_abelian(1)])
                .unwrap(),
        ] {
            let elems = spec.enumerate(60);
            let set: std::collections::BTreeSet<_> = elems.iter().cloned().collect();
            assert_eq!(set.len(), elems.len(), "{spec:?}");
            assert!(elems[0].is_identity());
        }
    }

    #[test]
    fn product_group_multiplies_componentwise() {
        let v4 = GroupSpec::direct_product(vec![GroupSpec::cyclic(2), GroupSpec::cyclic(2)]);
        // Z/2 x Z/2 needs distinct names per component.
        assert!(v4.is_err());
        let z2a = GroupSpec::finite_by_table(
            vec![vec![0, 1], vec![1, 0]],
            vec!["e".into(), "s".into()],
            vec![1],
        )
        .unwrap();
        let z2b = GroupSpec::finite_by_table(
            vec![vec![0, 1], vec![1, 0]],
            vec!["e2".into(), "t".into()],
            vec![1],
        )
        .unwrap();
        let v4 = GroupSpec::direct_product(vec![z2a, z2b]).unwrap();
        assert_eq!(v4.order(), Some(4));
        let s = v4.generator(0);
        let t = v4.generator(1);
        let st = s.mul(&t).unwrap();
        assert_eq!(st.mul(&st).unwrap(), v4.identity());
        assert_eq!(st.to_string(), "s t");
        assert!(v4.is_abelian());
    }

    #[test]
    fn symmetric_group_is_a_valid_non_abelian_table() {
        let s3 = GroupSpec::symmetric(3);
        assert_eq!(s3.order(), Some(6));
        assert!(!s3.is_abelian());
        let c = s3.element_named("p120").unwrap();
        let t = s3.element_named("p102").unwrap();
        assert_ne!(c.mul(&t).unwrap(), t.mul(&c).unwrap());
        assert!(c.pow(3).is_identity());
        // Letters decompose through the designated generators {c, t01}.
        for g in s3.elements().unwrap() {
            let mut acc = s3.identity();
            for (gen, sign) in g.letters() {
                let step = if sign > 0 {
                    s3.generator(gen as usize)
                } else {
                    s3.generator(gen as usize).inv()
                };
                acc = acc.mul(&step).unwrap();
            }
            assert_eq!(acc, g);
        }
    }

    #[test]
    fn mismatched_specs_are_rejected() {
        let a = GroupSpec::cyclic(2).generator(0);
        let b = GroupSpec::cyclic(3).generator(0);
        assert!(a.mul(&b).is_err());
    }

    #[test]
    fn invalid_tables_are_rejected() {
        // No inverse for the second element.
        let t = vec![vec![0, 1], vec![1, 1]];
        assert!(GroupSpec::finite_by_table(t, vec!["x".into(), "y".into()], vec![]).is_err());
        // The identity does not have to sit at index 0.
        let t = vec![vec![1, 0], vec![0, 1]];
        assert!(GroupSpec::finite_by_table(t, vec!["x".into(), "y".into()], vec![]).is_ok());
        // Non-associative magma on 3 points.
        let t = vec![vec![0, 1, 2], vec![1, 2, 1], vec![2, 0, 1]];
        assert!(GroupSpec::finite_by_table(
            t,
            vec!["e".into(), "a".into(), "b".into()],
            vec![]
        )
        .is_err());
    }
}
