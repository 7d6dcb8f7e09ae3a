//! Characters of finite abelian groups and the exact Fourier transform.

use super::{GroupElement, GroupOps, GroupSpec};
use crate::error::{Error, Result};
use crate::scalar::{Cyclo, GaussRat, Rat, RootOfUnity};
use num_traits::Zero;
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// A homomorphism from a finite abelian group into the roots of unity,
/// tabulated on every element.
#[derive(Debug, Clone)]
pub struct Character {
    spec: Arc<GroupSpec>,
    values: BTreeMap<GroupElement, RootOfUnity>,
}

impl Character {
    pub fn spec(&self) -> &Arc<GroupSpec> {
        &self.spec
    }

    /// The trivial character.
    pub fn trivial(spec: &Arc<GroupSpec>) -> Result<Character> {
        let values = spec
            .elements()?
            .into_iter()
            .map(|g| (g, RootOfUnity::one()))
            .collect();
        Ok(Character { spec: spec.clone(), values })
    }

    pub fn eval(&self, g: &GroupElement) -> Result<RootOfUnity> {
        self.values
            .get(g)
            .copied()
            .ok_or_else(|| Error::structural("element does not belong to the character's group"))
    }

    pub fn is_trivial(&self) -> bool {
        self.values.values().all(|v| v.is_one())
    }

    /// Pointwise product; the character group operation.
    pub fn mul(&self, other: &Character) -> Result<Character> {
        if self.spec != other.spec {
            return Err(Error::structural("characters of different groups"));
        }
        let values = self
            .values
            .iter()
            .map(|(g, v)| (g.clone(), v.mul(other.values.get(g).unwrap())))
            .collect();
        Ok(Character { spec: self.spec.clone(), values })
    }

    /// Pointwise conjugate; the inverse in the character group.
    pub fn conj(&self) -> Character {
        let values = self.values.iter().map(|(g, v)| (g.clone(), v.conj())).collect();
        Character { spec: self.spec.clone(), values }
    }

    /// Order in the character group: the lcm of the value orders.
    pub fn order(&self) -> u64 {
        self.values
            .values()
            .map(|v| v.order())
            .fold(1u64, num_integer::lcm)
    }
}

impl PartialEq for Character {
    fn eq(&self, other: &Self) -> bool {
        self.values == other.values
    }
}

impl Eq for Character {}

impl PartialOrd for Character {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Character {
    fn cmp(&self, other: &Self) -> Ordering {
        self.values.cmp(&other.values)
    }
}

impl fmt::Display for Character {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.values.iter().map(|(g, v)| format!("{g} -> {v}")).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// All characters of a finite abelian group, in a deterministic order
/// with the trivial character first. There are exactly `|G|` of them.
pub fn characters(spec: &Arc<GroupSpec>) -> Result<Vec<Character>> {
    let order = spec
        .order()
        .ok_or_else(|| Error::unsupported("characters of an infinite group"))?;
    if !spec.is_abelian() {
        return Err(Error::unsupported("characters of a non-abelian group"));
    }
    let elements = spec.elements()?;

    // A reduced generating set: greedily add elements not yet generated.
    let mut gens: Vec<GroupElement> = Vec::new();
    let mut generated = subgroup_closure(spec, &gens)?;
    for g in &elements {
        if generated.len() as u64 == order {
            break;
        }
        if !generated.contains_key(g) {
            gens.push(g.clone());
            generated = subgroup_closure(spec, &gens)?;
        }
    }
    let gen_orders: Vec<u64> = gens.iter().map(element_order).collect();

    // Try every assignment of roots of unity (of the right orders) to the
    // generators and keep those that extend to a homomorphism.
    let mut found: Vec<Character> = Vec::new();
    let mut assignment: Vec<u64> = vec![0; gens.len()];
    loop {
        if let Some(ch) = extend_assignment(spec, &elements, &gens, &gen_orders, &assignment)? {
            found.push(ch);
        }
        // Odometer over the mixed-radix assignment space.
        let mut pos = assignment.len();
        let mut done = assignment.is_empty();
        while pos > 0 {
            pos -= 1;
            assignment[pos] += 1;
            if assignment[pos] < gen_orders[pos] {
                break;
            }
            assignment[pos] = 0;
            if pos == 0 {
                done = true;
            }
        }
        if done {
            break;
        }
    }
    if found.len() as u64 != order {
        return Err(Error::structural(format!(
            "expected {order} characters, found {}",
            found.len()
        )));
    }
    found.sort();
    let trivial = found.iter().position(|c| c.is_trivial()).unwrap();
    found.swap(0, trivial);
    found[1..].sort();
    Ok(found)
}

/// Elements generated by `gens` (with positive letters; the group is
/// finite), as a map from element to any expression index. Used only for
/// membership, the value is irrelevant.
fn subgroup_closure(
    spec: &Arc<GroupSpec>,
    gens: &[GroupElement],
) -> Result<BTreeMap<GroupElement, ()>> {
    let mut seen = BTreeMap::new();
    seen.insert(spec.identity(), ());
    let mut queue = vec![spec.identity()];
    while let Some(h) = queue.pop() {
        for g in gens {
            let next = h.mul(g)?;
            if !seen.contains_key(&next) {
                seen.insert(next.clone(), ());
                queue.push(next);
            }
        }
    }
    Ok(seen)
}

fn element_order(g: &GroupElement) -> u64 {
    let mut acc = g.clone();
    let mut n = 1u64;
    while !acc.is_identity() {
        acc = acc.mul(g).expect("same spec");
        n += 1;
    }
    n
}

/// Extends `chi(gens[i]) = zeta_{ord_i}^{assignment[i]}` to the whole
/// group by breadth-first products, verifying consistency on every
/// (element, generator) edge. Returns `None` when the assignment does not
/// define a homomorphism.
fn extend_assignment(
    spec: &Arc<GroupSpec>,
    elements: &[GroupElement],
    gens: &[GroupElement],
    gen_orders: &[u64],
    assignment: &[u64],
) -> Result<Option<Character>> {
    let gen_values: Vec<RootOfUnity> = assignment
        .iter()
        .zip(gen_orders)
        .map(|(&k, &n)| RootOfUnity::new(k as i64, n))
        .collect();
    let mut values: BTreeMap<GroupElement, RootOfUnity> = BTreeMap::new();
    values.insert(spec.identity(), RootOfUnity::one());
    let mut queue = vec![spec.identity()];
    while let Some(h) = queue.pop() {
        let v = values[&h];
        for (g, gv) in gens.iter().zip(&gen_values) {
            let next = h.mul(g)?;
            let proposed = v.mul(gv);
            match values.get(&next) {
                Some(existing) => {
                    if *existing != proposed {
                        return Ok(None);
                    }
                }
                None => {
                    values.insert(next.clone(), proposed);
                    queue.push(next);
                }
            }
        }
    }
    // Re-walk every edge: pushing only tree edges above would leave cross
    // edges unchecked after the first assignment round.
    for h in elements {
        let v = values[h];
        for (g, gv) in gens.iter().zip(&gen_values) {
            let next = h.mul(g)?;
            if values[&next] != v.mul(gv) {
                return Ok(None);
            }
        }
    }
    Ok(Some(Character { spec: spec.clone(), values }))
}

/// The Fourier transform `fhat(chi) = sum_s f(s) * conj(chi(s))`, exact
/// over cyclotomic scalars. The result is aligned with [`characters`].
pub fn fourier(
    spec: &Arc<GroupSpec>,
    f: &BTreeMap<GroupElement, GaussRat>,
) -> Result<Vec<(Character, Cyclo)>> {
    let chars = characters(spec)?;
    let mut out = Vec::with_capacity(chars.len());
    for ch in chars {
        let mut acc = Cyclo::zero();
        for (s, c) in f {
            let root = ch.eval(s)?.conj();
            acc = acc + Cyclo::from_gauss(c) * Cyclo::from_root(&root);
        }
        out.push((ch, acc));
    }
    Ok(out)
}

/// Fourier inversion `f(s) = (1/|G|) sum_chi fhat(chi) * chi(s)`.
pub fn inverse_fourier(
    spec: &Arc<GroupSpec>,
    fhat: &[(Character, Cyclo)],
) -> Result<BTreeMap<GroupElement, Cyclo>> {
    let order = spec
        .order()
        .ok_or_else(|| Error::unsupported("Fourier inversion on an infinite group"))?;
    let scale = Rat::new(1.into(), (order as i64).into());
    let mut out = BTreeMap::new();
    for s in spec.elements()? {
        let mut acc = Cyclo::zero();
        for (ch, v) in fhat {
            acc = acc + v.clone() * Cyclo::from_root(&ch.eval(&s)?);
        }
        let value = acc.scale(&scale);
        if !value.is_zero() {
            out.insert(s, value);
        }
    }
    Ok(out)
}
