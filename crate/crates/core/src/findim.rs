//! Exact finite-dimensional realizations of crossed products.
//!
//! A [`FinBase`] is a small *-algebra with a faithful state and an exact
//! action of a group: either Gaussian-rational functions on finitely many
//! points (acted on by point permutations) or a full matrix algebra (acted
//! on by unitary conjugations). Over such a base and a finite group, the
//! crossed product has a concrete realization by block matrices on
//! `ℓ²(G) ⊗ 𝓗`, where `𝓗` is the algebra itself carrying the inner
//! product `⟨x, y⟩ = τ(y*x)`. Every entry is a cyclotomic number, so each
//! representation identity — covariance, unitarity, traciality — is a
//! decidable equality, and the module serves as the brute-force oracle for
//! the symbolic computations elsewhere in this crate.
//!
//! For finite abelian groups the module also realizes the dual action of
//! the character group by conjugation with the diagonal unitaries `v(p)`,
//! and [`takesaki_check`] verifies by exact linear algebra that the double
//! crossed product `M ⋊_α G ⋊_α̂ Ĝ` is isomorphic to `M ⊗ B(ℓ²(G))` via
//! the map determined on generators by
//! `π̂(π(x)) ↦ π(x)`, `π̂(λ(r)) ↦ λ(r)`, and `λ̂(p) ↦ v(p)`.

use crate::error::{Error, Result};
use crate::groups::{characters, Character, GroupElement, GroupOps, GroupSpec};
use crate::scalar::{Cyclo, Rat};
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// A dense matrix over exact cyclotomic scalars.
///
/// Representation matrices are block-sparse (most entries are zero), so
/// multiplication skips zero entries of the left factor row and the right
/// factor row; that keeps products of permutation-like blocks near-linear
/// in the number of nonzero entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    entries: Vec<Cyclo>,
}

impl Matrix {
    pub fn zero(rows: usize, cols: usize) -> Matrix {
        Matrix { rows, cols, entries: vec![Cyclo::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Matrix {
        let mut m = Matrix::zero(n, n);
        for i in 0..n {
            m.set(i, i, Cyclo::one());
        }
        m
    }

    pub fn diagonal(entries: Vec<Cyclo>) -> Matrix {
        let n = entries.len();
        let mut m = Matrix::zero(n, n);
        for (i, e) in entries.into_iter().enumerate() {
            m.set(i, i, e);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Cyclo) -> Matrix {
        let mut m = Matrix::zero(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Cyclo {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Cyclo) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Cyclo::is_zero)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// True when every off-diagonal entry vanishes (square matrices only).
    pub fn is_diagonal(&self) -> bool {
        self.is_square()
            && (0..self.rows)
                .all(|i| (0..self.cols).all(|j| i == j || self.get(i, j).is_zero()))
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch in add");
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.clone() + b.clone())
            .collect();
        Matrix { rows: self.rows, cols: self.cols, entries }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch in sub");
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.clone() - b.clone())
            .collect();
        Matrix { rows: self.rows, cols: self.cols, entries }
    }

    pub fn scale(&self, c: &Cyclo) -> Matrix {
        if c.is_zero() {
            return Matrix::zero(self.rows, self.cols);
        }
        let entries = self
            .entries
            .iter()
            .map(|a| if a.is_zero() { Cyclo::zero() } else { a.clone() * c.clone() })
            .collect();
        Matrix { rows: self.rows, cols: self.cols, entries }
    }

    /// `self += c·other`, skipping zero entries of `other`.
    pub fn add_scaled(&mut self, other: &Matrix, c: &Cyclo) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        if c.is_zero() {
            return;
        }
        for (idx, b) in other.entries.iter().enumerate() {
            if b.is_zero() {
                continue;
            }
            let cur = std::mem::replace(&mut self.entries[idx], Cyclo::zero());
            self.entries[idx] = cur + b.clone() * c.clone();
        }
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "shape mismatch in mul");
        let mut out = Matrix::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * other.cols + j;
                    let cur = std::mem::replace(&mut out.entries[idx], Cyclo::zero());
                    out.entries[idx] = cur + a.clone() * b.clone();
                }
            }
        }
        out
    }

    pub fn conj_transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn kron(&self, other: &Matrix) -> Matrix {
        let mut out = Matrix::zero(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.is_zero() {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        let b = other.get(k, l);
                        if b.is_zero() {
                            continue;
                        }
                        out.set(i * other.rows + k, j * other.cols + l, a.clone() * b.clone());
                    }
                }
            }
        }
        out
    }

    pub fn trace(&self) -> Cyclo {
        assert!(self.is_square(), "trace of a non-square matrix");
        (0..self.rows).fold(Cyclo::zero(), |acc, i| acc + self.get(i, i).clone())
    }

    /// Writes `block` into the submatrix with top-left corner `(r0, c0)`.
    pub fn place(&mut self, r0: usize, c0: usize, block: &Matrix) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                let v = block.get(i, j);
                if !v.is_zero() {
                    self.set(r0 + i, c0 + j, v.clone());
                }
            }
        }
    }

    /// The square submatrix with top-left corner `(r0, c0)` and side `n`.
    pub fn block(&self, r0: usize, c0: usize, n: usize) -> Matrix {
        Matrix::from_fn(n, n, |i, j| self.get(r0 + i, c0 + j).clone())
    }

    /// Determinant by Gaussian elimination; zero for singular input.
    pub fn det(&self) -> Cyclo {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        let mut m = self.clone();
        let mut det = Cyclo::one();
        for col in 0..n {
            let pivot = match (col..n).find(|&r| !m.get(r, col).is_zero()) {
                Some(p) => p,
                None => return Cyclo::zero(),
            };
            if pivot != col {
                for j in 0..n {
                    let a = m.get(col, j).clone();
                    let b = m.get(pivot, j).clone();
                    m.set(col, j, b);
                    m.set(pivot, j, a);
                }
                det = -det;
            }
            let p = m.get(col, col).clone();
            det = det * p.clone();
            let pinv = p.inv().expect("pivot is nonzero");
            for r in col + 1..n {
                let factor = m.get(r, col).clone() * pinv.clone();
                if factor.is_zero() {
                    continue;
                }
                for j in col..n {
                    let v = m.get(r, j).clone() - factor.clone() * m.get(col, j).clone();
                    m.set(r, j, v);
                }
            }
        }
        det
    }

    /// Inverse by Gauss–Jordan elimination; `None` for singular input.
    pub fn inverse(&self) -> Option<Matrix> {
        assert!(self.is_square(), "inverse of a non-square matrix");
        let n = self.rows;
        let mut m = self.clone();
        let mut inv = Matrix::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !m.get(r, col).is_zero())?;
            if pivot != col {
                for j in 0..n {
                    let (a, b) = (m.get(col, j).clone(), m.get(pivot, j).clone());
                    m.set(col, j, b);
                    m.set(pivot, j, a);
                    let (a, b) = (inv.get(col, j).clone(), inv.get(pivot, j).clone());
                    inv.set(col, j, b);
                    inv.set(pivot, j, a);
                }
            }
            let pinv = m.get(col, col).clone().inv().expect("pivot is nonzero");
            for j in 0..n {
                let a = m.get(col, j).clone() * pinv.clone();
                m.set(col, j, a);
                let b = inv.get(col, j).clone() * pinv.clone();
                inv.set(col, j, b);
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = m.get(r, col).clone();
                if factor.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let a = m.get(r, j).clone() - factor.clone() * m.get(col, j).clone();
                    m.set(r, j, a);
                    let b = inv.get(r, j).clone() - factor.clone() * inv.get(col, j).clone();
                    inv.set(r, j, b);
                }
            }
        }
        Some(inv)
    }

    /// Entries in row-major order, for span computations.
    fn flatten(&self) -> Vec<Cyclo> {
        self.entries.clone()
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// A row-echelon spanning set over the cyclotomic field, for exact rank
/// and membership computations. Rows are kept sorted by pivot column with
/// unit leading entries; reduction is plain back-substitution.
struct RowSpace {
    /// `(pivot column, row)` pairs sorted by pivot column.
    rows: Vec<(usize, Vec<Cyclo>)>,
}

impl RowSpace {
    fn new() -> RowSpace {
        RowSpace { rows: Vec::new() }
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, v: &mut [Cyclo]) {
        for (pivot, row) in &self.rows {
            if v[*pivot].is_zero() {
                continue;
            }
            let c = std::mem::replace(&mut v[*pivot], Cyclo::zero());
            for (j, r) in row.iter().enumerate().skip(*pivot + 1) {
                if r.is_zero() {
                    continue;
                }
                let cur = std::mem::replace(&mut v[j], Cyclo::zero());
                v[j] = cur - c.clone() * r.clone();
            }
        }
    }

    /// Adds a vector to the span. Returns `true` when the rank grew.
    fn insert(&mut self, mut v: Vec<Cyclo>) -> bool {
        self.reduce(&mut v);
        let pivot = match v.iter().position(|c| !c.is_zero()) {
            Some(p) => p,
            None => return false,
        };
        let leading = v[pivot].clone().inv().expect("leading entry is nonzero");
        for c in v.iter_mut().skip(pivot) {
            if !c.is_zero() {
                let cur = std::mem::replace(c, Cyclo::zero());
                *c = cur * leading.clone();
            }
        }
        let at = self.rows.partition_point(|(p, _)| *p < pivot);
        self.rows.insert(at, (pivot, v));
        true
    }

    fn contains(&self, v: &[Cyclo]) -> bool {
        let mut w = v.to_vec();
        self.reduce(&mut w);
        w.iter().all(Cyclo::is_zero)
    }
}

/// One generator's worth of the base action: an algebra automorphism.
#[derive(Debug, Clone)]
pub enum Automorphism {
    /// Relabels the points of a function algebra: the indicator of point
    /// `i` is sent to the indicator of `perm[i]`.
    Permutation(Vec<u32>),
    /// Conjugation `x ↦ U x U*` of a matrix algebra.
    AdUnitary(Matrix),
}

/// The two supported base algebras.
#[derive(Debug, Clone)]
pub enum BaseKind {
    /// Functions on `weights.len()` points — diagonal matrices — with the
    /// state `τ(x) = Σ weights[i]·x_ii`.
    FunctionAlgebra { weights: Vec<Rat> },
    /// The full `n×n` matrix algebra with the state `τ(x) = tr(density·x)`.
    MatrixAlgebra { n: usize, density: Matrix },
}

/// A base algebra with a state and an exact group action, the coefficient
/// algebra for matrix realizations of crossed products.
#[derive(Debug, Clone)]
pub struct FinBase {
    group: Arc<GroupSpec>,
    kind: BaseKind,
    auts: Vec<Automorphism>,
}

/// A composed automorphism of the base, in the same shape as the
/// per-generator data.
enum ComposedAut {
    Perm(Vec<u32>),
    Unitary(Matrix),
}

impl ComposedAut {
    /// Equality as maps. Conjugations agree exactly when the unitaries
    /// differ by a scalar, since the center of a full matrix algebra is
    /// the scalars.
    fn same_map(&self, other: &ComposedAut) -> bool {
        match (self, other) {
            (ComposedAut::Perm(a), ComposedAut::Perm(b)) => a == b,
            (ComposedAut::Unitary(u), ComposedAut::Unitary(v)) => {
                let m = u.mul(&v.conj_transpose());
                let c = m.get(0, 0).clone();
                !c.is_zero() && m == Matrix::identity(m.rows()).scale(&c)
            }
            _ => false,
        }
    }
}

fn perm_inverse(p: &[u32]) -> Vec<u32> {
    let mut inv = vec![0u32; p.len()];
    for (i, &t) in p.iter().enumerate() {
        inv[t as usize] = i as u32;
    }
    inv
}

impl FinBase {
    /// Functions on `weights.len()` points. `perms` assigns one point
    /// permutation per designated group generator; the assignment must
    /// define an action that preserves the weights.
    pub fn function_algebra(
        group: Arc<GroupSpec>,
        weights: Vec<Rat>,
        perms: Vec<Vec<u32>>,
    ) -> Result<FinBase> {
        if weights.is_empty() {
            return Err(Error::structural("a function algebra needs at least one point"));
        }
        for w in &weights {
            if *w <= Rat::zero() {
                return Err(Error::structural("state weights must be strictly positive"));
            }
        }
        if weights.iter().sum::<Rat>() != Rat::one() {
            return Err(Error::structural("state weights must sum to 1"));
        }
        if perms.len() != group.generator_count() {
            return Err(Error::structural(format!(
                "expected one permutation per generator ({}), got {}",
                group.generator_count(),
                perms.len()
            )));
        }
        let n = weights.len();
        for p in &perms {
            if p.len() != n {
                return Err(Error::structural("permutation length differs from the point count"));
            }
            let mut seen = vec![false; n];
            for &t in p {
                if (t as usize) >= n || seen[t as usize] {
                    return Err(Error::structural("not a permutation of the points"));
                }
                seen[t as usize] = true;
            }
            for (i, &t) in p.iter().enumerate() {
                if weights[t as usize] != weights[i] {
                    return Err(Error::structural(
                        "the action must preserve the state: weights must be constant on orbits",
                    ));
                }
            }
        }
        let base = FinBase {
            group,
            kind: BaseKind::FunctionAlgebra { weights },
            auts: perms.into_iter().map(Automorphism::Permutation).collect(),
        };
        validate_aut_assignment(&base.group, &base.auts, &base.kind)?;
        Ok(base)
    }

    /// The full `n×n` matrix algebra with state `tr(density·x)`. The
    /// density must be Hermitian, positive definite, of trace 1, and the
    /// unitaries (one per designated generator) must commute with it.
    pub fn matrix_algebra(
        group: Arc<GroupSpec>,
        density: Matrix,
        unitaries: Vec<Matrix>,
    ) -> Result<FinBase> {
        let n = density.rows();
        if n == 0 || !density.is_square() {
            return Err(Error::structural("the density must be a nonempty square matrix"));
        }
        if density != density.conj_transpose() {
            return Err(Error::structural("the density must be Hermitian"));
        }
        if density.trace() != Cyclo::one() {
            return Err(Error::structural("the density must have trace 1"));
        }
        // Sylvester's criterion: all leading principal minors positive.
        for k in 1..=n {
            let minor = density.block(0, 0, k).det();
            match minor.to_rat() {
                Some(d) if d > Rat::zero() => {}
                _ => {
                    return Err(Error::structural(
                        "the density must be positive definite (a leading minor is not positive)",
                    ))
                }
            }
        }
        if unitaries.len() != group.generator_count() {
            return Err(Error::structural(format!(
                "expected one unitary per generator ({}), got {}",
                group.generator_count(),
                unitaries.len()
            )));
        }
        for u in &unitaries {
            if u.rows() != n || u.cols() != n {
                return Err(Error::structural("unitary size differs from the algebra size"));
            }
            if u.conj_transpose().mul(u) != Matrix::identity(n) {
                return Err(Error::structural("conjugating matrices must be unitary"));
            }
            if u.mul(&density) != density.mul(u) {
                return Err(Error::structural(
                    "the action must preserve the state: unitaries must commute with the density",
                ));
            }
        }
        let base = FinBase {
            group,
            kind: BaseKind::MatrixAlgebra { n, density },
            auts: unitaries.into_iter().map(Automorphism::AdUnitary).collect(),
        };
        validate_aut_assignment(&base.group, &base.auts, &base.kind)?;
        Ok(base)
    }

    /// Builds a base without any validation. This exists to let callers
    /// assemble deliberately broken models (non-preserved states,
    /// non-actions) whose defects an exact checker should detect; every
    /// operation still computes, it just no longer promises the usual
    /// identities.
    pub fn new_unchecked(
        group: Arc<GroupSpec>,
        kind: BaseKind,
        auts: Vec<Automorphism>,
    ) -> FinBase {
        FinBase { group, kind, auts }
    }

    pub fn group(&self) -> &Arc<GroupSpec> {
        &self.group
    }

    pub fn kind(&self) -> &BaseKind {
        &self.kind
    }

    /// Side length of the element matrices.
    pub fn elem_size(&self) -> usize {
        match &self.kind {
            BaseKind::FunctionAlgebra { weights } => weights.len(),
            BaseKind::MatrixAlgebra { n, .. } => *n,
        }
    }

    /// Linear dimension of the algebra, which also is the dimension of the
    /// inner-product space it carries.
    pub fn dim(&self) -> usize {
        match &self.kind {
            BaseKind::FunctionAlgebra { weights } => weights.len(),
            BaseKind::MatrixAlgebra { n, .. } => n * n,
        }
    }

    /// The canonical linear basis: diagonal matrix units for a function
    /// algebra, all matrix units in row-major order for a matrix algebra.
    pub fn basis(&self) -> Vec<Matrix> {
        let n = self.elem_size();
        match &self.kind {
            BaseKind::FunctionAlgebra { .. } => (0..n)
                .map(|i| {
                    let mut m = Matrix::zero(n, n);
                    m.set(i, i, Cyclo::one());
                    m
                })
                .collect(),
            BaseKind::MatrixAlgebra { .. } => (0..n * n)
                .map(|k| {
                    let mut m = Matrix::zero(n, n);
                    m.set(k / n, k % n, Cyclo::one());
                    m
                })
                .collect(),
        }
    }

    /// The unit of the algebra.
    pub fn one(&self) -> Matrix {
        Matrix::identity(self.elem_size())
    }

    /// Checks that `x` is an element of the algebra: the right size, and
    /// diagonal for a function algebra.
    pub fn check_element(&self, x: &Matrix) -> Result<()> {
        let n = self.elem_size();
        if x.rows() != n || x.cols() != n {
            return Err(Error::structural(format!(
                "element has shape {}×{}, the algebra is {n}×{n}",
                x.rows(),
                x.cols()
            )));
        }
        if matches!(self.kind, BaseKind::FunctionAlgebra { .. }) && !x.is_diagonal() {
            return Err(Error::structural(
                "elements of a function algebra are diagonal matrices",
            ));
        }
        Ok(())
    }

    /// The state `τ(x)`.
    pub fn state(&self, x: &Matrix) -> Cyclo {
        match &self.kind {
            BaseKind::FunctionAlgebra { weights } => weights
                .iter()
                .enumerate()
                .fold(Cyclo::zero(), |acc, (i, w)| {
                    acc + x.get(i, i).clone() * Cyclo::from_rat(w.clone())
                }),
            BaseKind::MatrixAlgebra { density, .. } => density.mul(x).trace(),
        }
    }

    /// Coordinates of `x` in [`FinBase::basis`] order.
    pub fn coords(&self, x: &Matrix) -> Vec<Cyclo> {
        let n = self.elem_size();
        match &self.kind {
            BaseKind::FunctionAlgebra { .. } => (0..n).map(|i| x.get(i, i).clone()).collect(),
            BaseKind::MatrixAlgebra { .. } => x.flatten(),
        }
    }

    /// The composed automorphism of a group element: letter automorphisms
    /// composed left to right (the rightmost letter acts first).
    fn element_aut(&self, g: &GroupElement) -> Result<ComposedAut> {
        if g.spec() != &self.group {
            return Err(Error::structural("element does not belong to the base's group"));
        }
        let mut acc = match &self.kind {
            BaseKind::FunctionAlgebra { weights } => {
                ComposedAut::Perm((0..weights.len() as u32).collect())
            }
            BaseKind::MatrixAlgebra { n, .. } => ComposedAut::Unitary(Matrix::identity(*n)),
        };
        for (idx, exp) in g.letters() {
            let aut = &self.auts[idx as usize];
            acc = match (acc, aut) {
                (ComposedAut::Perm(sigma), Automorphism::Permutation(p)) => {
                    let step = if exp >= 0 { p.clone() } else { perm_inverse(p) };
                    // (σ ∘ step)(i) = σ(step(i)).
                    ComposedAut::Perm(step.iter().map(|&i| sigma[i as usize]).collect())
                }
                (ComposedAut::Unitary(u), Automorphism::AdUnitary(v)) => {
                    let step = if exp >= 0 { v.clone() } else { v.conj_transpose() };
                    ComposedAut::Unitary(u.mul(&step))
                }
                _ => {
                    return Err(Error::structural(
                        "automorphism kind does not match the base algebra",
                    ))
                }
            };
        }
        Ok(acc)
    }

    /// Applies the action: `α_g(x)`.
    pub fn apply(&self, g: &GroupElement, x: &Matrix) -> Result<Matrix> {
        self.check_element(x)?;
        match self.element_aut(g)? {
            ComposedAut::Perm(sigma) => {
                let n = sigma.len();
                let mut out = Matrix::zero(n, n);
                for (i, &t) in sigma.iter().enumerate() {
                    out.set(t as usize, t as usize, x.get(i, i).clone());
                }
                Ok(out)
            }
            ComposedAut::Unitary(u) => Ok(u.mul(x).mul(&u.conj_transpose())),
        }
    }

    /// Gram matrix of [`FinBase::basis`] under `⟨x, y⟩ = τ(x*y)`, read
    /// entrywise off the state so it stays definitionally correct.
    fn gram(&self) -> Matrix {
        let basis = self.basis();
        let d = basis.len();
        Matrix::from_fn(d, d, |u, v| self.state(&basis[u].conj_transpose().mul(&basis[v])))
    }

    /// Left multiplication `y ↦ x·y` as a matrix in basis coordinates.
    fn left_mult(&self, x: &Matrix) -> Matrix {
        match &self.kind {
            BaseKind::FunctionAlgebra { .. } => x.clone(),
            BaseKind::MatrixAlgebra { n, .. } => x.kron(&Matrix::identity(*n)),
        }
    }

    fn finite_elements(&self) -> Result<Vec<GroupElement>> {
        if self.group.order().is_none() {
            return Err(Error::unsupported(
                "matrix realizations exist only over finite groups",
            ));
        }
        self.group.elements()
    }

    /// Dimension of the space `ℓ²(G) ⊗ 𝓗` the realization acts on.
    pub fn rep_dim(&self) -> Result<usize> {
        Ok(self.finite_elements()?.len() * self.dim())
    }

    /// Realizes a normal form `Σ_s π(a_s)·u_s` as one block matrix: the
    /// summand for `s` contributes the block `L_{α_{(st)^{-1}}(a_s)}` at
    /// block position `(s·t, t)`.
    pub fn realize(&self, coeffs: &BTreeMap<GroupElement, Matrix>) -> Result<Matrix> {
        let elements = self.finite_elements()?;
        let h = self.dim();
        let index: BTreeMap<&GroupElement, usize> =
            elements.iter().enumerate().map(|(i, g)| (g, i)).collect();
        let mut out = Matrix::zero(elements.len() * h, elements.len() * h);
        for (s, a) in coeffs {
            self.check_element(a)?;
            if s.spec() != &self.group {
                return Err(Error::structural("coefficient index from a different group"));
            }
            for (t_idx, t) in elements.iter().enumerate() {
                let st = s.mul(t)?;
                let row = *index.get(&st).expect("product stays in the group");
                let block = self.left_mult(&self.apply(&st.inv(), a)?);
                // Accumulate: distinct summands can hit the same block.
                for i in 0..h {
                    for j in 0..h {
                        let v = block.get(i, j);
                        if v.is_zero() {
                            continue;
                        }
                        let cur = out.get(row * h + i, t_idx * h + j).clone();
                        out.set(row * h + i, t_idx * h + j, cur + v.clone());
                    }
                }
            }
        }
        Ok(out)
    }

    /// The representation `π(x)`: block-diagonal with block `L_{α_{s^{-1}}(x)}`
    /// at position `s`.
    pub fn rep_pi(&self, x: &Matrix) -> Result<Matrix> {
        self.realize(&BTreeMap::from([(self.group.identity(), x.clone())]))
    }

    /// The translation unitary `u_r`: a block permutation sending block `t`
    /// to block `r·t`.
    pub fn rep_lambda(&self, r: &GroupElement) -> Result<Matrix> {
        self.realize(&BTreeMap::from([(r.clone(), self.one())]))
    }

    /// The trace of a normal form: the state of its identity coefficient.
    pub fn exact_trace(&self, coeffs: &BTreeMap<GroupElement, Matrix>) -> Result<Cyclo> {
        for (s, a) in coeffs {
            self.check_element(a)?;
            if s.spec() != &self.group {
                return Err(Error::structural("coefficient index from a different group"));
            }
        }
        Ok(coeffs
            .get(&self.group.identity())
            .map(|a| self.state(a))
            .unwrap_or_else(Cyclo::zero))
    }

    /// The same trace read off a realized matrix as the vector state at
    /// `δ_e ⊗ 1̂` — an independent route to [`FinBase::exact_trace`].
    pub fn vector_state(&self, rep: &Matrix) -> Result<Cyclo> {
        let elements = self.finite_elements()?;
        let h = self.dim();
        let n = elements.len() * h;
        if rep.rows() != n || rep.cols() != n {
            return Err(Error::structural("matrix does not act on the realization space"));
        }
        let e_idx = elements.iter().position(|g| g.is_identity()).expect("identity is listed");
        let one_coords = self.coords(&self.one());
        let mut xi = Matrix::zero(n, 1);
        for (j, c) in one_coords.iter().enumerate() {
            xi.set(e_idx * h + j, 0, c.clone());
        }
        let gram = Matrix::identity(elements.len()).kron(&self.gram());
        Ok(xi.conj_transpose().mul(&gram).mul(rep).mul(&xi).get(0, 0).clone())
    }

    /// The adjoint of an operator on `ℓ²(G) ⊗ 𝓗`. The basis of `𝓗` is
    /// orthogonal only up to the Gram matrix of the state, so this is the
    /// Gram-twisted conjugate transpose, not the raw one.
    pub fn rep_adjoint(&self, rep: &Matrix) -> Result<Matrix> {
        let elements = self.finite_elements()?;
        let n = elements.len() * self.dim();
        if rep.rows() != n || rep.cols() != n {
            return Err(Error::structural("matrix does not act on the realization space"));
        }
        let g_phi = self.gram();
        let g_inv = g_phi.inverse().ok_or_else(|| {
            Error::structural("the state is degenerate: its Gram matrix is singular")
        })?;
        let blocks = Matrix::identity(elements.len());
        Ok(blocks
            .kron(&g_inv)
            .mul(&rep.conj_transpose())
            .mul(&blocks.kron(&g_phi)))
    }

    /// The diagonal unitary `v(p)` with block `conj(p(s))·I` at position
    /// `s`. Conjugation by it fixes every `π(x)` and multiplies `u_s` by
    /// `conj(p(s))` — the dual action of the character group.
    pub fn dual_action_matrix(&self, p: &Character) -> Result<Matrix> {
        if !self.group.is_abelian() {
            return Err(Error::unsupported("the dual action needs an abelian group"));
        }
        let elements = self.finite_elements()?;
        if p.spec() != &self.group {
            return Err(Error::structural("character of a different group"));
        }
        let h = self.dim();
        let mut out = Matrix::zero(elements.len() * h, elements.len() * h);
        for (s_idx, s) in elements.iter().enumerate() {
            let phase = Cyclo::from_root(&p.eval(s)?.conj());
            for j in 0..h {
                out.set(s_idx * h + j, s_idx * h + j, phase.clone());
            }
        }
        Ok(out)
    }

    /// Dimension of the span of realized monomials `π(x_i)·u_r` fixed by
    /// every dual conjugation. Each monomial is verified to transform by
    /// the exact phase `conj(p(r))`, so the fixed subspace is spanned by
    /// the monomials with `p(r) = 1` for all `p` — the copy of the base.
    pub fn dual_fixed_point_dimension(&self) -> Result<usize> {
        let elements = self.finite_elements()?;
        let chars = characters(&self.group)?;
        let basis = self.basis();

        // The monomials must be independent for the count to be a
        // dimension; verify by exact elimination.
        let mut span = RowSpace::new();
        let mut monomials = Vec::new();
        for r in &elements {
            for x in &basis {
                let m = self.realize(&BTreeMap::from([(r.clone(), x.clone())]))?;
                if !span.insert(m.flatten()) {
                    return Err(Error::structural(
                        "realized monomials are not linearly independent",
                    ));
                }
                monomials.push((r.clone(), m));
            }
        }

        let vs: Vec<(Character, Matrix)> = chars
            .iter()
            .map(|p| Ok((p.clone(), self.dual_action_matrix(p)?)))
            .collect::<Result<_>>()?;
        let mut fixed = 0usize;
        for (r, m) in &monomials {
            let mut is_fixed = true;
            for (p, v) in &vs {
                let phase = Cyclo::from_root(&p.eval(r)?.conj());
                let conjugated = v.mul(m).mul(&self.rep_adjoint(v)?);
                if conjugated != m.scale(&phase) {
                    return Err(Error::structural(
                        "dual conjugation failed to act by the predicted phase",
                    ));
                }
                if !phase.is_one() {
                    is_fixed = false;
                }
            }
            if is_fixed {
                fixed += 1;
            }
        }
        Ok(fixed)
    }
}

/// Verifies that assigning `auts[i]` to generator `i` defines an action of
/// the group (not merely of the free group on its generators).
fn validate_aut_assignment(
    group: &Arc<GroupSpec>,
    auts: &[Automorphism],
    kind: &BaseKind,
) -> Result<()> {
    let probe = FinBase { group: group.clone(), kind: kind.clone(), auts: auts.to_vec() };
    match &**group {
        GroupSpec::FiniteByTable { .. } => {
            let elements = group.elements()?;
            for a in &elements {
                let fa = probe.element_aut(a)?;
                for b in &elements {
                    let fb = probe.element_aut(b)?;
                    let fab = probe.element_aut(&a.mul(b)?)?;
                    let composed = match (&fa, &fb) {
                        (ComposedAut::Perm(p), ComposedAut::Perm(q)) => {
                            ComposedAut::Perm(q.iter().map(|&i| p[i as usize]).collect())
                        }
                        (ComposedAut::Unitary(u), ComposedAut::Unitary(v)) => {
                            ComposedAut::Unitary(u.mul(v))
                        }
                        _ => unreachable!("kinds are uniform within a base"),
                    };
                    if !composed.same_map(&fab) {
                        return Err(Error::structural(format!(
                            "automorphisms are inconsistent with the group law at {a}·{b}"
                        )));
                    }
                }
            }
            Ok(())
        }
        GroupSpec::FreeAbelian { .. } => {
            for (i, p) in auts.iter().enumerate() {
                for q in &auts[i + 1..] {
                    if !auts_commute(p, q) {
                        return Err(Error::structural(
                            "automorphisms of commuting generators must commute",
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
                slices.push((Arc::new(part.clone()), auts[offset..offset + m].to_vec()));
                offset += m;
            }
            for (part, slice) in &slices {
                validate_aut_assignment(part, slice, kind)?;
            }
            for (i, (_, left)) in slices.iter().enumerate() {
                for (_, right) in &slices[i + 1..] {
                    for p in left {
                        for q in right {
                            if !auts_commute(p, q) {
                                return Err(Error::structural(
                                    "automorphisms of distinct factors must commute",
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

fn auts_commute(a: &Automorphism, b: &Automorphism) -> bool {
    match (a, b) {
        (Automorphism::Permutation(p), Automorphism::Permutation(q)) => {
            let pq: Vec<u32> = q.iter().map(|&i| p[i as usize]).collect();
            let qp: Vec<u32> = p.iter().map(|&i| q[i as usize]).collect();
            pq == qp
        }
        (Automorphism::AdUnitary(u), Automorphism::AdUnitary(v)) => {
            ComposedAut::Unitary(u.mul(v)).same_map(&ComposedAut::Unitary(v.mul(u)))
        }
        _ => false,
    }
}

/// Size bounds for [`takesaki_check`]: the double crossed product grows as
/// `dim(M)·|G|²`, and the verification is quadratic in that count.
#[derive(Debug, Clone)]
pub struct DualityLimits {
    pub max_group_order: u64,
    pub max_base_dim: usize,
}

impl Default for DualityLimits {
    fn default() -> Self {
        DualityLimits { max_group_order: 6, max_base_dim: 9 }
    }
}

/// Outcome of a successful duality verification.
#[derive(Debug, Clone)]
pub struct DualityReport {
    /// Order of the group (equal to the order of its character group).
    pub group_order: u64,
    /// Linear dimension of the base algebra.
    pub base_dim: usize,
    /// Dimension of the double crossed product span; `base_dim·group_order²`.
    pub lhs_dim: usize,
    /// Dimension of the span of `M ⊗ B(ℓ²(G))`; equal to `lhs_dim`.
    pub rhs_dim: usize,
    /// Number of monomial pairs whose products were verified.
    pub products_checked: usize,
    /// Number of monomials whose adjoints were verified.
    pub adjoints_checked: usize,
}

/// Verifies, by exact linear algebra, that the double crossed product
/// `M ⋊_α G ⋊_α̂ Ĝ` is isomorphic to `M ⊗ B(ℓ²(G))` for a finite abelian
/// group, with default size limits. See [`takesaki_check_with`].
pub fn takesaki_check(base: &FinBase) -> Result<DualityReport> {
    takesaki_check_with(base, &DualityLimits::default())
}

/// The duality check with explicit size limits.
///
/// The double crossed product acts on functions `Ĝ → (G → 𝓗)`. Its
/// spanning monomials `π̂(π(x_i)·u_r)·û_p` are built by honest products of
/// the generator matrices; the map Γ sends such a monomial to
/// `π(x_i)·u_r·v(p)` on `G → 𝓗`. The verification then checks, all by
/// decidable matrix equality:
///
/// * both monomial families are linearly independent (so Γ is a
///   well-defined linear bijection between the spans),
/// * products of spanning monomials land where the closed multiplication
///   law says, with the same coefficients on both sides (so Γ is
///   multiplicative),
/// * Gram-twisted adjoints match on both sides (so Γ is *-preserving),
/// * the image span equals the span of `M ⊗ B(ℓ²(G))`, and the unit maps
///   to the unit.
pub fn takesaki_check_with(base: &FinBase, limits: &DualityLimits) -> Result<DualityReport> {
    if !base.group().is_abelian() {
        return Err(Error::unsupported("duality needs a finite abelian group"));
    }
    let elements = base.finite_elements()?;
    let order = elements.len();
    if order as u64 > limits.max_group_order {
        return Err(Error::budget_exceeded(
            limits.max_group_order,
            format!("group of order {order} exceeds the duality bound"),
        ));
    }
    let dim = base.dim();
    if dim > limits.max_base_dim {
        return Err(Error::budget_exceeded(
            limits.max_base_dim as u64,
            format!("base of dimension {dim} exceeds the duality bound"),
        ));
    }
    let chars = characters(base.group())?;
    let h = dim;
    let w_dim = order * h; // the realization space of M ⋊ G
    let v_dim = order * w_dim; // of (M ⋊ G) ⋊ Ĝ

    // Generator matrices on the inner space.
    let basis = base.basis();
    let lambdas: Vec<Matrix> =
        elements.iter().map(|r| base.rep_lambda(r)).collect::<Result<_>>()?;
    let vs: Vec<Matrix> = chars.iter().map(|p| base.dual_action_matrix(p)).collect::<Result<_>>()?;

    // Multiplication tables for indices, and a character index lookup.
    let elem_index = |g: &GroupElement| elements.iter().position(|e| e == g).expect("in group");
    let char_index = |c: &Character| chars.iter().position(|d| d == c).expect("in dual group");

    // π̂ of an operator T on the inner space: block-diagonal over p with
    // block α̂_{p^{-1}}(T) = v(p)*·T·v(p).
    let pihat = |t: &Matrix| -> Result<Matrix> {
        let mut out = Matrix::zero(v_dim, v_dim);
        for (p_idx, v) in vs.iter().enumerate() {
            let block = base.rep_adjoint(v)?.mul(t).mul(v);
            out.place(p_idx * w_dim, p_idx * w_dim, &block);
        }
        Ok(out)
    };
    // û_{p0}: the block permutation sending block q to block p0·q.
    let lamhat = |p0: &Character| -> Result<Matrix> {
        let mut out = Matrix::zero(v_dim, v_dim);
        for (q_idx, q) in chars.iter().enumerate() {
            let target = char_index(&p0.mul(q)?);
            out.place(target * w_dim, q_idx * w_dim, &Matrix::identity(w_dim));
        }
        Ok(out)
    };

    // Spanning monomials of the double crossed product and their images.
    struct Monomial {
        x: usize,
        r: usize,
        p: usize,
        big: Matrix,
        small: Matrix,
    }
    let mut monomials = Vec::with_capacity(dim * order * order);
    for (x_idx, x) in basis.iter().enumerate() {
        let pi_x = base.rep_pi(x)?;
        for (r_idx, _) in elements.iter().enumerate() {
            let a = pi_x.mul(&lambdas[r_idx]);
            let pihat_a = pihat(&a)?;
            for (p_idx, p) in chars.iter().enumerate() {
                monomials.push(Monomial {
                    x: x_idx,
                    r: r_idx,
                    p: p_idx,
                    big: pihat_a.mul(&lamhat(p)?),
                    small: a.mul(&vs[p_idx]),
                });
            }
        }
    }
    let expected = dim * order * order;
    let at = |x: usize, r: usize, p: usize| -> &Monomial {
        &monomials[(x * order + r) * order + p]
    };

    // Linear independence on both sides.
    let mut big_span = RowSpace::new();
    let mut small_span = RowSpace::new();
    for m in &monomials {
        if !big_span.insert(m.big.flatten()) {
            return Err(Error::structural(
                "double crossed product monomials are not linearly independent",
            ));
        }
        small_span.insert(m.small.flatten());
    }
    if small_span.rank() != expected {
        return Err(Error::structural(
            "image monomials are not linearly independent; the map cannot be injective",
        ));
    }

    // The target span of M ⊗ B(ℓ²(G)): L_{x_k} placed in block (s, t).
    let mut target_span = RowSpace::new();
    for x in &basis {
        let block = base.left_mult(x);
        for s in 0..order {
            for t in 0..order {
                let mut m = Matrix::zero(w_dim, w_dim);
                m.place(s * h, t * h, &block);
                if !target_span.insert(m.flatten()) {
                    return Err(Error::structural("tensor basis degenerated"));
                }
            }
        }
    }
    for m in &monomials {
        if !target_span.contains(&m.small.flatten()) {
            return Err(Error::structural(
                "an image monomial escapes the span of M ⊗ B(ℓ²(G))",
            ));
        }
    }

    // The unit maps to the unit: Σ coords(1)_k · monomial(k, e, trivial)
    // must be the identity on both sides (the trivial character is listed
    // first, and so is the group identity).
    let e_idx = elements.iter().position(|g| g.is_identity()).expect("identity is listed");
    let one_coords = base.coords(&base.one());
    let mut unit_big = Matrix::zero(v_dim, v_dim);
    let mut unit_small = Matrix::zero(w_dim, w_dim);
    for (k, c) in one_coords.iter().enumerate() {
        let m = at(k, e_idx, 0);
        unit_big.add_scaled(&m.big, c);
        unit_small.add_scaled(&m.small, c);
    }
    if unit_big != Matrix::identity(v_dim) || unit_small != Matrix::identity(w_dim) {
        return Err(Error::structural("the unit is not realized as the identity"));
    }

    // Multiplicativity: each product of spanning monomials must equal the
    // predicted combination, with identical coefficients on both sides.
    let mut products_checked = 0usize;
    for m1 in &monomials {
        for m2 in &monomials {
            let z = basis[m1.x].mul(&base.apply(&elements[m1.r], &basis[m2.x])?);
            let coeffs = base.coords(&z);
            let r12 = elem_index(&elements[m1.r].mul(&elements[m2.r])?);
            let p12 = char_index(&chars[m1.p].mul(&chars[m2.p])?);
            let phase = Cyclo::from_root(&chars[m1.p].eval(&elements[m2.r])?.conj());
            let mut big = Matrix::zero(v_dim, v_dim);
            let mut small = Matrix::zero(w_dim, w_dim);
            for (k, c) in coeffs.iter().enumerate() {
                let scaled = phase.clone() * c.clone();
                let predicted = at(k, r12, p12);
                big.add_scaled(&predicted.big, &scaled);
                small.add_scaled(&predicted.small, &scaled);
            }
            if big != m1.big.mul(&m2.big) || small != m1.small.mul(&m2.small) {
                return Err(Error::structural(
                    "a product of monomials violates the multiplication law",
                ));
            }
            products_checked += 1;
        }
    }

    // *-preservation: the Gram-twisted adjoint of the monomial for
    // (x, r, p) is conj(p(r)) times the monomial for
    // (α_{r^{-1}}(x*), r^{-1}, p^{-1}), on both sides.
    let g_phi = base.gram();
    let g_inv = g_phi
        .inverse()
        .ok_or_else(|| Error::structural("the state is degenerate: its Gram matrix is singular"))?;
    let big_gram = Matrix::identity(order * order).kron(&g_phi);
    let big_gram_inv = Matrix::identity(order * order).kron(&g_inv);
    let mut adjoints_checked = 0usize;
    for m in &monomials {
        let r = &elements[m.r];
        let p = &chars[m.p];
        let x_conj = base.apply(&r.inv(), &basis[m.x].conj_transpose())?;
        let coeffs = base.coords(&x_conj);
        let r_inv = elem_index(&r.inv());
        let p_inv = char_index(&p.conj());
        let phase = Cyclo::from_root(&p.eval(r)?.conj());
        let mut big = Matrix::zero(v_dim, v_dim);
        let mut small = Matrix::zero(w_dim, w_dim);
        for (k, c) in coeffs.iter().enumerate() {
            let scaled = phase.clone() * c.clone();
            let predicted = at(k, r_inv, p_inv);
            big.add_scaled(&predicted.big, &scaled);
            small.add_scaled(&predicted.small, &scaled);
        }
        let big_adj = big_gram_inv.mul(&m.big.conj_transpose()).mul(&big_gram);
        if big != big_adj || small != base.rep_adjoint(&m.small)? {
            return Err(Error::structural("an adjoint of a monomial violates the *-law"));
        }
        adjoints_checked += 1;
    }

    Ok(DualityReport {
        group_order: order as u64,
        base_dim: dim,
        lhs_dim: big_span.rank(),
        rhs_dim: target_span.rank(),
        products_checked,
        adjoints_checked,
    })
}
