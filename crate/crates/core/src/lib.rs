//! Exact-arithmetic workbench for discrete crossed products.
//!
//! Everything here computes over exact scalars: arbitrary-precision
//! rationals, Gaussian rationals, and cyclotomic numbers. Quantities that
//! are genuinely irrational (norms, measures of infinite unions) are
//! returned as rational intervals of requested width `2^-k` rather than as
//! floats, so every answer doubles as a certificate.
//!
//! The main layers, bottom to top:
//!
//! * [`scalar`] — rationals, intervals, roots of unity, cyclotomic fields;
//! * [`groups`] — finitely generated groups with exact word problems,
//!   characters, and the finite Fourier transform;
//! * [`cantor`] — cylinder unions of Cantor space, Bernoulli/Markov
//!   measures, and measurable actions given by cylinder streams;
//! * [`presentations`] — rational *-polynomials over a countable family of
//!   special points, reduced to canonical indicator combinations;
//! * [`findim`] — finite-dimensional realizations: exact matrices over
//!   cyclotomic scalars, covariant representations, and the double
//!   crossed-product duality check;
//! * [`crossed`] — symbolic crossed-product normal forms, the dual trace,
//!   2-norms, and the dual action of the character group;
//! * [`l1`] — exact convolution algebras: finitely supported functions on a
//!   group and compactly supported piecewise polynomials on the line;
//! * [`axioms`] — the axiom schemas of tracial G-algebras as a fair
//!   enumerable stream of sentences, with an exact defect checker.

pub mod axioms;
pub mod cantor;
pub mod crossed;
pub mod findim;
pub mod groups;
pub mod l1;
pub mod poly;
pub mod presentations;
pub mod scalar;
pub mod seq;

mod error;

pub use error::{Error, Result};
pub use scalar::{Cyclo, GaussRat, Rat, RationalInterval, RootOfUnity};
