//! Fixed, documented enumerations shared across modules.
//!
//! Several parts of the workbench expose countable families (binary words,
//! rational scalars, intervals on the line) through a single index. The
//! orderings below are part of the public interface: changing them would
//! silently renumber every special point, so they are frozen here and
//! covered by tests.

use crate::scalar::{GaussRat, Rat};
use num_bigint::BigInt;
use num_integer::Integer;

/// Binary words ordered by length then binary value:
/// `"" , 0, 1, 00, 01, 10, 11, 000, ...`.
pub fn bit_word(index: usize) -> Vec<u8> {
    let mut len = 0usize;
    let mut first = 0usize; // index of the first word of this length
    while index >= first + (1usize << len) {
        first += 1usize << len;
        len += 1;
    }
    let offset = index - first;
    (0..len).map(|j| ((offset >> (len - 1 - j)) & 1) as u8).collect()
}

/// Inverse of [`bit_word`].
pub fn bit_word_index(word: &[u8]) -> usize {
    let mut first = 0usize;
    for l in 0..word.len() {
        first += 1usize << l;
    }
    let value = word.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
    first + value
}

/// Integers in the order `0, 1, -1, 2, -2, ...`.
pub fn zigzag_int(index: u64) -> i64 {
    if index == 0 {
        0
    } else if index % 2 == 1 {
        ((index + 1) / 2) as i64
    } else {
        -((index / 2) as i64)
    }
}

/// All rationals, each exactly once: diagonal over (zigzag numerator,
/// denominator), skipping fractions that are not in lowest terms.
pub fn rationals() -> impl Iterator<Item = Rat> {
    (0u64..).flat_map(|t| {
        (0..=t).filter_map(move |i| {
            let num = zigzag_int(i);
            let den = (t - i + 1) as i64;
            if num == 0 && den != 1 {
                return None;
            }
            if num.unsigned_abs().gcd(&(den as u64)) != 1 && num != 0 {
                return None;
            }
            Some(Rat::new(BigInt::from(num), BigInt::from(den)))
        })
    })
}

/// The `index`-th rational of [`rationals`].
pub fn rational(index: usize) -> Rat {
    rationals().nth(index).unwrap()
}

/// Strictly positive rationals, each exactly once:
/// `1, 1/2, 2, 1/3, 3, 1/4, 2/3, 3/2, 4, ...`.
pub fn positive_rationals() -> impl Iterator<Item = Rat> {
    (0u64..).flat_map(|t| {
        (0..=t).filter_map(move |i| {
            let num = (i + 1) as i64;
            let den = (t - i + 1) as i64;
            if (num as u64).gcd(&(den as u64)) != 1 {
                return None;
            }
            Some(Rat::new(BigInt::from(num), BigInt::from(den)))
        })
    })
}

/// All Gaussian rationals, each exactly once: diagonal over pairs of
/// [`rational`] indices, so `0, 1, i, 1/2, 1+i, i/2, ...`.
pub fn gaussian(index: usize) -> GaussRat {
    let mut seen = 0usize;
    for t in 0usize.. {
        for i in (0..=t).rev() {
            if seen == index {
                return GaussRat::new(rational(i), rational(t - i));
            }
            seen += 1;
        }
    }
    unreachable!()
}

/// Half-open rational intervals `[a, a + w)`, each exactly once: diagonal
/// over (rational position, positive rational width). Index 0 is `[0, 1)`
/// and index 1 is `[0, 1/2)`.
pub fn interval(index: usize) -> (Rat, Rat) {
    let mut seen = 0usize;
    for t in 0usize.. {
        for i in 0..=t {
            if seen == index {
                let a = rational(i);
                let w = positive_rationals().nth(t - i).unwrap();
                return (a.clone(), a + w);
            }
            seen += 1;
        }
    }
    unreachable!()
}
