//! Witness candidates built from quotient solutions.

use std::collections::HashSet;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::freegroup::{Letter, Word};
use crate::hall::{HallBasis, NilpotentElement, Shape};

/// Longest word length [`brute_candidates`] will enumerate.
pub const BRUTE_LENGTH_CAP: usize = 8;
/// Largest commutator power inserted by [`candidates_level2`].
pub const MAX_FORM_EXPONENT: i64 = 64;

/// Distinct arrangements of the multiset holding `|z_i|` copies of
/// `g_i^{sign z_i}`, in lexicographic order of letters, at most `limit` of them.
pub fn candidates_from_abelian(z: &[i64], rank: usize, limit: usize) -> Result<Vec<Word>> {
    if z.len() != rank {
        return Err(Error::RankMismatch {
            expected: rank,
            found: z.len(),
        });
    }
    let mut letters: Vec<Letter> = Vec::new();
    for (g, &e) in z.iter().enumerate() {
        for _ in 0..e.unsigned_abs() {
            letters.push(Letter::new(g as u32, e < 0));
        }
    }
    letters.sort();
    let mut out = Vec::new();
    loop {
        if out.len() >= limit {
            break;
        }
        out.push(Word::reduce(rank, letters.iter().copied())?);
        if !next_permutation(&mut letters) {
            break;
        }
    }
    Ok(out)
}

fn next_permutation<T: Ord>(v: &mut [T]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// The four words `[x^s, y^t]^{u|e|}` whose class-2 image is `[x, y]^e`,
/// in the order `(s, t) = (+,+), (-,-), (-,+), (+,-)`.
pub fn commutator_forms(x: &Word, y: &Word, e: i64) -> Vec<Word> {
    let sign = e.signum();
    [(1, 1), (-1, -1), (-1, 1), (1, -1)]
        .iter()
        .map(|&(s, t)| {
            let c = Word::commutator(&x.pow(s), &y.pow(t)).expect("same rank");
            c.pow(sign * s * t * e.abs())
        })
        .collect()
}

/// For each previous candidate, inserts the weight-2 commutator powers it
/// lacks relative to `target` (the weight-2 exponents of the class-2
/// solution) at every letter boundary, from the end to the start, in each
/// of the four sign forms. Results are deduplicated in first-seen order.
/// Previous candidates needing a power beyond [`MAX_FORM_EXPONENT`] are skipped.
pub fn candidates_level2(
    prev: &[Word],
    target: &[BigInt],
    basis: &Arc<HallBasis>,
    limit: usize,
) -> Result<Vec<Word>> {
    if basis.class() < 2 {
        return Err(Error::InvalidArgument("level-2 candidates need a class-2 basis".into()));
    }
    let range = basis.weight_range(2);
    if target.len() != range.len() {
        return Err(Error::Dimension(format!(
            "expected {} weight-2 exponents, got {}",
            range.len(),
            target.len()
        )));
    }
    let class2 = HallBasis::new(basis.rank(), 2)?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    'outer: for w in prev {
        let own = NilpotentElement::collect(w, &class2)?;
        let mut current = vec![w.clone()];
        for (off, t) in target.iter().enumerate() {
            let deficit = t - &own.weight_part(2)[off];
            if deficit.is_zero() {
                continue;
            }
            // such long insertions are left to later levels
            let Some(e) = deficit.to_i64().filter(|e| e.abs() <= MAX_FORM_EXPONENT) else {
                continue 'outer;
            };
            let Shape::Bracket { left, right } = class2.commutator(range.start + off).shape else {
                unreachable!("weight-2 entries are brackets");
            };
            let forms = commutator_forms(&class2.expand(left), &class2.expand(right), e);
            let mut next = Vec::new();
            'fill: for base in &current {
                for pos in (0..=base.len()).rev() {
                    for f in &forms {
                        if next.len() >= limit {
                            break 'fill;
                        }
                        next.push(base.insert_at(pos, f)?);
                    }
                }
            }
            current = next;
        }
        for c in current {
            if seen.insert(c.clone()) {
                out.push(c);
                if out.len() >= limit {
                    break 'outer;
                }
            }
        }
    }
    Ok(out)
}

/// All reduced words of length at most `max_len` in shortlex order.
pub fn brute_candidates(rank: usize, max_len: usize) -> Result<Vec<Word>> {
    brute_candidates_between(rank, 0, max_len)
}

/// Reduced words with `min_len ≤ length ≤ max_len`, shortlex order.
pub fn brute_candidates_between(rank: usize, min_len: usize, max_len: usize) -> Result<Vec<Word>> {
    if max_len > BRUTE_LENGTH_CAP {
        return Err(Error::Complexity {
            requested: max_len as u32,
            cap: BRUTE_LENGTH_CAP as u32,
        });
    }
    let alphabet: Vec<Letter> = (0..rank as u32)
        .flat_map(|g| [Letter::new(g, false), Letter::new(g, true)])
        .collect();
    let mut out = Vec::new();
    let mut layer: Vec<Vec<Letter>> = vec![Vec::new()];
    for len in 0..=max_len {
        if len >= min_len {
            for l in &layer {
                out.push(Word::reduce(rank, l.iter().copied())?);
            }
        }
        if len == max_len {
            break;
        }
        let mut next = Vec::with_capacity(layer.len() * alphabet.len());
        for l in &layer {
            for &a in &alphabet {
                if l.last().is_some_and(|&p| p == a.inv()) {
                    continue;
                }
                let mut n = l.clone();
                n.push(a);
                next.push(n);
            }
        }
        layer = next;
    }
    Ok(out)
}

/// Number of reduced words of length at most `max_len`.
pub fn brute_count(rank: usize, max_len: usize) -> BigInt {
    let mut total = BigInt::from(1);
    let mut layer = BigInt::from(2 * rank);
    for _ in 1..=max_len {
        total += &layer;
        layer *= 2 * rank - 1;
    }
    total
}
