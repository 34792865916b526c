//! Fox derivatives in the integral group ring of a free group, and the
//! Reidemeister trace `1 - Σ ∂φ(g_i)/∂g_i` before projection to classes.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::freegroup::{check_rank, Endomorphism, Word};

/// A finite integer combination of words. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupRingElement {
    rank: usize,
    terms: BTreeMap<Word, BigInt>,
}

impl GroupRingElement {
    pub fn zero(rank: usize) -> Self {
        GroupRingElement {
            rank,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_word(w: Word) -> Self {
        let rank = w.rank();
        let mut terms = BTreeMap::new();
        terms.insert(w, BigInt::one());
        GroupRingElement { rank, terms }
    }

    pub fn one(rank: usize) -> Self {
        Self::from_word(Word::identity(rank))
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in shortlex order of their words.
    pub fn terms(&self) -> impl Iterator<Item = (&Word, &BigInt)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, w: &Word) -> BigInt {
        self.terms.get(w).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, w: Word, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(w).or_default();
        *slot += c;
        if slot.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_rank(self.rank, other.rank)?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        GroupRingElement {
            rank: self.rank,
            terms: self.terms.iter().map(|(w, c)| (w.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        check_rank(self.rank, other.rank)?;
        let mut out = Self::zero(self.rank);
        for (u, a) in &self.terms {
            for (v, b) in &other.terms {
                out.add_term(u.multiply(v)?, a * b);
            }
        }
        Ok(out)
    }

    /// Left multiplication by a group element.
    pub fn left_mul_word(&self, w: &Word) -> Result<Self> {
        let mut out = Self::zero(self.rank);
        for (v, c) in &self.terms {
            out.add_term(w.multiply(v)?, c.clone());
        }
        Ok(out)
    }
}

impl fmt::Display for GroupRingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (w, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if w.is_identity() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{w}")?;
            } else {
                write!(f, "{mag}*{w}")?;
            }
        }
        Ok(())
    }
}

/// `∂w/∂g_i` for the 0-based generator index `i`.
pub fn fox_derivative(w: &Word, i: usize) -> Result<GroupRingElement> {
    if i >= w.rank() {
        return Err(Error::GeneratorOutOfRange {
            index: i,
            rank: w.rank(),
        });
    }
    let mut out = GroupRingElement::zero(w.rank());
    for (t, l) in w.letters().iter().enumerate() {
        if l.generator as usize != i {
            continue;
        }
        if l.inverse {
            // prefix · g_i^-1 is the prefix of length t+1
            out.add_term(w.prefix(t + 1), -BigInt::one());
        } else {
            out.add_term(w.prefix(t), BigInt::one());
        }
    }
    Ok(out)
}

pub fn reidemeister_trace(f: &Endomorphism) -> Result<GroupRingElement> {
    if !f.is_endomorphism() {
        return Err(Error::NotEndomorphism {
            domain: f.domain_rank(),
            codomain: f.codomain_rank(),
        });
    }
    let k = f.domain_rank();
    let mut out = GroupRingElement::one(k);
    for i in 0..k {
        let d = fox_derivative(f.image(i), i)?;
        out = out.sub(&d)?;
    }
    Ok(out)
}
