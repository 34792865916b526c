//! Hall normal forms and the collector.
//!
//! A normal form is a dense exponent vector over a [`HallBasis`]. Right
//! multiplication by `c_i^e` keeps the prefix `c_1^{e_1}..c_i^{e_i}` and
//! replaces the tail `t` (entries after `i`) by `c_i^{-e} t c_i^{e}`; the
//! subgroup generated by the entries after `i` is normal, so the result is
//! again a normal form. Conjugates of single entries are cached on the basis.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::basis::HallBasis;
use super::magnus::{MagnusData, Series};
use crate::error::{Error, Result};
use crate::freegroup::Word;

#[derive(Clone)]
pub struct NilpotentElement {
    basis: Arc<HallBasis>,
    exponents: Vec<BigInt>,
}

impl PartialEq for NilpotentElement {
    fn eq(&self, other: &Self) -> bool {
        *self.basis == *other.basis && self.exponents == other.exponents
    }
}

impl Eq for NilpotentElement {}

impl fmt::Debug for NilpotentElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NilpotentElement({self})")
    }
}

impl NilpotentElement {
    pub fn identity(basis: &Arc<HallBasis>) -> Self {
        NilpotentElement {
            basis: basis.clone(),
            exponents: vec![BigInt::zero(); basis.len()],
        }
    }

    /// The basis entry `c_i` itself.
    pub fn unit(basis: &Arc<HallBasis>, i: usize) -> Self {
        let mut x = Self::identity(basis);
        x.exponents[i] = BigInt::one();
        x
    }

    pub fn from_exponents(basis: &Arc<HallBasis>, exponents: Vec<BigInt>) -> Result<Self> {
        if exponents.len() != basis.len() {
            return Err(Error::Dimension(format!(
                "expected {} exponents, got {}",
                basis.len(),
                exponents.len()
            )));
        }
        Ok(NilpotentElement {
            basis: basis.clone(),
            exponents,
        })
    }

    /// Image of a word in the quotient, in Hall normal form.
    pub fn collect(w: &Word, basis: &Arc<HallBasis>) -> Result<Self> {
        if w.rank() != basis.rank() {
            return Err(Error::RankMismatch {
                expected: basis.rank(),
                found: w.rank(),
            });
        }
        let mut v = vec![BigInt::zero(); basis.len()];
        let one = BigInt::one();
        let minus = -BigInt::one();
        for l in w.letters() {
            mul_entry_pow(basis, &mut v, l.generator as usize, if l.inverse { &minus } else { &one });
        }
        Ok(NilpotentElement {
            basis: basis.clone(),
            exponents: v,
        })
    }

    pub fn basis(&self) -> &Arc<HallBasis> {
        &self.basis
    }

    pub fn exponents(&self) -> &[BigInt] {
        &self.exponents
    }

    pub fn into_exponents(self) -> Vec<BigInt> {
        self.exponents
    }

    /// Exponents on the weight-`w` entries.
    pub fn weight_part(&self, w: u32) -> &[BigInt] {
        &self.exponents[self.basis.weight_range(w)]
    }

    pub fn is_identity(&self) -> bool {
        self.exponents.iter().all(Zero::is_zero)
    }

    fn check_basis(&self, other: &Self) -> Result<()> {
        if *self.basis != *other.basis {
            return Err(Error::BasisMismatch);
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_basis(other)?;
        let mut v = self.exponents.clone();
        mul_vec(&self.basis, &mut v, &other.exponents);
        Ok(NilpotentElement {
            basis: self.basis.clone(),
            exponents: v,
        })
    }

    pub fn inv(&self) -> Self {
        NilpotentElement {
            basis: self.basis.clone(),
            exponents: inv_vec(&self.basis, &self.exponents),
        }
    }

    pub fn pow(&self, e: &BigInt) -> Self {
        NilpotentElement {
            basis: self.basis.clone(),
            exponents: pow_vec(&self.basis, &self.exponents, e),
        }
    }

    /// `x y x^-1 y^-1`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.mul(&self.inv())?.mul(&other.inv())
    }

    /// Image in a quotient of smaller class on the same generators: the
    /// smaller basis is a prefix of this one.
    pub fn project(&self, target: &Arc<HallBasis>) -> Result<Self> {
        if target.rank() != self.basis.rank() || target.class() > self.basis.class() {
            return Err(Error::BasisMismatch);
        }
        Ok(NilpotentElement {
            basis: target.clone(),
            exponents: self.exponents[..target.len()].to_vec(),
        })
    }

    /// The same normal form read in a basis of larger class (new exponents zero).
    pub fn lift(&self, target: &Arc<HallBasis>) -> Result<Self> {
        if target.rank() != self.basis.rank() || target.class() < self.basis.class() {
            return Err(Error::BasisMismatch);
        }
        let mut exponents = self.exponents.clone();
        exponents.resize(target.len(), BigInt::zero());
        Ok(NilpotentElement {
            basis: target.clone(),
            exponents,
        })
    }

    /// A word with this image: the normal form with every entry expanded.
    pub fn to_word(&self) -> Word {
        let mut w = Word::identity(self.basis.rank());
        for (i, e) in self.exponents.iter().enumerate() {
            if let Some(e) = e.to_i64().filter(|e| *e != 0) {
                w = w.multiply(&self.basis.expand(i).pow(e)).expect("same rank");
            }
        }
        w
    }
}

impl fmt::Display for NilpotentElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, e) in self.exponents.iter().enumerate() {
            if e.is_zero() {
                continue;
            }
            if !first {
                write!(f, " * ")?;
            }
            first = false;
            write!(f, "{}", self.basis.name(i))?;
            if !e.is_one() {
                write!(f, "^{e}")?;
            }
        }
        if first {
            write!(f, "1")?;
        }
        Ok(())
    }
}

fn magnus(basis: &HallBasis) -> &MagnusData {
    basis.magnus.get_or_init(|| MagnusData::build(basis))
}

/// Normal form of `c_i^{-1} c_j c_i` (or `c_i c_j c_i^{-1}` when `inverse`), `i < j`.
fn conjugate(basis: &HallBasis, i: usize, j: usize, inverse: bool) -> Arc<Vec<BigInt>> {
    if let Some(v) = basis.conjugates.read().expect("cache poisoned").get(&(i, j, inverse)) {
        return v.clone();
    }
    let m = magnus(basis);
    let (left, right): (&Series, &Series) = if inverse {
        (m.series(i), m.inverse(i))
    } else {
        (m.inverse(i), m.series(i))
    };
    let s = left.mul(m.series(j)).mul(right);
    let v = Arc::new(m.peel(basis, s));
    basis
        .conjugates
        .write()
        .expect("cache poisoned")
        .entry((i, j, inverse))
        .or_insert(v)
        .clone()
}

/// `v ← v · c_i^e`.
fn mul_entry_pow(basis: &HallBasis, v: &mut [BigInt], i: usize, e: &BigInt) {
    if e.is_zero() {
        return;
    }
    let class = basis.class();
    let wi = basis.weight(i);
    let interacts = v
        .iter()
        .enumerate()
        .skip(i + 1)
        .any(|(m, x)| !x.is_zero() && wi + basis.weight(m) <= class);
    if !interacts {
        v[i] += e;
        return;
    }
    let mut tail = vec![BigInt::zero(); v.len()];
    for m in i + 1..v.len() {
        std::mem::swap(&mut tail[m], &mut v[m]);
    }
    v[i] += e;
    let tail = conjugate_pow(basis, &tail, i, e);
    for (m, x) in tail.into_iter().enumerate().skip(i + 1) {
        v[m] = x;
    }
}

/// `v ← v · y` for normal forms.
fn mul_vec(basis: &HallBasis, v: &mut [BigInt], y: &[BigInt]) {
    for (j, e) in y.iter().enumerate() {
        mul_entry_pow(basis, v, j, e);
    }
}

fn inv_vec(basis: &HallBasis, x: &[BigInt]) -> Vec<BigInt> {
    let mut v = vec![BigInt::zero(); x.len()];
    for (i, e) in x.iter().enumerate().rev() {
        if !e.is_zero() {
            mul_entry_pow(basis, &mut v, i, &-e);
        }
    }
    v
}

/// `c_i^{-s} t c_i^{s}` for `s = ±1`, where `t` lives on entries after `i`.
fn conjugate_once(basis: &HallBasis, t: &[BigInt], i: usize, inverse: bool) -> Vec<BigInt> {
    let class = basis.class();
    let wi = basis.weight(i);
    let mut out = vec![BigInt::zero(); t.len()];
    for (m, e) in t.iter().enumerate().skip(i + 1) {
        if e.is_zero() {
            continue;
        }
        if wi + basis.weight(m) > class {
            mul_entry_pow(basis, &mut out, m, e);
        } else {
            let image = conjugate(basis, i, m, inverse);
            let p = pow_vec(basis, &image, e);
            mul_vec(basis, &mut out, &p);
        }
    }
    out
}

fn conjugate_pow(basis: &HallBasis, t: &[BigInt], i: usize, e: &BigInt) -> Vec<BigInt> {
    let class = basis.class() as usize;
    let inverse = e.is_negative();
    if let Some(small) = e.abs().to_usize().filter(|&m| m <= class + 1) {
        let mut cur = t.to_vec();
        for _ in 0..small {
            cur = conjugate_once(basis, &cur, i, inverse);
        }
        return cur;
    }
    let mut samples = Vec::with_capacity(class + 1);
    samples.push(t.to_vec());
    for p in 1..=class {
        let next = conjugate_once(basis, &samples[p - 1], i, false);
        samples.push(next);
    }
    interpolate(&samples, e)
}

fn pow_vec(basis: &HallBasis, x: &[BigInt], e: &BigInt) -> Vec<BigInt> {
    let class = basis.class() as usize;
    if let Some(j) = single_entry(x) {
        let mut v = vec![BigInt::zero(); x.len()];
        v[j] = &x[j] * e;
        return v;
    }
    if let Some(small) = e.abs().to_usize().filter(|&m| m <= class + 1) {
        let base = if e.is_negative() { inv_vec(basis, x) } else { x.to_vec() };
        let mut v = vec![BigInt::zero(); x.len()];
        for _ in 0..small {
            mul_vec(basis, &mut v, &base);
        }
        return v;
    }
    let mut samples = Vec::with_capacity(class + 1);
    samples.push(vec![BigInt::zero(); x.len()]);
    for p in 1..=class {
        let mut next = samples[p - 1].clone();
        mul_vec(basis, &mut next, x);
        samples.push(next);
    }
    interpolate(&samples, e)
}

fn single_entry(x: &[BigInt]) -> Option<usize> {
    let mut found = None;
    for (i, e) in x.iter().enumerate() {
        if !e.is_zero() {
            if found.is_some() {
                return None;
            }
            found = Some(i);
        }
    }
    found
}

/// Evaluates at `e` the coordinatewise polynomials through `samples[p]` at `p = 0..`.
fn interpolate(samples: &[Vec<BigInt>], e: &BigInt) -> Vec<BigInt> {
    let len = samples[0].len();
    let mut diffs: Vec<Vec<BigInt>> = samples.to_vec();
    // forward differences in place: diffs[d] becomes Δ^d f(0)
    for d in 1..diffs.len() {
        for p in (d..diffs.len()).rev() {
            let prev = diffs[p - 1].clone();
            for (a, b) in diffs[p].iter_mut().zip(prev) {
                *a -= b;
            }
        }
    }
    let mut out = vec![BigInt::zero(); len];
    for (d, diff) in diffs.iter().enumerate() {
        let c = binomial(e, d);
        if c.is_zero() {
            continue;
        }
        for (o, x) in out.iter_mut().zip(diff) {
            if !x.is_zero() {
                *o += &c * x;
            }
        }
    }
    out
}

/// `e (e-1) ... (e-d+1) / d!`, valid for negative `e`.
fn binomial(e: &BigInt, d: usize) -> BigInt {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for t in 0..d {
        num *= e - BigInt::from(t);
        den *= BigInt::from(t + 1);
    }
    let (q, r) = num.div_rem(&den);
    debug_assert!(r.is_zero());
    q
}
