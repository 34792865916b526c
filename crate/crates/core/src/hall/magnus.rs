//! Truncated Magnus embedding `a ↦ 1 + X_a` into noncommuting power series.
//!
//! The embedding is faithful on the class-`n` free nilpotent quotient when
//! truncated above degree `n`, so peeling basic commutators off a series
//! recovers Hall normal forms. The collector uses it once per pair of basis
//! entries to obtain its structure constants.

use num_bigint::BigInt;

use super::basis::HallBasis;
use crate::freegroup::Word;

/// Homogeneous components `deg[d]` indexed by monomials read as base-`k` numbers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Series {
    k: usize,
    n: usize,
    deg: Vec<Vec<i128>>,
}

impl Series {
    pub fn one(k: usize, n: usize) -> Self {
        let mut deg: Vec<Vec<i128>> = (0..=n).map(|d| vec![0; k.pow(d as u32)]).collect();
        deg[0][0] = 1;
        Series { k, n, deg }
    }

    pub fn component(&self, d: usize) -> &[i128] {
        &self.deg[d]
    }

    pub fn is_one(&self) -> bool {
        self.deg[0][0] == 1 && self.deg[1..].iter().all(|c| c.iter().all(|&x| x == 0))
    }

    /// Right multiplication by a single letter, in place.
    pub fn mul_letter(&mut self, generator: usize, inverse: bool) {
        let k = self.k;
        if !inverse {
            // S·(1 + X)
            for d in (1..=self.n).rev() {
                let (lo, hi) = self.deg.split_at_mut(d);
                let src = &lo[d - 1];
                let dst = &mut hi[0];
                for (i, &c) in src.iter().enumerate() {
                    if c != 0 {
                        dst[i * k + generator] = dst[i * k + generator].checked_add(c).expect("series overflow");
                    }
                }
            }
        } else {
            // S·(1 - X + X^2 - ...), via T_d = S_d - T_{d-1}·X
            for d in 1..=self.n {
                let (lo, hi) = self.deg.split_at_mut(d);
                let src = &lo[d - 1];
                let dst = &mut hi[0];
                for (i, &c) in src.iter().enumerate() {
                    if c != 0 {
                        dst[i * k + generator] = dst[i * k + generator].checked_sub(c).expect("series overflow");
                    }
                }
            }
        }
    }

    pub fn of_word(k: usize, n: usize, w: &Word) -> Self {
        let mut s = Series::one(k, n);
        for l in w.letters() {
            s.mul_letter(l.generator as usize, l.inverse);
        }
        s
    }

    pub fn mul(&self, other: &Series) -> Series {
        let k = self.k;
        let mut out = Series {
            k,
            n: self.n,
            deg: (0..=self.n).map(|d| vec![0; k.pow(d as u32)]).collect(),
        };
        for d1 in 0..=self.n {
            for (i1, &a) in self.deg[d1].iter().enumerate() {
                if a == 0 {
                    continue;
                }
                for d2 in 0..=(self.n - d1) {
                    let stride = k.pow(d2 as u32);
                    let dst = &mut out.deg[d1 + d2];
                    for (i2, &b) in other.deg[d2].iter().enumerate() {
                        if b != 0 {
                            let p = a.checked_mul(b).expect("series overflow");
                            let slot = &mut dst[i1 * stride + i2];
                            *slot = slot.checked_add(p).expect("series overflow");
                        }
                    }
                }
            }
        }
        out
    }

    pub fn pow(&self, inverse_of_self: &Series, e: i64) -> Series {
        let base = if e < 0 { inverse_of_self } else { self };
        let mut acc = Series::one(self.k, self.n);
        let mut sq = base.clone();
        let mut m = e.unsigned_abs();
        while m > 0 {
            if m & 1 == 1 {
                acc = acc.mul(&sq);
            }
            m >>= 1;
            if m > 0 {
                sq = sq.mul(&sq);
            }
        }
        acc
    }
}

/// Per-basis data for peeling: series of each basic commutator and its inverse,
/// and for each weight an extraction of Lie coordinates.
pub(crate) struct MagnusData {
    series: Vec<Series>,
    inverses: Vec<Series>,
    extractors: Vec<LieExtractor>,
}

/// Solves `v = Σ e_c P_c` for the weight-`w` leading polynomials `P_c`.
///
/// The `P_c` are brought to column echelon form by unimodular integer column
/// operations: each reduced column `Q_p = Σ t_{cp} P_c` has a pivot monomial
/// where every later column vanishes. Coordinates of `v` against the `Q_p`
/// come out by substitution, then map back through `t`.
struct LieExtractor {
    pivots: Vec<Pivot>,
    columns: usize,
}

struct Pivot {
    row: usize,
    value: i128,
    /// Nonzero entries of `Q_p` by monomial.
    reduced: Vec<(usize, i128)>,
    /// Nonzero entries of the transform column.
    transform: Vec<(usize, i128)>,
}

impl MagnusData {
    pub fn build(basis: &HallBasis) -> Self {
        let k = basis.rank();
        let n = basis.class() as usize;
        let mut series = Vec::with_capacity(basis.len());
        let mut inverses = Vec::with_capacity(basis.len());
        for i in 0..basis.len() {
            let w = basis.expand(i);
            series.push(Series::of_word(k, n, &w));
            inverses.push(Series::of_word(k, n, &w.invert()));
        }
        let extractors = (1..=basis.class())
            .map(|w| LieExtractor::build(basis, &series, w))
            .collect();
        MagnusData {
            series,
            inverses,
            extractors,
        }
    }

    /// Hall normal form exponents of a unipotent series.
    pub fn peel(&self, basis: &HallBasis, mut s: Series) -> Vec<BigInt> {
        let mut exps = vec![BigInt::from(0); basis.len()];
        for w in 1..=basis.class() {
            let range = basis.weight_range(w);
            let coords = self.extractors[(w - 1) as usize].solve(s.component(w as usize));
            let mut strip = Series::one(s.k, s.n);
            for (off, &e) in coords.iter().enumerate().rev() {
                if e == 0 {
                    continue;
                }
                let i = range.start + off;
                exps[i] = BigInt::from(e);
                let e64 = i64::try_from(e).expect("exponent fits i64");
                strip = strip.mul(&self.series[i].pow(&self.inverses[i], -e64));
            }
            if !strip.is_one() {
                s = strip.mul(&s);
            }
            debug_assert!(s.component(w as usize).iter().all(|&x| x == 0));
        }
        debug_assert!(s.is_one());
        exps
    }

    pub fn series(&self, i: usize) -> &Series {
        &self.series[i]
    }

    pub fn inverse(&self, i: usize) -> &Series {
        &self.inverses[i]
    }
}

impl LieExtractor {
    fn build(basis: &HallBasis, series: &[Series], w: u32) -> Self {
        let range = basis.weight_range(w);
        let m = range.len();
        let mut cols: Vec<Vec<i128>> = range.clone().map(|c| series[c].component(w as usize).to_vec()).collect();
        let rows = cols.first().map_or(0, Vec::len);
        let mut trans: Vec<Vec<i128>> = (0..m)
            .map(|c| {
                let mut t = vec![0; m];
                t[c] = 1;
                t
            })
            .collect();
        let mut active: Vec<usize> = (0..m).collect();
        let mut pivots = Vec::with_capacity(m);
        for r in (0..rows).rev() {
            if active.is_empty() {
                break;
            }
            loop {
                let live: Vec<usize> = active.iter().copied().filter(|&c| cols[c][r] != 0).collect();
                let Some(&p) = live.iter().min_by_key(|&&c| cols[c][r].unsigned_abs()) else {
                    break;
                };
                if live.len() == 1 {
                    active.retain(|&c| c != p);
                    pivots.push(Pivot {
                        row: r,
                        value: cols[p][r],
                        reduced: sparse(&cols[p]),
                        transform: sparse(&trans[p]),
                    });
                    break;
                }
                for &q in &live {
                    if q == p {
                        continue;
                    }
                    let t = cols[q][r].div_euclid(cols[p][r]);
                    if t == 0 {
                        continue;
                    }
                    let (src, dst) = pair_mut(&mut cols, p, q);
                    axpy(dst, src, t);
                    let (src, dst) = pair_mut(&mut trans, p, q);
                    axpy(dst, src, t);
                }
            }
        }
        assert!(active.is_empty(), "leading polynomials are linearly dependent");
        LieExtractor { pivots, columns: m }
    }

    fn solve(&self, v: &[i128]) -> Vec<i128> {
        let mut v = v.to_vec();
        let mut x = vec![0i128; self.columns];
        for p in &self.pivots {
            let y = v[p.row] / p.value;
            debug_assert!(v[p.row] % p.value == 0, "non-integral Lie coordinate");
            if y == 0 {
                continue;
            }
            for &(r, q) in &p.reduced {
                v[r] -= y * q;
            }
            for &(c, t) in &p.transform {
                x[c] += y * t;
            }
        }
        x
    }
}

fn sparse(v: &[i128]) -> Vec<(usize, i128)> {
    v.iter().enumerate().filter(|(_, &x)| x != 0).map(|(i, &x)| (i, x)).collect()
}

/// `dst -= t * src`
fn axpy(dst: &mut [i128], src: &[i128], t: i128) {
    for (d, &s) in dst.iter_mut().zip(src) {
        if s != 0 {
            *d = d.checked_sub(t.checked_mul(s).expect("overflow")).expect("overflow");
        }
    }
}

fn pair_mut<T>(v: &mut [T], a: usize, b: usize) -> (&T, &mut T) {
    assert_ne!(a, b);
    if a < b {
        let (lo, hi) = v.split_at_mut(b);
        (&lo[a], &mut hi[0])
    } else {
        let (lo, hi) = v.split_at_mut(a);
        (&hi[0], &mut lo[b])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn letter_and_inverse_cancel() {
        let mut s = Series::one(2, 4);
        s.mul_letter(0, false);
        s.mul_letter(1, true);
        s.mul_letter(1, false);
        s.mul_letter(0, true);
        assert!(s.is_one());
    }

    #[test]
    fn commutator_leading_term() {
        let w = Word::parse(2, "[a,b]").unwrap();
        let s = Series::of_word(2, 3, &w);
        assert!(s.component(1).iter().all(|&x| x == 0));
        // XY - YX with X=0, Y=1: ab -> index 1, ba -> index 2
        assert_eq!(s.component(2), &[0, 1, -1, 0]);
    }

    #[test]
    fn extractors_build_for_moderate_ranks() {
        for k in 1..=4 {
            let b = HallBasis::new(k, 5).unwrap();
            let _ = MagnusData::build(&b);
        }
    }
}
