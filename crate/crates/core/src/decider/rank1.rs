//! Doubly twisted conjugacy when one of the groups is cyclic.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use super::{check_candidate_doubly, Decision, LevelRecord, UndecidedReason, Verdict};
use crate::error::{Error, Result};
use crate::freegroup::{Endomorphism, Word};
use crate::intlinalg::{solve_linear, IntegerMatrix, SolutionSet};

fn check_pair(f: &Endomorphism, p: &Endomorphism, h: &Word, k: &Word) -> Result<()> {
    if f.domain_rank() != p.domain_rank() || f.codomain_rank() != p.codomain_rank() {
        return Err(Error::RankMismatch {
            expected: f.domain_rank(),
            found: p.domain_rank(),
        });
    }
    for w in [h, k] {
        if w.rank() != f.codomain_rank() {
            return Err(Error::RankMismatch {
                expected: f.codomain_rank(),
                found: w.rank(),
            });
        }
    }
    Ok(())
}

/// Domain `⟨a⟩`: looks for `n` with `h = φ(a)^n k ψ(a)^-n`.
///
/// The abelianized equation `(φ̄(a) - ψ̄(a)) n = h̄ - k̄` either refutes every
/// `n`, pins down a single `n` (which is then checked exactly), or leaves all
/// `n` open, in which case `|n| ≤ cap` is searched.
pub fn decide_rank1_domain(f: &Endomorphism, p: &Endomorphism, h: &Word, k: &Word, cap: u32) -> Result<Decision> {
    if f.domain_rank() != 1 {
        return Err(Error::InvalidArgument(format!(
            "rank-one domain procedure needs domain rank 1, got {}",
            f.domain_rank()
        )));
    }
    check_pair(f, p, h, k)?;
    let (fa, pa) = (f.image(0), p.image(0));
    let check = |n: i64| -> Result<Option<Word>> {
        let z = Word::generator(1, 0)?.pow(n);
        Ok(check_candidate_doubly(f, p, h, k, &z)?.then_some(z))
    };
    let col: Vec<i64> = fa.abelianize().iter().zip(pa.abelianize()).map(|(x, y)| x - y).collect();
    let rhs: Vec<BigInt> = h
        .abelianize()
        .iter()
        .zip(k.abelianize())
        .map(|(x, y)| BigInt::from(x - y))
        .collect();
    let a = IntegerMatrix::from_fn(col.len(), 1, |i, _| BigInt::from(col[i]));
    let sol = solve_linear(&a, &rhs)?;
    let level = |sol: SolutionSet| {
        vec![LevelRecord {
            level: 1,
            solution: sol,
            candidates_tested: 0,
        }]
    };
    match &sol {
        SolutionSet::NoSolution => Ok(Decision::new(Verdict::Distinct { level: 1 }, 1, level(sol))),
        SolutionSet::Unique { x } => {
            let n = x[0].to_i64().ok_or_else(|| Error::InvalidArgument("exponent too large".into()))?;
            match check(n)? {
                Some(witness) => Ok(Decision::new(Verdict::Conjugate { witness }, 1, level(sol))),
                // the only admissible exponent fails, so no exponent works
                None => Ok(Decision::new(Verdict::Distinct { level: 1 }, 1, level(sol))),
            }
        }
        SolutionSet::Infinite { .. } => {
            for m in 0..=cap as i64 {
                for n in if m == 0 { vec![0] } else { vec![m, -m] } {
                    if let Some(witness) = check(n)? {
                        return Ok(Decision::new(Verdict::Conjugate { witness }, 1, level(sol)));
                    }
                }
            }
            Ok(Decision::new(
                Verdict::Undecided(UndecidedReason::DepthExceeded { cap }),
                1,
                level(sol),
            ))
        }
    }
}

/// Codomain `⟨x⟩`: the equation lives in an abelian group, so the single
/// linear equation `Σ (φ̄(a_i) - ψ̄(a_i)) m_i = h̄ - k̄` decides it. Any solution
/// gives the witness `a_1^{m_1} ... a_q^{m_q}`.
pub fn decide_rank1_codomain(f: &Endomorphism, p: &Endomorphism, h: &Word, k: &Word) -> Result<Decision> {
    if f.codomain_rank() != 1 {
        return Err(Error::InvalidArgument(format!(
            "rank-one codomain procedure needs codomain rank 1, got {}",
            f.codomain_rank()
        )));
    }
    check_pair(f, p, h, k)?;
    let q = f.domain_rank();
    if h == k {
        return Ok(Decision::new(
            Verdict::Conjugate {
                witness: Word::identity(q),
            },
            1,
            Vec::new(),
        ));
    }
    let coeffs: Vec<i64> = (0..q)
        .map(|i| f.image(i).abelianize()[0] - p.image(i).abelianize()[0])
        .collect();
    let r = h.abelianize()[0] - k.abelianize()[0];
    let a = IntegerMatrix::from_fn(1, q, |_, j| BigInt::from(coeffs[j]));
    let sol = solve_linear(&a, &[BigInt::from(r)])?;
    let record = |sol: SolutionSet| {
        vec![LevelRecord {
            level: 1,
            solution: sol,
            candidates_tested: 1,
        }]
    };
    let m: Vec<i64> = match &sol {
        SolutionSet::NoSolution => return Ok(Decision::new(Verdict::Distinct { level: 1 }, 1, record(sol))),
        SolutionSet::Unique { x } | SolutionSet::Infinite { particular: x, .. } => {
            // prefer a single-generator solution when one exists
            match coeffs.iter().position(|&c| c != 0 && r.is_multiple_of(&c)) {
                Some(i) => (0..q).map(|j| if j == i { r / coeffs[i] } else { 0 }).collect(),
                None => x
                    .iter()
                    .map(|v| v.to_i64().ok_or_else(|| Error::InvalidArgument("exponent too large".into())))
                    .collect::<Result<_>>()?,
            }
        }
    };
    debug_assert!(coeffs.iter().zip(&m).map(|(c, v)| c * v).sum::<i64>() == r);
    let syllables: Vec<(usize, i64)> = m.iter().enumerate().filter(|(_, e)| !e.is_zero()).map(|(i, &e)| (i, e)).collect();
    let witness = Word::from_syllables(q, &syllables)?;
    if !check_candidate_doubly(f, p, h, k, &witness)? {
        return Err(Error::InvalidArgument("abelian witness failed to verify".into()));
    }
    Ok(Decision::new(Verdict::Conjugate { witness }, 1, record(sol)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_examples() {
        let f = Endomorphism::parse(1, 1, "a=a^2").unwrap();
        let p = Endomorphism::parse(1, 1, "a=a").unwrap();
        let x = Word::parse(1, "a").unwrap();
        let one = Word::identity(1);
        let d = decide_rank1_domain(&f, &p, &x, &one, 10).unwrap();
        assert_eq!(d.verdict, Verdict::Conjugate { witness: x.clone() });
        let d = decide_rank1_domain(&f, &p, &x, &x, 10).unwrap();
        assert_eq!(d.verdict, Verdict::Conjugate { witness: one.clone() });
        let d = decide_rank1_domain(&p, &p, &Word::parse(1, "a^2").unwrap(), &one, 10).unwrap();
        assert_eq!(d.verdict, Verdict::Distinct { level: 1 });
        assert!(decide_rank1_domain(&Endomorphism::identity(2), &Endomorphism::identity(2), &x, &x, 3).is_err());
    }

    #[test]
    fn domain_search_into_rank_two() {
        // φ(a) = ab, ψ(a) = ba: abelian parts agree, so the search decides
        let f = Endomorphism::parse(1, 2, "a=ab").unwrap();
        let p = Endomorphism::parse(1, 2, "a=ba").unwrap();
        let h = Word::parse(2, "ab^2a^-1b^-1").unwrap();
        let k = Word::parse(2, "b").unwrap();
        let d = decide_rank1_domain(&f, &p, &h, &k, 5).unwrap();
        assert_eq!(d.verdict, Verdict::Conjugate { witness: Word::parse(1, "a").unwrap() });
        let d = decide_rank1_domain(&f, &p, &Word::parse(2, "b").unwrap(), &Word::parse(2, "b").unwrap(), 5).unwrap();
        assert!(d.verdict.is_decided());
    }

    #[test]
    fn codomain_examples() {
        let f = Endomorphism::parse(2, 1, "a=a, b=a^2").unwrap();
        let p = Endomorphism::parse(2, 1, "a=a, b=a").unwrap();
        let d = decide_rank1_codomain(&f, &p, &Word::parse(1, "a^3").unwrap(), &Word::identity(1)).unwrap();
        assert_eq!(d.verdict, Verdict::Conjugate { witness: Word::parse(2, "b^3").unwrap() });
        let x = Word::parse(1, "a").unwrap();
        let d = decide_rank1_codomain(&f, &p, &x, &x).unwrap();
        assert_eq!(d.verdict, Verdict::Conjugate { witness: Word::identity(2) });
        let d = decide_rank1_codomain(&p, &p, &x, &Word::identity(1)).unwrap();
        assert_eq!(d.verdict, Verdict::Distinct { level: 1 });
    }
}
