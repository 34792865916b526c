//! Level-by-level decision of (doubly) twisted conjugacy.
//!
//! The question is whether `h = φ(z) k ψ(z)^-1` has a solution `z`; plain
//! twisted conjugacy is the case `ψ = id`, with `g` in place of `k`. At level
//! one the abelianized equation is linear. At each level `n ≥ 2` the unique
//! solution from below is lifted and only its weight-`n` exponents are new;
//! those entries are central, so the level-`n` equation is linear again.

pub mod candidates;
mod rank1;

use std::fmt;
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;

pub use candidates::{
    brute_candidates, brute_candidates_between, brute_count, candidates_from_abelian, candidates_level2,
    commutator_forms, BRUTE_LENGTH_CAP,
};
pub use rank1::{decide_rank1_codomain, decide_rank1_domain};

use crate::error::{Error, Result};
use crate::freegroup::{Endomorphism, Word};
use crate::hall::{HallBasis, InducedMap, NilpotentElement, HARD_CLASS_CAP};
use crate::intlinalg::{IntegerMatrix, LinearSystem, SolutionSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum UndecidedReason {
    /// The level's linear system has infinitely many solutions.
    MatrixFailure { level: u32 },
    /// Every level up to the cap was solvable and no candidate verified.
    DepthExceeded { cap: u32 },
    /// The configured deadline passed before `level` was settled.
    Timeout { level: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    Distinct {
        level: u32,
    },
    Conjugate {
        #[serde(serialize_with = "ser_word")]
        witness: Word,
    },
    Undecided(UndecidedReason),
}

impl UndecidedReason {
    pub fn name(&self) -> &'static str {
        match self {
            UndecidedReason::MatrixFailure { .. } => "matrix_failure",
            UndecidedReason::DepthExceeded { .. } => "depth_exceeded",
            UndecidedReason::Timeout { .. } => "timeout",
        }
    }

    /// The level involved, or the cap for [`UndecidedReason::DepthExceeded`].
    pub fn level(&self) -> Option<u32> {
        match *self {
            UndecidedReason::MatrixFailure { level } | UndecidedReason::Timeout { level } => Some(level),
            UndecidedReason::DepthExceeded { cap } => Some(cap),
        }
    }
}

pub(crate) fn ser_word<S: serde::Serializer>(w: &Word, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(w)
}

impl Verdict {
    pub fn is_decided(&self) -> bool {
        !matches!(self, Verdict::Undecided(_))
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Distinct { level } => write!(f, "DISTINCT level={level}"),
            Verdict::Conjugate { witness } => write!(f, "CONJUGATE witness={witness}"),
            Verdict::Undecided(UndecidedReason::MatrixFailure { level }) => {
                write!(f, "UNDECIDED matrix-failure level={level}")
            }
            Verdict::Undecided(UndecidedReason::DepthExceeded { cap }) => {
                write!(f, "UNDECIDED depth-exceeded cap={cap}")
            }
            Verdict::Undecided(UndecidedReason::Timeout { level }) => write!(f, "UNDECIDED timeout level={level}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeciderConfig {
    /// Highest nilpotency class examined.
    pub depth_cap: u32,
    /// Longest brute-force candidate; `None` means the current level.
    pub candidate_length_cap: Option<u32>,
    /// Build level-2 candidates by commutator insertion (otherwise brute force).
    pub level2_forms: bool,
    /// Truncation bound for each structured candidate list.
    pub max_candidates: usize,
    /// Search radius for the rank-one domain case.
    pub rank1_search: u32,
    #[serde(skip)]
    pub deadline: Option<Instant>,
}

impl Default for DeciderConfig {
    fn default() -> Self {
        DeciderConfig {
            depth_cap: 5,
            candidate_length_cap: None,
            level2_forms: true,
            max_candidates: 2000,
            rank1_search: 64,
            deadline: None,
        }
    }
}

impl DeciderConfig {
    pub fn with_depth_cap(depth_cap: u32) -> Self {
        DeciderConfig {
            depth_cap,
            ..Default::default()
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.depth_cap == 0 {
            return Err(Error::InvalidArgument("depth cap must be at least 1".into()));
        }
        if self.depth_cap > HARD_CLASS_CAP {
            return Err(Error::Complexity {
                requested: self.depth_cap,
                cap: HARD_CLASS_CAP,
            });
        }
        Ok(())
    }

    fn expired(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

/// What happened at one level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelRecord {
    pub level: u32,
    pub solution: SolutionSet,
    /// Candidate words checked after this level (each in both orientations).
    pub candidates_tested: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Decision {
    pub verdict: Verdict,
    /// Highest level whose system was solved (1 when settled before any system).
    pub depth: u32,
    pub levels: Vec<LevelRecord>,
}

impl Decision {
    fn new(verdict: Verdict, depth: u32, levels: Vec<LevelRecord>) -> Self {
        Decision { verdict, depth, levels }
    }
}

/// `apply(f, w) · g · w^-1 == h`.
pub fn check_candidate(f: &Endomorphism, g: &Word, h: &Word, w: &Word) -> Result<bool> {
    Ok(f.apply(w)?.multiply(g)?.multiply(&w.invert())? == *h)
}

/// `apply(f, w) · k · apply(p, w)^-1 == h`.
pub fn check_candidate_doubly(f: &Endomorphism, p: &Endomorphism, h: &Word, k: &Word, w: &Word) -> Result<bool> {
    Ok(f.apply(w)?.multiply(k)?.multiply(&p.apply(w)?.invert())? == *h)
}

struct LevelData {
    domain: Arc<HallBasis>,
    codomain: Arc<HallBasis>,
    f: InducedMap,
    p: InducedMap,
    /// `M_f - M_p` on the top weight.
    system: LinearSystem,
}

/// A pair of maps with per-level induced data cached across many decisions.
pub struct Decider {
    f: Endomorphism,
    p: Endomorphism,
    cfg: DeciderConfig,
    abelian: LinearSystem,
    levels: Vec<OnceLock<LevelData>>,
}

impl Decider {
    /// Twisted conjugacy for an endomorphism `f`.
    pub fn twisted(f: &Endomorphism, cfg: &DeciderConfig) -> Result<Self> {
        if !f.is_endomorphism() {
            return Err(Error::NotEndomorphism {
                domain: f.domain_rank(),
                codomain: f.codomain_rank(),
            });
        }
        Self::doubly(f, &Endomorphism::identity(f.domain_rank()), cfg)
    }

    pub fn doubly(f: &Endomorphism, p: &Endomorphism, cfg: &DeciderConfig) -> Result<Self> {
        cfg.validate()?;
        if f.domain_rank() != p.domain_rank() {
            return Err(Error::RankMismatch {
                expected: f.domain_rank(),
                found: p.domain_rank(),
            });
        }
        if f.codomain_rank() != p.codomain_rank() {
            return Err(Error::RankMismatch {
                expected: f.codomain_rank(),
                found: p.codomain_rank(),
            });
        }
        let (af, ap) = (f.abelian_matrix(), p.abelian_matrix());
        let abelian = LinearSystem::new(&IntegerMatrix::from_fn(f.codomain_rank(), f.domain_rank(), |i, j| {
            BigInt::from(af[i][j] - ap[i][j])
        }));
        Ok(Decider {
            f: f.clone(),
            p: p.clone(),
            cfg: cfg.clone(),
            abelian,
            levels: (0..=cfg.depth_cap).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn config(&self) -> &DeciderConfig {
        &self.cfg
    }

    fn level(&self, n: u32) -> Result<&LevelData> {
        let slot = &self.levels[n as usize];
        if let Some(d) = slot.get() {
            return Ok(d);
        }
        let domain = HallBasis::new(self.f.domain_rank(), n)?;
        let codomain = HallBasis::new(self.f.codomain_rank(), n)?;
        let f = InducedMap::new(&self.f, &domain, &codomain)?;
        let p = InducedMap::new(&self.p, &domain, &codomain)?;
        let (mf, mp) = (f.graded_matrix(n), p.graded_matrix(n));
        let system = LinearSystem::new(&IntegerMatrix::from_fn(mf.rows(), mf.cols(), |i, j| &mf[(i, j)] - &mp[(i, j)]));
        Ok(slot.get_or_init(|| LevelData {
            domain,
            codomain,
            f,
            p,
            system,
        }))
    }

    fn verifies(&self, h: &Word, k: &Word, w: &Word) -> Result<bool> {
        check_candidate_doubly(&self.f, &self.p, h, k, w)
    }

    /// First candidate `w` (tried as `w` then `w^-1`) that verifies.
    fn test(&self, h: &Word, k: &Word, cands: &[Word], tested: &mut usize) -> Result<Option<Word>> {
        for (i, w) in cands.iter().enumerate() {
            if i % 64 == 63 && self.cfg.expired() {
                return Ok(None);
            }
            *tested += 1;
            if self.verifies(h, k, w)? {
                return Ok(Some(w.clone()));
            }
            let inv = w.invert();
            if inv != *w && self.verifies(h, k, &inv)? {
                return Ok(Some(inv));
            }
        }
        Ok(None)
    }

    /// Decides whether `h = φ(z) k ψ(z)^-1` for some `z`.
    pub fn decide(&self, h: &Word, k: &Word) -> Result<Decision> {
        let cod = self.f.codomain_rank();
        for w in [h, k] {
            if w.rank() != cod {
                return Err(Error::RankMismatch {
                    expected: cod,
                    found: w.rank(),
                });
            }
        }
        let dom = self.f.domain_rank();
        if h == k {
            return Ok(Decision::new(
                Verdict::Conjugate {
                    witness: Word::identity(dom),
                },
                1,
                Vec::new(),
            ));
        }
        let mut levels = Vec::new();

        let rhs: Vec<BigInt> = h
            .abelianize()
            .iter()
            .zip(k.abelianize())
            .map(|(a, b)| BigInt::from(a - b))
            .collect();
        let sol = self.abelian.solve(&rhs)?;
        let zbar = match &sol {
            SolutionSet::NoSolution => {
                levels.push(record(1, sol, 0));
                return Ok(Decision::new(Verdict::Distinct { level: 1 }, 1, levels));
            }
            SolutionSet::Infinite { .. } => {
                levels.push(record(1, sol, 0));
                return Ok(Decision::new(
                    Verdict::Undecided(UndecidedReason::MatrixFailure { level: 1 }),
                    1,
                    levels,
                ));
            }
            SolutionSet::Unique { x } => x.clone(),
        };
        let small: Option<Vec<i64>> = zbar.iter().map(ToPrimitive::to_i64).collect();
        let first = match &small {
            Some(z) if z.iter().map(|e| e.unsigned_abs()).sum::<u64>() <= 4096 => {
                candidates_from_abelian(z, dom, self.cfg.max_candidates)?
            }
            _ => Vec::new(),
        };
        let mut tested = 0;
        let found = self.test(h, k, &first, &mut tested)?;
        levels.push(record(1, sol, tested));
        if let Some(witness) = found {
            return Ok(Decision::new(Verdict::Conjugate { witness }, 1, levels));
        }

        let mut z = NilpotentElement::from_exponents(&HallBasis::new(dom, 1)?, zbar)?;
        let mut brute_done = 0usize;
        for n in 2..=self.cfg.depth_cap {
            if self.cfg.expired() {
                return Ok(Decision::new(
                    Verdict::Undecided(UndecidedReason::Timeout { level: n }),
                    n - 1,
                    levels,
                ));
            }
            let data = self.level(n)?;
            let z0 = z.lift(&data.domain)?;
            let image = data
                .f
                .apply(&z0)?
                .mul(&NilpotentElement::collect(k, &data.codomain)?)?
                .mul(&data.p.apply(&z0)?.inv())?;
            let target = NilpotentElement::collect(h, &data.codomain)?;
            debug_assert!(
                (1..n).all(|w| target.weight_part(w) == image.weight_part(w)),
                "lower weights must already agree"
            );
            let d: Vec<BigInt> = target
                .weight_part(n)
                .iter()
                .zip(image.weight_part(n))
                .map(|(a, b)| a - b)
                .collect();
            let sol = data.system.solve(&d)?;
            let x = match &sol {
                SolutionSet::NoSolution => {
                    levels.push(record(n, sol, 0));
                    return Ok(Decision::new(Verdict::Distinct { level: n }, n, levels));
                }
                SolutionSet::Infinite { .. } => {
                    levels.push(record(n, sol, 0));
                    return Ok(Decision::new(
                        Verdict::Undecided(UndecidedReason::MatrixFailure { level: n }),
                        n,
                        levels,
                    ));
                }
                SolutionSet::Unique { x } => x.clone(),
            };
            let mut exps = z0.into_exponents();
            let range = data.domain.weight_range(n);
            for (slot, v) in exps[range].iter_mut().zip(x) {
                *slot = v;
            }
            z = NilpotentElement::from_exponents(&data.domain, exps)?;

            let cands = if n == 2 && self.cfg.level2_forms {
                candidates_level2(&first, z.weight_part(2), &data.domain, self.cfg.max_candidates)?
            } else {
                let cap = self.cfg.candidate_length_cap.unwrap_or(n).min(n) as usize;
                let cap = cap.min(BRUTE_LENGTH_CAP);
                let abel: Vec<BigInt> = z.weight_part(1).to_vec();
                let words = if cap > brute_done {
                    brute_candidates_between(dom, brute_done + 1, cap)?
                } else {
                    Vec::new()
                };
                brute_done = brute_done.max(cap);
                words
                    .into_iter()
                    .filter(|w| w.abelianize().iter().zip(&abel).all(|(a, b)| BigInt::from(*a) == *b))
                    .collect()
            };
            let mut tested = 0;
            let found = self.test(h, k, &cands, &mut tested)?;
            levels.push(record(n, sol, tested));
            if let Some(witness) = found {
                return Ok(Decision::new(Verdict::Conjugate { witness }, n, levels));
            }
        }
        let cap = self.cfg.depth_cap;
        Ok(Decision::new(
            Verdict::Undecided(UndecidedReason::DepthExceeded { cap }),
            cap,
            levels,
        ))
    }
}

fn record(level: u32, solution: SolutionSet, candidates_tested: usize) -> LevelRecord {
    LevelRecord {
        level,
        solution,
        candidates_tested,
    }
}

/// Is `h = φ(z) g z^-1` for some `z`?
pub fn decide_twisted(f: &Endomorphism, g: &Word, h: &Word, cfg: &DeciderConfig) -> Result<Decision> {
    Decider::twisted(f, cfg)?.decide(h, g)
}

/// Is `h = φ(z) k ψ(z)^-1` for some `z`?
pub fn decide_doubly(f: &Endomorphism, p: &Endomorphism, h: &Word, k: &Word, cfg: &DeciderConfig) -> Result<Decision> {
    Decider::doubly(f, p, cfg)?.decide(h, k)
}

/// [`decide_doubly`], switching to the complete rank-one procedures when
/// either group is cyclic.
pub fn decide_doubly_auto(
    f: &Endomorphism,
    p: &Endomorphism,
    h: &Word,
    k: &Word,
    cfg: &DeciderConfig,
) -> Result<Decision> {
    if f.codomain_rank() == 1 {
        decide_rank1_codomain(f, p, h, k)
    } else if f.domain_rank() == 1 {
        decide_rank1_domain(f, p, h, k, cfg.rank1_search)
    } else {
        decide_doubly(f, p, h, k, cfg)
    }
}
