//! Nielsen numbers: group the Reidemeister trace terms into twisted
//! conjugacy classes and count classes with nonzero total coefficient.

use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;

use crate::decider::{ser_word, Decider, DeciderConfig, UndecidedReason, Verdict};
use crate::error::{Error, Result};
use crate::foxcalc::reidemeister_trace;
use crate::freegroup::{Endomorphism, Word};

/// Iterates of the map tried before any decision: `φ^j(x) = y` merges `x`, `y`.
const PREMERGE_POWER: u32 = 3;
/// Largest component of unresolved pairs whose settlements are enumerated.
const ENUMERATION_LIMIT: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NielsenStatus {
    Exact { value: usize },
    /// The count lies in `lower_bound..=upper_bound` depending on how the
    /// unresolved pairs would be settled.
    Partial { lower_bound: usize, upper_bound: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnresolvedPair {
    #[serde(serialize_with = "ser_word")]
    pub x: Word,
    #[serde(serialize_with = "ser_word")]
    pub y: Word,
    pub reason: UndecidedReason,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PairOutcome {
    /// `φ^power(x) = y` or the reverse.
    Premerged { power: u32 },
    Decided { verdict: Verdict, depth: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairRecord {
    #[serde(serialize_with = "ser_word")]
    pub x: Word,
    #[serde(serialize_with = "ser_word")]
    pub y: Word,
    pub outcome: PairOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassReport {
    #[serde(serialize_with = "ser_word")]
    pub representative: Word,
    #[serde(serialize_with = "crate::intlinalg::ser_bigint")]
    pub coefficient: BigInt,
    pub members: Vec<TermReport>,
}

/// One Reidemeister trace term.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TermReport {
    #[serde(serialize_with = "ser_word")]
    pub word: Word,
    #[serde(serialize_with = "crate::intlinalg::ser_bigint")]
    pub coefficient: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NielsenResult {
    pub status: NielsenStatus,
    /// Pairs left undecided after all merges, whether or not they move the count.
    pub unresolved: Vec<UnresolvedPair>,
    pub classes: Vec<ClassReport>,
    pub pairs: Vec<PairRecord>,
    /// Highest level reached by any decision (0 when none was needed).
    pub max_level: u32,
}

impl NielsenResult {
    pub fn is_exact(&self) -> bool {
        matches!(self.status, NielsenStatus::Exact { .. })
    }

    /// The exact value, or the certified lower bound.
    pub fn lower_bound(&self) -> usize {
        match self.status {
            NielsenStatus::Exact { value } => value,
            NielsenStatus::Partial { lower_bound, .. } => lower_bound,
        }
    }
}

impl fmt::Display for NielsenResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.status {
            NielsenStatus::Exact { value } => write!(f, "N={value} (exact, max level {})", self.max_level),
            NielsenStatus::Partial {
                lower_bound,
                upper_bound,
            } => write!(
                f,
                "N>={lower_bound} (partial, at most {upper_bound}, {} unresolved, max level {})",
                self.unresolved.len(),
                self.max_level
            ),
        }
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut c = x;
        while self.parent[c] != r {
            let next = self.parent[c];
            self.parent[c] = r;
            c = next;
        }
        r
    }

    /// Keeps the smaller root so class representatives are the earliest terms.
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

struct Classes {
    uf: UnionFind,
    separated: Vec<(usize, usize)>,
}

impl Classes {
    fn same(&mut self, a: usize, b: usize) -> bool {
        self.uf.find(a) == self.uf.find(b)
    }

    fn apart(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.uf.find(a), self.uf.find(b));
        let seps = self.separated.clone();
        seps.into_iter().any(|(x, y)| {
            let (rx, ry) = (self.uf.find(x), self.uf.find(y));
            (rx == ra && ry == rb) || (rx == rb && ry == ra)
        })
    }
}

fn nonzero_classes(coeffs: &[BigInt], uf: &mut UnionFind) -> usize {
    let mut sums: Vec<BigInt> = vec![BigInt::zero(); coeffs.len()];
    for (i, c) in coeffs.iter().enumerate() {
        let r = uf.find(i);
        sums[r] += c;
    }
    sums.iter().filter(|s| !s.is_zero()).count()
}

/// Nielsen number of `f` from its Reidemeister trace.
pub fn nielsen_number(f: &Endomorphism, cfg: &DeciderConfig) -> Result<NielsenResult> {
    if !f.is_endomorphism() {
        return Err(Error::NotEndomorphism {
            domain: f.domain_rank(),
            codomain: f.codomain_rank(),
        });
    }
    let rt = reidemeister_trace(f)?;
    let terms: Vec<(Word, BigInt)> = rt.terms().map(|(w, c)| (w.clone(), c.clone())).collect();
    let n = terms.len();
    let decider = Decider::twisted(f, cfg)?;
    let iterates: Vec<Endomorphism> = (1..=PREMERGE_POWER).map(|j| f.iterate(j)).collect::<Result<_>>()?;

    let mut classes = Classes {
        uf: UnionFind::new(n),
        separated: Vec::new(),
    };
    let mut pairs = Vec::new();
    let mut order: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    order.sort_by_key(|&(i, j)| (terms[i].0.len() + terms[j].0.len(), i, j));

    for &(i, j) in &order {
        let (x, y) = (&terms[i].0, &terms[j].0);
        for (p, g) in iterates.iter().enumerate() {
            if g.apply(x)? == *y || g.apply(y)? == *x {
                if !classes.same(i, j) {
                    classes.uf.union(i, j);
                    pairs.push(PairRecord {
                        x: x.clone(),
                        y: y.clone(),
                        outcome: PairOutcome::Premerged { power: p as u32 + 1 },
                    });
                }
                break;
            }
        }
    }

    let mut undecided: Vec<(usize, usize, UndecidedReason)> = Vec::new();
    let mut max_level = 0;
    for &(i, j) in &order {
        if classes.same(i, j) || classes.apart(i, j) {
            continue;
        }
        let (x, y) = (&terms[i].0, &terms[j].0);
        let d = decider.decide(x, y)?;
        max_level = max_level.max(d.depth);
        match &d.verdict {
            Verdict::Conjugate { .. } => classes.uf.union(i, j),
            Verdict::Distinct { .. } => classes.separated.push((i, j)),
            Verdict::Undecided(reason) => undecided.push((i, j, *reason)),
        }
        pairs.push(PairRecord {
            x: x.clone(),
            y: y.clone(),
            outcome: PairOutcome::Decided {
                verdict: d.verdict,
                depth: d.depth,
            },
        });
    }
    // later merges and separations can settle earlier undecided pairs
    let open: Vec<(usize, usize, UndecidedReason)> = undecided
        .into_iter()
        .filter(|&(i, j, _)| !classes.same(i, j) && !classes.apart(i, j))
        .collect();

    let coeffs: Vec<BigInt> = terms.iter().map(|(_, c)| c.clone()).collect();
    let upper = nonzero_classes(&coeffs, &mut classes.uf);
    let lower = lowest_count(&coeffs, &mut classes, &open);
    let status = if lower == upper {
        NielsenStatus::Exact { value: upper }
    } else {
        NielsenStatus::Partial {
            lower_bound: lower,
            upper_bound: upper,
        }
    };

    let mut reports: Vec<ClassReport> = Vec::new();
    let mut root_slot: Vec<Option<usize>> = vec![None; n];
    for (i, (w, c)) in terms.iter().enumerate() {
        let r = classes.uf.find(i);
        let slot = *root_slot[r].get_or_insert_with(|| {
            reports.push(ClassReport {
                representative: w.clone(),
                coefficient: BigInt::zero(),
                members: Vec::new(),
            });
            reports.len() - 1
        });
        reports[slot].coefficient += c;
        reports[slot].members.push(TermReport {
            word: w.clone(),
            coefficient: c.clone(),
        });
    }

    let unresolved = open
        .into_iter()
        .map(|(i, j, reason)| UnresolvedPair {
            x: terms[i].0.clone(),
            y: terms[j].0.clone(),
            reason,
        })
        .collect();
    Ok(NielsenResult {
        status,
        unresolved,
        classes: reports,
        pairs,
        max_level,
    })
}

/// Smallest count over every way of settling the open pairs that respects
/// known separations. Open pairs split into independent components over the
/// current classes; each is enumerated on its own, and a component with too
/// many pairs contributes nothing.
fn lowest_count(coeffs: &[BigInt], classes: &mut Classes, open: &[(usize, usize, UndecidedReason)]) -> usize {
    let n = coeffs.len();
    let root: Vec<usize> = (0..n).map(|i| classes.uf.find(i)).collect();
    let mut sums = vec![BigInt::zero(); n];
    for (i, c) in coeffs.iter().enumerate() {
        sums[root[i]] += c;
    }
    let seps: Vec<(usize, usize)> = classes.separated.iter().map(|&(a, b)| (root[a], root[b])).collect();
    let edges: Vec<(usize, usize)> = open.iter().map(|&(i, j, _)| (root[i], root[j])).collect();

    let mut comp = UnionFind::new(n);
    for &(a, b) in &edges {
        comp.union(a, b);
    }
    let touched: Vec<bool> = {
        let mut t = vec![false; n];
        for &(a, b) in &edges {
            t[a] = true;
            t[b] = true;
        }
        t
    };
    let mut total = (0..n).filter(|&r| root[r] == r && !touched[r] && !sums[r].is_zero()).count();

    let mut comps: Vec<usize> = edges.iter().map(|&(a, _)| comp.find(a)).collect();
    comps.sort_unstable();
    comps.dedup();
    for c in comps {
        let local: Vec<(usize, usize)> = edges.iter().copied().filter(|&(a, _)| comp.find(a) == c).collect();
        if local.len() > ENUMERATION_LIMIT {
            continue;
        }
        let members: Vec<usize> = (0..n).filter(|&r| root[r] == r && touched[r] && comp.find(r) == c).collect();
        let best = (0..1u64 << local.len())
            .filter_map(|mask| {
                let mut uf = UnionFind::new(n);
                for (e, &(a, b)) in local.iter().enumerate() {
                    if mask >> e & 1 == 1 {
                        uf.union(a, b);
                    }
                }
                if seps.iter().any(|&(a, b)| a != b && uf.find(a) == uf.find(b)) {
                    return None;
                }
                let mut merged = vec![BigInt::zero(); n];
                for &m in &members {
                    merged[uf.find(m)] += &sums[m];
                }
                Some(merged.iter().filter(|s| !s.is_zero()).count())
            })
            .min()
            .expect("the empty merge is always consistent");
        total += best;
    }
    total
}

/// Decides every pair of trace terms independently, without merging.
pub fn pairwise_verdicts(f: &Endomorphism, cfg: &DeciderConfig) -> Result<Vec<(Word, Word, Verdict, u32)>> {
    let rt = reidemeister_trace(f)?;
    let words: Vec<Word> = rt.terms().map(|(w, _)| w.clone()).collect();
    let decider = Decider::twisted(f, cfg)?;
    let mut out = Vec::new();
    for i in 0..words.len() {
        for j in i + 1..words.len() {
            let d = decider.decide(&words[i], &words[j])?;
            out.push((words[i].clone(), words[j].clone(), d.verdict, d.depth));
        }
    }
    Ok(out)
}
