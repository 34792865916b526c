use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use reidemeister::decider::{brute_candidates, check_candidate, Decider};
use reidemeister::foxcalc::{fox_derivative, reidemeister_trace, GroupRingElement};
use reidemeister::hall::{witt_count, HallBasis, InducedMap, NilpotentElement};
use reidemeister::intlinalg::{smith_normal_form, solve_linear, IntegerMatrix, SolutionSet};
use reidemeister::nielsen::{nielsen_number, NielsenStatus, PairOutcome};
use reidemeister::{decide_twisted, DeciderConfig, Endomorphism, Letter, Verdict, Word};

fn raw_letters(rank: usize, max_len: usize) -> impl Strategy<Value = Vec<Letter>> {
    prop::collection::vec((0..rank as u32, any::<bool>()), 0..=max_len)
        .prop_map(|v| v.into_iter().map(|(g, i)| Letter::new(g, i)).collect())
}

fn word(rank: usize, max_len: usize) -> impl Strategy<Value = Word> {
    raw_letters(rank, max_len).prop_map(move |l| Word::reduce(rank, l).unwrap())
}

fn nonempty_word(rank: usize, max_len: usize) -> impl Strategy<Value = Word> {
    word(rank, max_len).prop_filter("nonempty", |w| !w.is_identity())
}

fn endo(rank: usize, max_len: usize) -> impl Strategy<Value = Endomorphism> {
    prop::collection::vec(nonempty_word(rank, max_len), rank).prop_map(move |v| Endomorphism::new(rank, rank, v).unwrap())
}

fn ranked<T: std::fmt::Debug>(
    max_rank: usize,
    f: impl Fn(usize) -> BoxedStrategy<T> + 'static,
) -> impl Strategy<Value = (usize, T)> {
    (1..=max_rank).prop_flat_map(move |k| (Just(k), f(k)))
}

fn generator_minus_one(rank: usize, i: usize) -> GroupRingElement {
    GroupRingElement::from_word(Word::generator(rank, i).unwrap())
        .sub(&GroupRingElement::one(rank))
        .unwrap()
}

fn det(m: &IntegerMatrix) -> BigInt {
    let n = m.rows();
    if n == 0 {
        return BigInt::one();
    }
    if n == 1 {
        return m[(0, 0)].clone();
    }
    let mut total = BigInt::zero();
    for j in 0..n {
        let minor = IntegerMatrix::from_fn(n - 1, n - 1, |r, c| m[(r + 1, if c < j { c } else { c + 1 })].clone());
        let term = &m[(0, j)] * det(&minor);
        if j % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

fn small_matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = IntegerMatrix> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(|(r, c)| {
        prop::collection::vec(-5i64..=5, r * c)
            .prop_map(move |v| IntegerMatrix::from_fn(r, c, |i, j| BigInt::from(v[i * c + j])))
    })
}

fn box_points(cols: usize, radius: i64) -> Vec<Vec<BigInt>> {
    let mut out = vec![Vec::new()];
    for _ in 0..cols {
        out = out
            .into_iter()
            .flat_map(|p| {
                (-radius..=radius).map(move |x| {
                    let mut q = p.clone();
                    q.push(BigInt::from(x));
                    q
                })
            })
            .collect();
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn reduction_is_idempotent((k, l) in ranked(3, |k| raw_letters(k, 24).boxed())) {
        let once = Word::reduce(k, l).unwrap();
        let twice = Word::reduce(k, once.letters().iter().copied()).unwrap();
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn multiplication_is_associative_and_short(
        (_, (u, v, w)) in ranked(3, |k| (word(k, 10), word(k, 10), word(k, 10)).boxed())
    ) {
        let left = u.multiply(&v).unwrap().multiply(&w).unwrap();
        let right = u.multiply(&v.multiply(&w).unwrap()).unwrap();
        prop_assert_eq!(&left, &right);
        prop_assert!(u.multiply(&v).unwrap().len() <= u.len() + v.len());
        prop_assert!(u.multiply(&u.invert()).unwrap().is_identity());
    }

    #[test]
    fn maps_are_homomorphisms((_, (f, u, v)) in ranked(3, |k| (endo(k, 4), word(k, 8), word(k, 8)).boxed())) {
        let uv = u.multiply(&v).unwrap();
        prop_assert_eq!(f.apply(&uv).unwrap(), f.apply(&u).unwrap().multiply(&f.apply(&v).unwrap()).unwrap());
    }

    #[test]
    fn printed_words_and_maps_reparse((k, (f, w)) in ranked(3, |k| (endo(k, 5), word(k, 12)).boxed())) {
        prop_assert_eq!(Word::parse(k, &w.to_string()).unwrap(), w);
        prop_assert_eq!(Endomorphism::parse(k, k, &f.to_string()).unwrap(), f);
    }

    #[test]
    fn fox_product_rule((k, (u, v)) in ranked(3, |k| (word(k, 10), word(k, 10)).boxed())) {
        let uv = u.multiply(&v).unwrap();
        for i in 0..k {
            let expected = fox_derivative(&u, i).unwrap()
                .add(&fox_derivative(&v, i).unwrap().left_mul_word(&u).unwrap()).unwrap();
            prop_assert_eq!(fox_derivative(&uv, i).unwrap(), expected);
        }
    }

    #[test]
    fn fox_fundamental_identity((k, w) in ranked(3, |k| word(k, 14).boxed())) {
        let mut sum = GroupRingElement::zero(k);
        for i in 0..k {
            sum = sum.add(&fox_derivative(&w, i).unwrap().mul(&generator_minus_one(k, i)).unwrap()).unwrap();
        }
        let lhs = GroupRingElement::from_word(w.clone()).sub(&GroupRingElement::one(k)).unwrap();
        prop_assert_eq!(sum, lhs);
    }

    #[test]
    fn trace_has_no_zero_terms((_, f) in ranked(3, |k| endo(k, 5).boxed())) {
        let rt = reidemeister_trace(&f).unwrap();
        prop_assert!(rt.terms().all(|(_, c)| !c.is_zero()));
    }

    #[test]
    fn collection_is_a_homomorphism(
        (k, n, u, v) in (1usize..=3, 1u32..=4).prop_flat_map(|(k, n)| (Just(k), Just(n), word(k, 10), word(k, 10)))
    ) {
        let b = HallBasis::new(k, n).unwrap();
        let uv = u.multiply(&v).unwrap();
        let lhs = NilpotentElement::collect(&uv, &b).unwrap();
        let rhs = NilpotentElement::collect(&u, &b).unwrap().mul(&NilpotentElement::collect(&v, &b).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn normal_form_ignores_inserted_cancelling_pairs(
        (k, n, w, pos, c) in (1usize..=3, 1u32..=4).prop_flat_map(|(k, n)| {
            (Just(k), Just(n), word(k, 10), 0usize..=10, any::<prop::sample::Index>())
        })
    ) {
        let b = HallBasis::new(k, n).unwrap();
        let e = b.expand(c.index(b.len()));
        let pair = e.multiply(&e.invert()).unwrap();
        // insert expand(c) expand(c)^-1 letter by letter, unreduced
        let p = pos.min(w.len());
        let mut letters: Vec<Letter> = w.letters()[..p].to_vec();
        letters.extend(e.letters());
        letters.extend(e.invert().letters());
        letters.extend(&w.letters()[p..]);
        prop_assert!(pair.is_identity());
        let padded = Word::reduce(k, letters).unwrap();
        prop_assert_eq!(NilpotentElement::collect(&padded, &b).unwrap(), NilpotentElement::collect(&w, &b).unwrap());
        // a commutator of weight class + 1 is trivial in the quotient
        let above = HallBasis::new(k, n + 1).unwrap();
        let heavy = above.weight_range(n + 1);
        if !heavy.is_empty() {
            let r = above.expand(heavy.start + c.index(heavy.len()));
            let padded = w.insert_at(p, &r).unwrap();
            prop_assert_eq!(NilpotentElement::collect(&padded, &b).unwrap(), NilpotentElement::collect(&w, &b).unwrap());
        }
        let x = NilpotentElement::collect(&w, &b).unwrap();
        prop_assert_eq!(NilpotentElement::collect(&x.to_word(), &b).unwrap(), x);
    }

    #[test]
    fn induced_maps_are_natural(
        (k, n, f, w) in (1usize..=3, 1u32..=4).prop_flat_map(|(k, n)| (Just(k), Just(n), endo(k, 3), word(k, 6)))
    ) {
        let b = HallBasis::new(k, n).unwrap();
        let m = InducedMap::endomorphism(&f, &b).unwrap();
        let via_map = m.apply(&NilpotentElement::collect(&w, &b).unwrap()).unwrap();
        prop_assert_eq!(via_map, NilpotentElement::collect(&f.apply(&w).unwrap(), &b).unwrap());
        for i in 0..b.len() {
            let img = m.entry_image(i);
            for lower in 1..b.weight(i) {
                prop_assert!(img.weight_part(lower).iter().all(Zero::is_zero));
            }
        }
    }

    #[test]
    fn smith_form_is_certified(a in small_matrix(4, 4)) {
        let s = smith_normal_form(&a);
        prop_assert_eq!(s.u.mul(&a).unwrap().mul(&s.v).unwrap(), s.d.clone());
        prop_assert!(s.d.is_diagonal());
        prop_assert_eq!(det(&s.u).abs(), BigInt::one());
        prop_assert_eq!(det(&s.v).abs(), BigInt::one());
        let diag = s.d.diagonal();
        prop_assert!(diag.iter().all(|x| !x.is_negative()));
        for w in diag.windows(2) {
            prop_assert!(w[1].is_zero() || (!w[0].is_zero() && (&w[1] % &w[0]).is_zero()));
        }
    }

    #[test]
    fn solutions_match_box_search(
        (a, b) in small_matrix(4, 3).prop_flat_map(|a| {
            let r = a.rows();
            (Just(a), prop::collection::vec(-6i64..=6, r))
        })
    ) {
        let b: Vec<BigInt> = b.into_iter().map(BigInt::from).collect();
        let hits: Vec<Vec<BigInt>> = box_points(a.cols(), 20)
            .into_iter()
            .filter(|x| a.mul_vec(x).unwrap() == b)
            .collect();
        match solve_linear(&a, &b).unwrap() {
            SolutionSet::NoSolution => prop_assert!(hits.is_empty()),
            SolutionSet::Unique { x } => {
                prop_assert_eq!(a.mul_vec(&x).unwrap(), b.clone());
                prop_assert!(hits.len() <= 1);
                if x.iter().all(|v| v.abs() <= BigInt::from(20)) {
                    prop_assert_eq!(hits, vec![x]);
                }
            }
            SolutionSet::Infinite { particular, lattice } => {
                prop_assert_eq!(a.mul_vec(&particular).unwrap(), b.clone());
                prop_assert!(!lattice.is_empty());
                for v in &lattice {
                    prop_assert!(a.mul_vec(v).unwrap().iter().all(Zero::is_zero));
                }
                prop_assert_eq!(lattice.len(), a.cols() - smith_normal_form(&a).rank());
                // a short kernel vector can be absent, so the box may hold
                // fewer than two points; every point it holds is in the coset
                let basis = IntegerMatrix::from_fn(a.cols(), lattice.len(), |i, j| lattice[j][i].clone());
                for h in &hits {
                    let diff: Vec<BigInt> = h.iter().zip(&particular).map(|(x, p)| x - p).collect();
                    prop_assert!(solve_linear(&basis, &diff).unwrap() != SolutionSet::NoSolution);
                }
                let shifted: Vec<BigInt> = particular.iter().zip(&lattice[0]).map(|(p, v)| p + v).collect();
                prop_assert_eq!(a.mul_vec(&shifted).unwrap(), b.clone());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn decider_is_sound((f, g, h) in (endo(2, 3), word(2, 2), word(2, 2))) {
        let cfg = DeciderConfig::default();
        let d = decide_twisted(&f, &g, &h, &cfg).unwrap();
        match &d.verdict {
            Verdict::Conjugate { witness } => prop_assert!(check_candidate(&f, &g, &h, witness).unwrap()),
            Verdict::Distinct { .. } => {
                for w in brute_candidates(2, 4).unwrap() {
                    prop_assert!(!check_candidate(&f, &g, &h, &w).unwrap(), "witness {} refutes Distinct", w);
                }
            }
            Verdict::Undecided(_) => {}
        }
        let again = decide_twisted(&f, &g, &h, &cfg).unwrap();
        prop_assert_eq!(&again, &d);
    }

    #[test]
    fn images_are_never_distinct((f, g) in (endo(2, 3), word(2, 3))) {
        let fg = f.apply(&g).unwrap();
        let d = decide_twisted(&f, &g, &fg, &DeciderConfig::default()).unwrap();
        prop_assert!(!matches!(d.verdict, Verdict::Distinct { .. }), "{}", d.verdict);
    }

    #[test]
    fn distinct_verdicts_survive_larger_caps((f, g, h, cap) in (endo(2, 3), word(2, 2), word(2, 2), 1u32..=4)) {
        let d = decide_twisted(&f, &g, &h, &DeciderConfig::with_depth_cap(cap)).unwrap();
        if let Verdict::Distinct { level } = d.verdict {
            for c in level..=5 {
                let e = decide_twisted(&f, &g, &h, &DeciderConfig::with_depth_cap(c)).unwrap();
                prop_assert_eq!(&e.verdict, &d.verdict);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn nielsen_classes_are_consistent(f in endo(2, 3)) {
        let cfg = DeciderConfig::default();
        let r = nielsen_number(&f, &cfg).unwrap();
        let decider = Decider::twisted(&f, &cfg).unwrap();
        // no Distinct verdict between members of one class
        for class in &r.classes {
            for (i, x) in class.members.iter().enumerate() {
                for y in &class.members[i + 1..] {
                    let d = decider.decide(&y.word, &x.word).unwrap();
                    prop_assert!(!matches!(d.verdict, Verdict::Distinct { .. }), "{} ~ {}", x.word, y.word);
                }
            }
        }
        // recorded conjugacies are not contradicted by the final classes
        for p in &r.pairs {
            if let PairOutcome::Decided { verdict: Verdict::Distinct { .. }, .. } = p.outcome {
                let same = r.classes.iter().any(|c| {
                    c.members.iter().any(|m| m.word == p.x) && c.members.iter().any(|m| m.word == p.y)
                });
                prop_assert!(!same);
            }
        }
        let total: BigInt = r.classes.iter().map(|c| c.coefficient.clone()).sum();
        let rt = reidemeister_trace(&f).unwrap();
        prop_assert_eq!(total, rt.terms().map(|(_, c)| c.clone()).sum::<BigInt>());
        let nonzero = r.classes.iter().filter(|c| !c.coefficient.is_zero()).count();
        match r.status {
            NielsenStatus::Exact { value } => {
                prop_assert_eq!(value, nonzero);
            }
            NielsenStatus::Partial { lower_bound, upper_bound } => {
                prop_assert!(lower_bound < upper_bound);
                prop_assert_eq!(upper_bound, nonzero);
                prop_assert!(!r.unresolved.is_empty());
            }
        }
    }
}

#[test]
fn witt_counts_match_basis() {
    for k in 1..=4usize {
        let b: Arc<HallBasis> = HallBasis::new(k, 5).unwrap();
        for w in 1..=5 {
            assert_eq!(BigInt::from(b.weight_range(w).len()), witt_count(k as u32, w), "k={k} w={w}");
        }
    }
}
