use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use reidemeister::decider::{brute_candidates, candidates_level2, check_candidate, check_candidate_doubly};
use reidemeister::experiments::{random_endomorphism, random_word, run_double_experiment, run_single_experiment, ExperimentConfig, LengthDistribution};
use reidemeister::hall::{witt_count, HallBasis, NilpotentElement};
use reidemeister::intlinalg::{smith_normal_form, solve_linear, IntegerMatrix, SolutionSet};
use reidemeister::nielsen::{nielsen_number, pairwise_verdicts, NielsenStatus};
use reidemeister::{decide_doubly, decide_twisted, DeciderConfig, Endomorphism, UndecidedReason, Verdict, Word};

type Outcome = Result<String, String>;

fn w(s: &str) -> Word {
    Word::parse(2, s).unwrap()
}

fn map(s: &str) -> Endomorphism {
    Endomorphism::parse(2, 2, s).unwrap()
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn within(start: Instant, budget: Duration) -> std::result::Result<(), String> {
    let t = start.elapsed();
    if t > budget {
        Err(format!("took {t:.2?}, budget {budget:.0?}"))
    } else {
        Ok(())
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let f = map("a=ab, b=b^2a^4");
    let cfg = DeciderConfig::default();
    let r = nielsen_number(&f, &cfg).map_err(|e| e.to_string())?;
    ensure!(r.status == NielsenStatus::Exact { value: 2 }, "status {:?}", r.status);
    let d = decide_twisted(&f, &w("b"), &w("1"), &cfg).map_err(|e| e.to_string())?;
    ensure!(d.verdict == Verdict::Distinct { level: 2 }, "pair (1, b): {}", d.verdict);
    let z = SolutionSet::Unique {
        x: vec![BigInt::from(-1), BigInt::from(0)],
    };
    ensure!(d.levels[0].solution == z, "abelian stage {:?}", d.levels[0].solution);
    within(start, Duration::from_secs(1))?;
    Ok(format!("{r}; (1, b) {}", d.verdict))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let f = map("a=aba^-1, b=a^-2b^4");
    let cfg = DeciderConfig::default();
    let r = nielsen_number(&f, &cfg).map_err(|e| e.to_string())?;
    ensure!(r.status == NielsenStatus::Exact { value: 5 }, "status {:?}", r.status);
    let pairs = pairwise_verdicts(&f, &cfg).map_err(|e| e.to_string())?;
    ensure!(pairs.len() == 10, "{} pairs among the trace terms", pairs.len());
    for (x, y, v, _) in &pairs {
        ensure!(*v == Verdict::Distinct { level: 4 }, "({x}, {y}): {v}");
    }
    within(start, Duration::from_secs(60))?;
    Ok(format!("{r}; all 10 pairs DISTINCT level=4"))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let f = map("a=a^2ba, b=b^2a");
    let (g, h) = (w("a^2b"), w("a"));
    let d = decide_twisted(&f, &g, &h, &DeciderConfig::default()).map_err(|e| e.to_string())?;
    let Verdict::Conjugate { witness } = &d.verdict else {
        return Err(format!("verdict {}", d.verdict));
    };
    ensure!(check_candidate(&f, &g, &h, witness).unwrap(), "witness {witness} fails");
    ensure!(
        f.apply(witness).unwrap().multiply(&g).unwrap().multiply(&witness.invert()).unwrap() == h,
        "witness {witness} fails the equation"
    );
    ensure!(!check_candidate(&f, &g, &h, &w("b^-1")).unwrap(), "b^-1 should fail");
    let first = SolutionSet::Unique {
        x: vec![BigInt::from(0), BigInt::from(-1)],
    };
    ensure!(d.levels[0].solution == first, "abelian stage {:?}", d.levels[0].solution);
    ensure!(d.depth == 2, "found at depth {}", d.depth);
    let SolutionSet::Unique { x } = &d.levels[1].solution else {
        return Err("level 2 not unique".into());
    };
    let b2 = HallBasis::new(2, 2).unwrap();
    let level2 = candidates_level2(&[w("b^-1")], x, &b2, 2000).unwrap();
    ensure!(level2.contains(witness), "{witness} not among level-2 candidates");
    within(start, Duration::from_secs(1))?;
    Ok(format!("{}", d.verdict))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let f = map("a=[b,a], b=a^-1b");
    let d = decide_twisted(&f, &w("a"), &w("1"), &DeciderConfig::default()).map_err(|e| e.to_string())?;
    let mut summary = format!("{}", d.verdict);
    for l in &d.levels {
        summary.push_str(&format!("; level {} {}", l.level, solution_kind(&l.solution)));
    }
    ensure!(
        !matches!(d.verdict, Verdict::Distinct { .. }),
        "never Distinct, got {summary}"
    );
    ensure!(
        d.verdict == Verdict::Undecided(UndecidedReason::DepthExceeded { cap: 5 }),
        "expected UNDECIDED depth-exceeded cap=5, got {summary}"
    );
    within(start, Duration::from_secs(120))?;
    Ok(summary)
}

fn solution_kind(s: &SolutionSet) -> &'static str {
    match s {
        SolutionSet::NoSolution => "no solution",
        SolutionSet::Unique { .. } => "unique",
        SolutionSet::Infinite { .. } => "infinitely many",
    }
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let f = map("a=b^2a, b=a^-2");
    let p = map("a=a^3, b=a^-1");
    let (h, k) = (w("b"), w("b^-1"));
    let d = decide_doubly(&f, &p, &h, &k, &DeciderConfig::default()).map_err(|e| e.to_string())?;
    ensure!(d.verdict == Verdict::Distinct { level: 2 }, "verdict {}", d.verdict);
    let z = SolutionSet::Unique {
        x: vec![BigInt::from(1), BigInt::from(-2)],
    };
    ensure!(d.levels[0].solution == z, "abelian stage {:?}", d.levels[0].solution);
    ensure!(d.levels[0].candidates_tested == 3, "{} candidates", d.levels[0].candidates_tested);
    for c in ["ab^-2", "b^-1ab^-1", "b^-2a"] {
        ensure!(!check_candidate_doubly(&f, &p, &h, &k, &w(c)).unwrap(), "{c} should fail");
    }
    within(start, Duration::from_secs(1))?;
    Ok(format!("{}", d.verdict))
}

fn criterion_6() -> Outcome {
    for k in 1..=4usize {
        let b = HallBasis::new(k, 5).map_err(|e| e.to_string())?;
        for n in 1..=5 {
            ensure!(
                BigInt::from(b.weight_range(n).len()) == witt_count(k as u32, n),
                "k={k} weight {n}"
            );
        }
    }
    for (k, n, c) in [(2, 3, 2), (2, 4, 3), (2, 5, 6), (3, 2, 3)] {
        ensure!(witt_count(k, n) == BigInt::from(c), "witt({k},{n})");
    }
    Ok("k<=4, n<=5 and spot values".into())
}

fn random_raw_word<R: Rng>(rank: usize, max_len: usize, rng: &mut R) -> Word {
    let len = rng.gen_range(0..=max_len);
    let letters = (0..len).map(|_| reidemeister::Letter::new(rng.gen_range(0..rank as u32), rng.gen()));
    Word::reduce(rank, letters).unwrap()
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..1000 {
        let k = rng.gen_range(1..=3);
        let n = rng.gen_range(1..=4);
        let b = HallBasis::new(k, n).unwrap();
        let (u, v) = (random_raw_word(k, 12, &mut rng), random_raw_word(k, 12, &mut rng));
        let lhs = NilpotentElement::collect(&u.multiply(&v).unwrap(), &b).unwrap();
        let rhs = NilpotentElement::collect(&u, &b)
            .unwrap()
            .mul(&NilpotentElement::collect(&v, &b).unwrap())
            .unwrap();
        ensure!(lhs == rhs, "pair {i}: u={u} v={v} k={k} n={n}");
    }
    Ok("1000 pairs".into())
}

fn det(m: &IntegerMatrix) -> BigInt {
    let n = m.rows();
    if n == 1 {
        return m[(0, 0)].clone();
    }
    (0..n)
        .map(|j| {
            let minor = IntegerMatrix::from_fn(n - 1, n - 1, |r, c| m[(r + 1, if c < j { c } else { c + 1 })].clone());
            let t = &m[(0, j)] * det(&minor);
            if j % 2 == 0 {
                t
            } else {
                -t
            }
        })
        .sum()
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut box_checked = 0;
    for i in 0..500 {
        let (r, c) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
        let a = IntegerMatrix::from_fn(r, c, |_, _| BigInt::from(rng.gen_range(-5..=5)));
        let s = smith_normal_form(&a);
        ensure!(s.u.mul(&a).unwrap().mul(&s.v).unwrap() == s.d, "matrix {i}: U A V != D");
        ensure!(s.d.is_diagonal(), "matrix {i}: D not diagonal");
        ensure!(det(&s.u).abs().is_one() && det(&s.v).abs().is_one(), "matrix {i}: not unimodular");
        let diag = s.d.diagonal();
        for p in diag.windows(2) {
            ensure!(
                p[1].is_zero() || (!p[0].is_zero() && (&p[1] % &p[0]).is_zero()),
                "matrix {i}: divisibility chain {diag:?}"
            );
        }
        if c > 3 {
            continue;
        }
        box_checked += 1;
        let b: Vec<BigInt> = (0..r).map(|_| BigInt::from(rng.gen_range(-6..=6))).collect();
        let hits = box_search(&a, &b, 20);
        match solve_linear(&a, &b).unwrap() {
            SolutionSet::NoSolution => ensure!(hits.is_empty(), "system {i}: box solution {:?}", hits[0]),
            SolutionSet::Unique { x } => {
                ensure!(a.mul_vec(&x).unwrap() == b, "system {i}: bad unique solution");
                ensure!(hits.iter().all(|h| *h == x), "system {i}: second solution in box");
            }
            SolutionSet::Infinite { particular, lattice } => {
                ensure!(a.mul_vec(&particular).unwrap() == b, "system {i}: bad particular solution");
                ensure!(lattice.len() == c - s.rank(), "system {i}: kernel basis size");
                for v in &lattice {
                    ensure!(a.mul_vec(v).unwrap().iter().all(Zero::is_zero), "system {i}: non-kernel vector");
                }
                let basis = IntegerMatrix::from_fn(c, lattice.len(), |p, q| lattice[q][p].clone());
                for h in &hits {
                    let diff: Vec<BigInt> = h.iter().zip(&particular).map(|(x, p)| x - p).collect();
                    ensure!(
                        solve_linear(&basis, &diff).unwrap() != SolutionSet::NoSolution,
                        "system {i}: box solution outside the coset"
                    );
                }
            }
        }
    }
    Ok(format!("500 matrices, {box_checked} systems box-searched"))
}

fn box_search(a: &IntegerMatrix, b: &[BigInt], radius: i64) -> Vec<Vec<BigInt>> {
    let mut points = vec![Vec::new()];
    for _ in 0..a.cols() {
        points = points
            .into_iter()
            .flat_map(|p: Vec<BigInt>| {
                (-radius..=radius).map(move |x| {
                    let mut q = p.clone();
                    q.push(BigInt::from(x));
                    q
                })
            })
            .collect();
    }
    points.into_iter().filter(|x| a.mul_vec(x).unwrap() == b).collect()
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let cfg = DeciderConfig::default();
    let refuters = brute_candidates(2, 4).unwrap();
    let (mut distinct, mut conjugate) = (0, 0);
    for i in 0..200 {
        let f = random_endomorphism(2, 2, 3, LengthDistribution::ByWordCount, &mut rng).unwrap();
        let short = |rng: &mut ChaCha8Rng| {
            if rng.gen_range(0..5) == 0 {
                Word::identity(2)
            } else {
                random_word(2, 2, LengthDistribution::ByWordCount, rng).unwrap()
            }
        };
        let (g, h) = (short(&mut rng), short(&mut rng));
        let d = decide_twisted(&f, &g, &h, &cfg).map_err(|e| e.to_string())?;
        match &d.verdict {
            Verdict::Distinct { .. } => {
                distinct += 1;
                if let Some(z) = refuters.iter().find(|z| check_candidate(&f, &g, &h, z).unwrap()) {
                    return Err(format!("instance {i}: {f}, g={g}, h={h} Distinct but {z} works"));
                }
            }
            Verdict::Conjugate { witness } => {
                conjugate += 1;
                ensure!(check_candidate(&f, &g, &h, witness).unwrap(), "instance {i}: witness {witness} fails");
            }
            Verdict::Undecided(_) => {}
        }
        let fg = f.apply(&g).unwrap();
        let e = decide_twisted(&f, &g, &fg, &cfg).map_err(|e| e.to_string())?;
        ensure!(!matches!(e.verdict, Verdict::Distinct { .. }), "instance {i}: [{fg}] vs [{g}] Distinct");
    }
    Ok(format!("200 instances, {distinct} distinct, {conjugate} conjugate"))
}

fn experiment_config(trials: usize, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        trials,
        base_seed: seed,
        ..Default::default()
    }
}

fn criterion_10() -> Outcome {
    let start = Instant::now();
    let cfg = experiment_config(1000, 2024);
    let short = run_single_experiment(2, 2, &cfg).map_err(|e| e.to_string())?.summary;
    let long = run_single_experiment(2, 5, &cfg).map_err(|e| e.to_string())?.summary;
    let line = format!(
        "l=2 success {:.2}% depth {:.3}; l=5 success {:.2}%",
        short.success_pct, short.avg_depth, long.success_pct
    );
    ensure!((89.0..=98.0).contains(&short.success_pct), "success out of band: {line}");
    ensure!((1.0..=1.3).contains(&short.avg_depth), "depth out of band: {line}");
    ensure!(long.success_pct < short.success_pct, "no downward trend: {line}");
    within(start, Duration::from_secs(1800))?;
    Ok(line)
}

fn criterion_11() -> Outcome {
    let start = Instant::now();
    let cfg = experiment_config(1000, 2024);
    let wide = run_double_experiment(2, 5, 3, &cfg).map_err(|e| e.to_string())?.summary;
    let narrow = run_double_experiment(4, 2, 3, &cfg).map_err(|e| e.to_string())?.summary;
    let line = format!(
        "(2,5) success {:.2}% depth {:.3}; (4,2) matrix failure {:.2}% depth {}..{}",
        wide.success_pct, wide.avg_depth, narrow.matrix_failure_pct, narrow.min_depth, narrow.max_depth
    );
    ensure!(wide.success_pct >= 99.0 && wide.avg_depth <= 1.05, "(2,5) out of band: {line}");
    ensure!(narrow.matrix_failure_pct >= 70.0, "(4,2) matrix failure too rare: {line}");
    ensure!(narrow.min_depth == 1 && narrow.max_depth == 1, "(4,2) depth not identically 1: {line}");
    within(start, Duration::from_secs(1800))?;
    Ok(line)
}

#[test]
fn acceptance_criteria() {
    let criteria: [(u32, fn() -> Outcome); 11] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
        (11, criterion_11),
    ];
    let mut failed = Vec::new();
    for (n, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let t = start.elapsed();
        match outcome {
            Ok(msg) => println!("criterion {n:>2}: PASS ({t:.2?}) {msg}"),
            Err(msg) => {
                println!("criterion {n:>2}: FAIL ({t:.2?}) {msg}");
                failed.push(n);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
