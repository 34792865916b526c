//! Seeded random maps and Monte Carlo success-rate tables.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decider::{decide_doubly_auto, DeciderConfig, UndecidedReason, Verdict};
use crate::error::{Error, Result};
use crate::freegroup::{Endomorphism, Letter, Word};
use crate::nielsen::nielsen_number;

/// How a "word of length at most `l`" is drawn.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthDistribution {
    /// Uniform over all nonempty reduced words of length `≤ l`.
    ByWordCount,
    /// Length uniform in `1..=l`, then a uniform reduced word of that length.
    #[default]
    UniformLength,
}

/// Nonempty reduced word of length at most `max_len` over `rank` generators.
pub fn random_word<R: Rng + ?Sized>(rank: usize, max_len: usize, dist: LengthDistribution, rng: &mut R) -> Result<Word> {
    if rank == 0 || max_len == 0 {
        return Err(Error::InvalidArgument(format!(
            "random words need rank and length at least 1, got rank {rank}, length {max_len}"
        )));
    }
    let len = match dist {
        LengthDistribution::UniformLength => rng.gen_range(1..=max_len),
        LengthDistribution::ByWordCount => {
            let counts = word_counts(rank, max_len)?;
            let total: u128 = counts.iter().sum();
            let mut r = rng.gen_range(0..total);
            let mut len = max_len;
            for (i, &c) in counts.iter().enumerate() {
                if r < c {
                    len = i + 1;
                    break;
                }
                r -= c;
            }
            len
        }
    };
    let mut letters: Vec<Letter> = Vec::with_capacity(len);
    let alphabet = 2 * rank as u32;
    for i in 0..len {
        let choices = if i == 0 { alphabet } else { alphabet - 1 };
        let mut pick = rng.gen_range(0..choices);
        if let Some(prev) = letters.last() {
            // skip the index of the letter that would cancel
            let banned = letter_index(prev.inv());
            if pick >= banned {
                pick += 1;
            }
        }
        letters.push(Letter::new(pick / 2, pick % 2 == 1));
    }
    Word::reduce(rank, letters)
}

fn letter_index(l: Letter) -> u32 {
    2 * l.generator + u32::from(l.inverse)
}

/// Number of reduced words of each length `1..=max_len`.
fn word_counts(rank: usize, max_len: usize) -> Result<Vec<u128>> {
    let overflow = || Error::InvalidArgument(format!("too many words of length {max_len} on {rank} generators"));
    let mut counts = Vec::with_capacity(max_len);
    let mut c = 2 * rank as u128;
    for i in 0..max_len {
        if i > 0 {
            c = c.checked_mul(2 * rank as u128 - 1).ok_or_else(overflow)?;
        }
        counts.push(c);
    }
    counts.iter().try_fold(0u128, |a, &c| a.checked_add(c)).ok_or_else(overflow)?;
    Ok(counts)
}

/// A map `F_{k1} → F_{k2}` whose generator images are independent random words.
pub fn random_endomorphism<R: Rng + ?Sized>(
    k1: usize,
    k2: usize,
    max_len: usize,
    dist: LengthDistribution,
    rng: &mut R,
) -> Result<Endomorphism> {
    let images = (0..k1)
        .map(|_| random_word(k2, max_len, dist, rng))
        .collect::<Result<Vec<_>>>()?;
    Endomorphism::new(k1, k2, images)
}

/// Seed of trial `index`, independent of scheduling.
pub fn trial_seed(base_seed: u64, index: u64) -> u64 {
    let mut z = base_seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub trials: usize,
    pub base_seed: u64,
    pub lengths: LengthDistribution,
    /// Per-trial wall clock budget; running out counts as a complexity failure.
    #[serde(serialize_with = "ser_secs")]
    pub timeout: Duration,
    pub decider: DeciderConfig,
    /// Keep every trial record in the report.
    pub keep_trials: bool,
}

fn ser_secs<S: serde::Serializer>(d: &Duration, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            trials: 1000,
            base_seed: 0,
            lengths: LengthDistribution::default(),
            timeout: Duration::from_secs(30),
            decider: DeciderConfig::default(),
            keep_trials: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialOutcome {
    Success,
    Failure,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub index: usize,
    pub seed: u64,
    pub maps: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub words: Vec<String>,
    pub outcome: TrialOutcome,
    pub matrix_failure: bool,
    pub complexity_failure: bool,
    /// Highest level needed; at least 1 on success.
    pub depth: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(serialize_with = "ser_secs")]
    pub elapsed: Duration,
}

impl TrialRecord {
    pub fn is_success(&self) -> bool {
        self.outcome == TrialOutcome::Success
    }
}

/// One row of a success-rate table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub k1: usize,
    pub k2: usize,
    pub l: usize,
    pub trials: usize,
    pub successes: usize,
    pub matrix_failures: usize,
    pub complexity_failures: usize,
    pub success_pct: f64,
    pub matrix_failure_pct: f64,
    pub complexity_failure_pct: f64,
    /// Mean depth over successful trials.
    pub avg_depth: f64,
    /// Population standard deviation of depth over successful trials.
    pub depth_sd: f64,
    pub min_depth: u32,
    pub max_depth: u32,
}

pub const CSV_HEADER: &str = "k1,k2,l,trials,success_pct,matrix_failure_pct,complexity_failure_pct,avg_depth,depth_sd";

impl SummaryRow {
    pub fn from_trials(k1: usize, k2: usize, l: usize, trials: &[TrialRecord]) -> Self {
        let n = trials.len();
        let successes = trials.iter().filter(|t| t.is_success()).count();
        let matrix_failures = trials.iter().filter(|t| t.matrix_failure).count();
        let complexity_failures = trials.iter().filter(|t| t.complexity_failure).count();
        let pct = |c: usize| if n == 0 { 0.0 } else { 100.0 * c as f64 / n as f64 };
        let depths: Vec<f64> = trials.iter().filter(|t| t.is_success()).map(|t| t.depth as f64).collect();
        let (avg, sd) = if depths.is_empty() {
            (0.0, 0.0)
        } else {
            let m = depths.iter().sum::<f64>() / depths.len() as f64;
            let v = depths.iter().map(|d| (d - m) * (d - m)).sum::<f64>() / depths.len() as f64;
            (m, v.sqrt())
        };
        let succ = trials.iter().filter(|t| t.is_success()).map(|t| t.depth);
        SummaryRow {
            k1,
            k2,
            l,
            trials: n,
            successes,
            matrix_failures,
            complexity_failures,
            success_pct: pct(successes),
            matrix_failure_pct: pct(matrix_failures),
            complexity_failure_pct: pct(complexity_failures),
            avg_depth: avg,
            depth_sd: sd,
            min_depth: succ.clone().min().unwrap_or(0),
            max_depth: succ.max().unwrap_or(0),
        }
    }

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{:.2},{:.2},{:.2},{:.3},{:.3}",
            self.k1,
            self.k2,
            self.l,
            self.trials,
            self.success_pct,
            self.matrix_failure_pct,
            self.complexity_failure_pct,
            self.avg_depth,
            self.depth_sd
        )
    }
}

/// Render rows as CSV with the fixed header.
pub fn to_csv(rows: &[SummaryRow]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(s, "{}", r.csv_line());
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Single,
    Double,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub kind: ExperimentKind,
    pub config: ExperimentConfig,
    pub summary: SummaryRow,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub trials: Vec<TrialRecord>,
}

impl ExperimentReport {
    /// One JSON object per trial, newline separated.
    pub fn trial_log(&self) -> String {
        let mut s = String::new();
        for t in &self.trials {
            s.push_str(&serde_json::to_string(t).expect("trial records serialize"));
            s.push('\n');
        }
        s
    }
}

fn classify(reason: &UndecidedReason, matrix: &mut bool, complexity: &mut bool) {
    match reason {
        UndecidedReason::MatrixFailure { .. } => *matrix = true,
        UndecidedReason::DepthExceeded { .. } | UndecidedReason::Timeout { .. } => *complexity = true,
    }
}

fn run_trials<F>(cfg: &ExperimentConfig, trial: F) -> Vec<TrialRecord>
where
    F: Fn(usize, u64, &DeciderConfig) -> TrialRecord + Sync,
{
    (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let seed = trial_seed(cfg.base_seed, i as u64);
            let mut dc = cfg.decider.clone();
            dc.deadline = Some(Instant::now() + cfg.timeout);
            trial(i, seed, &dc)
        })
        .collect()
}

fn check_params(k1: usize, k2: usize, l: usize) -> Result<()> {
    if k1 == 0 || k2 == 0 || l == 0 {
        return Err(Error::InvalidArgument(format!(
            "ranks and length must be at least 1, got ({k1}, {k2}, {l})"
        )));
    }
    word_counts(k2, l).map(|_| ())
}

/// Nielsen numbers of random endomorphisms of `F_k` with images of length `≤ l`.
/// A trial succeeds when every pairwise decision resolved.
pub fn run_single_experiment(k: usize, l: usize, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    check_params(k, k, l)?;
    cfg.decider.validate()?;
    let trials = run_trials(cfg, |index, seed, dc| {
        let start = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_endomorphism(k, k, l, cfg.lengths, &mut rng).expect("parameters checked");
        let (mut matrix, mut complexity) = (false, false);
        let mut error = None;
        let depth = match nielsen_number(&f, dc) {
            Ok(r) => {
                for u in &r.unresolved {
                    classify(&u.reason, &mut matrix, &mut complexity);
                }
                r.max_level
            }
            Err(e) => {
                complexity = true;
                error = Some(e.to_string());
                0
            }
        };
        let success = !matrix && !complexity;
        TrialRecord {
            index,
            seed,
            maps: vec![f.to_string()],
            words: Vec::new(),
            outcome: if success { TrialOutcome::Success } else { TrialOutcome::Failure },
            matrix_failure: matrix,
            complexity_failure: complexity,
            depth: if success { depth.max(1) } else { depth },
            error,
            elapsed: start.elapsed(),
        }
    });
    Ok(report(ExperimentKind::Single, k, k, l, cfg, trials))
}

/// Doubly twisted conjugacy of random `h, k` under random `φ, ψ: F_{k1} → F_{k2}`.
/// Draws with `h = k` are kept.
pub fn run_double_experiment(k1: usize, k2: usize, l: usize, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    check_params(k1, k2, l)?;
    cfg.decider.validate()?;
    let trials = run_trials(cfg, |index, seed, dc| {
        let start = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_endomorphism(k1, k2, l, cfg.lengths, &mut rng).expect("parameters checked");
        let p = random_endomorphism(k1, k2, l, cfg.lengths, &mut rng).expect("parameters checked");
        let h = random_word(k2, l, cfg.lengths, &mut rng).expect("parameters checked");
        let g = random_word(k2, l, cfg.lengths, &mut rng).expect("parameters checked");
        let (mut matrix, mut complexity) = (false, false);
        let mut error = None;
        let depth = match decide_doubly_auto(&f, &p, &h, &g, dc) {
            Ok(d) => {
                if let Verdict::Undecided(r) = &d.verdict {
                    classify(r, &mut matrix, &mut complexity);
                }
                d.depth
            }
            Err(e) => {
                complexity = true;
                error = Some(e.to_string());
                0
            }
        };
        let success = !matrix && !complexity;
        TrialRecord {
            index,
            seed,
            maps: vec![f.to_string(), p.to_string()],
            words: vec![h.to_string(), g.to_string()],
            outcome: if success { TrialOutcome::Success } else { TrialOutcome::Failure },
            matrix_failure: matrix,
            complexity_failure: complexity,
            depth: if success { depth.max(1) } else { depth },
            error,
            elapsed: start.elapsed(),
        }
    });
    Ok(report(ExperimentKind::Double, k1, k2, l, cfg, trials))
}

fn report(
    kind: ExperimentKind,
    k1: usize,
    k2: usize,
    l: usize,
    cfg: &ExperimentConfig,
    trials: Vec<TrialRecord>,
) -> ExperimentReport {
    let summary = SummaryRow::from_trials(k1, k2, l, &trials);
    ExperimentReport {
        kind,
        config: cfg.clone(),
        summary,
        trials: if cfg.keep_trials { trials } else { Vec::new() },
    }
}
