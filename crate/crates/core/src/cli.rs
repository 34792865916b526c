//! Command-line front end.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufRead, Write};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::decider::{decide_doubly_auto, Decider, DeciderConfig, Decision, Verdict};
use crate::error::{Error, Result};
use crate::experiments::{run_double_experiment, run_single_experiment, to_csv, ExperimentConfig, LengthDistribution};
use crate::foxcalc::{fox_derivative, reidemeister_trace};
use crate::freegroup::{generator_name, Endomorphism, Word};
use crate::hall::{HallBasis, NilpotentElement};
use crate::nielsen::{nielsen_number, NielsenStatus};

/// Exit code for a decided or completed run.
pub const EXIT_OK: i32 = 0;
/// Exit code for errors, including malformed input.
pub const EXIT_ERROR: i32 = 1;
/// Exit code when some answer is undecided.
pub const EXIT_UNDECIDED: i32 = 2;

/// Environment variable supplying the default experiment seed.
pub const SEED_ENV: &str = "REIDEMEISTER_SEED";

#[derive(Debug, Parser)]
#[command(name = "reidemeister", version, about = "Twisted conjugacy and Nielsen numbers in free groups")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Lengths {
    /// Uniform over all reduced words of length at most l.
    ByWordCount,
    /// Length uniform in 1..=l first.
    UniformLength,
}

#[derive(Debug, Args)]
pub struct DeciderArgs {
    /// Highest nilpotency class to try.
    #[arg(long, default_value_t = 5)]
    pub depth_cap: u32,
    /// Longest brute-force candidate word (default: the current level).
    #[arg(long)]
    pub candidate_length_cap: Option<u32>,
    /// Truncation bound for structured candidate lists.
    #[arg(long, default_value_t = 2000)]
    pub max_candidates: usize,
    /// Use brute force instead of commutator insertion at level 2.
    #[arg(long)]
    pub no_level2_forms: bool,
    /// Search radius when the domain is cyclic.
    #[arg(long, default_value_t = 64)]
    pub rank1_search: u32,
}

impl DeciderArgs {
    fn config(&self) -> DeciderConfig {
        DeciderConfig {
            depth_cap: self.depth_cap,
            candidate_length_cap: self.candidate_length_cap,
            level2_forms: !self.no_level2_forms,
            max_candidates: self.max_candidates,
            rank1_search: self.rank1_search,
            deadline: None,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Is h = φ(z) g z^-1 for some z?
    Tc {
        #[arg(long)]
        rank: usize,
        /// Map as `a=word, b=word, ...`.
        #[arg(long)]
        map: String,
        #[arg(long, required_unless_present = "batch")]
        g: Option<String>,
        #[arg(long, required_unless_present = "batch")]
        h: Option<String>,
        /// Read `g h` pairs, one per line, from stdin.
        #[arg(long, conflicts_with_all = ["g", "h"])]
        batch: bool,
        #[command(flatten)]
        decider: DeciderArgs,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Is h = φ(z) k ψ(z)^-1 for some z?
    Dtc {
        /// Rank of the domain group.
        #[arg(long)]
        domain_rank: usize,
        /// Rank of the codomain group (holding h and k).
        #[arg(long)]
        rank: usize,
        #[arg(long)]
        phi: String,
        #[arg(long)]
        psi: String,
        #[arg(long)]
        h: String,
        #[arg(long)]
        k: String,
        #[command(flatten)]
        decider: DeciderArgs,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Nielsen number from the Reidemeister trace.
    Nielsen {
        #[arg(long)]
        rank: usize,
        #[arg(long)]
        map: String,
        #[command(flatten)]
        decider: DeciderArgs,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Hall normal form of a word in the free nilpotent quotient.
    Hallform {
        #[arg(long)]
        rank: usize,
        #[arg(long)]
        class: u32,
        #[arg(long)]
        word: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Reidemeister trace of a map, or Fox derivatives of a word.
    Fox {
        #[arg(long)]
        rank: usize,
        #[arg(long, required_unless_present = "word")]
        map: Option<String>,
        #[arg(long, conflicts_with = "map")]
        word: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Monte Carlo success rates over random maps.
    Experiment {
        /// Rank for single-map experiments (Nielsen numbers).
        #[arg(long, conflicts_with_all = ["k1", "k2"], required_unless_present_all = ["k1", "k2"])]
        k: Option<usize>,
        /// Domain rank for doubly twisted experiments.
        #[arg(long, requires = "k2")]
        k1: Option<usize>,
        /// Codomain rank for doubly twisted experiments.
        #[arg(long, requires = "k1")]
        k2: Option<usize>,
        /// Maximum word length; a comma list gives one row each.
        #[arg(long, value_delimiter = ',', required = true)]
        l: Vec<usize>,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, env = SEED_ENV, default_value_t = 0)]
        seed: u64,
        /// Per-trial wall clock budget in seconds.
        #[arg(long, default_value_t = 30.0)]
        timeout: f64,
        #[arg(long, value_enum, default_value_t = Lengths::UniformLength)]
        lengths: Lengths,
        /// Write one JSON line per trial to this file.
        #[arg(long)]
        log: Option<std::path::PathBuf>,
        /// Include every trial in JSON output.
        #[arg(long)]
        per_trial: bool,
        #[command(flatten)]
        decider: DeciderArgs,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

fn undecided_code(any: bool) -> i32 {
    if any {
        EXIT_UNDECIDED
    } else {
        EXIT_OK
    }
}

fn json_line(out: &mut dyn Write, v: &serde_json::Value) -> Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(v).expect("json values serialize")).map_err(io_err)
}

fn io_err(e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::BrokenPipe {
        Error::OutputClosed
    } else {
        Error::Io(e.to_string())
    }
}

fn decision_csv(d: &Decision) -> String {
    let (kind, level, witness) = match &d.verdict {
        Verdict::Distinct { level } => ("distinct", level.to_string(), String::new()),
        Verdict::Conjugate { witness } => ("conjugate", String::new(), witness.to_string()),
        Verdict::Undecided(r) => ("undecided", r.level().map(|l| l.to_string()).unwrap_or_default(), String::new()),
    };
    let reason = match &d.verdict {
        Verdict::Undecided(r) => r.name(),
        _ => "",
    };
    format!("{kind},{reason},{level},{witness},{}", d.depth)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    match dispatch(cli.command, input, out) {
        Ok(code) => code,
        Err(Error::OutputClosed) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn dispatch(cmd: Command, input: &mut dyn BufRead, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Tc {
            rank,
            map,
            g,
            h,
            batch,
            decider,
            format,
        } => {
            let f = Endomorphism::parse(rank, rank, &map)?;
            let d = Decider::twisted(&f, &decider.config())?;
            let mut pairs = Vec::new();
            if batch {
                for (n, line) in input.lines().enumerate() {
                    let line = line.map_err(io_err)?;
                    let line = line.trim();
                    if line.is_empty() || line.starts_with('#') {
                        continue;
                    }
                    let parts: Vec<&str> = line.split_whitespace().collect();
                    if parts.len() != 2 {
                        return Err(Error::InvalidArgument(format!(
                            "line {}: expected two words `g h`, got {:?}",
                            n + 1,
                            line
                        )));
                    }
                    pairs.push((Word::parse(rank, parts[0])?, Word::parse(rank, parts[1])?));
                }
            } else {
                let (g, h) = (g.expect("required by clap"), h.expect("required by clap"));
                pairs.push((Word::parse(rank, &g)?, Word::parse(rank, &h)?));
            }
            let mut any_undecided = false;
            let mut results = Vec::new();
            if format == Format::Csv {
                writeln!(out, "g,h,verdict,reason,level,witness,depth").map_err(io_err)?;
            }
            for (g, h) in &pairs {
                let dec = d.decide(h, g)?;
                any_undecided |= !dec.verdict.is_decided();
                match format {
                    Format::Text if batch => writeln!(out, "{g} {h} {}", dec.verdict).map_err(io_err)?,
                    Format::Text => writeln!(out, "{}", dec.verdict).map_err(io_err)?,
                    Format::Csv => writeln!(out, "{},{},{}", csv_field(&g.to_string()), csv_field(&h.to_string()), decision_csv(&dec))
                        .map_err(io_err)?,
                    Format::Json => results.push(json!({
                        "map": f.to_string(),
                        "g": g.to_string(),
                        "h": h.to_string(),
                        "decision": dec,
                    })),
                }
            }
            if format == Format::Json {
                let v = if batch {
                    serde_json::Value::Array(results)
                } else {
                    results.pop().expect("one pair")
                };
                json_line(out, &v)?;
            }
            Ok(undecided_code(any_undecided))
        }
        Command::Dtc {
            domain_rank,
            rank,
            phi,
            psi,
            h,
            k,
            decider,
            format,
        } => {
            let f = Endomorphism::parse(domain_rank, rank, &phi)?;
            let p = Endomorphism::parse(domain_rank, rank, &psi)?;
            let (h, k) = (Word::parse(rank, &h)?, Word::parse(rank, &k)?);
            let dec = decide_doubly_auto(&f, &p, &h, &k, &decider.config())?;
            match format {
                Format::Text => writeln!(out, "{}", dec.verdict).map_err(io_err)?,
                Format::Csv => {
                    writeln!(out, "h,k,verdict,reason,level,witness,depth").map_err(io_err)?;
                    writeln!(out, "{},{},{}", csv_field(&h.to_string()), csv_field(&k.to_string()), decision_csv(&dec))
                        .map_err(io_err)?;
                }
                Format::Json => json_line(
                    out,
                    &json!({
                        "phi": f.to_string(),
                        "psi": p.to_string(),
                        "h": h.to_string(),
                        "k": k.to_string(),
                        "decision": dec,
                    }),
                )?,
            }
            Ok(undecided_code(!dec.verdict.is_decided()))
        }
        Command::Nielsen {
            rank,
            map,
            decider,
            format,
        } => {
            let f = Endomorphism::parse(rank, rank, &map)?;
            let r = nielsen_number(&f, &decider.config())?;
            match format {
                Format::Text => writeln!(out, "{r}").map_err(io_err)?,
                Format::Csv => {
                    writeln!(out, "map,kind,lower_bound,upper_bound,unresolved,max_level").map_err(io_err)?;
                    let (kind, lo, hi) = match r.status {
                        NielsenStatus::Exact { value } => ("exact", value, value),
                        NielsenStatus::Partial {
                            lower_bound,
                            upper_bound,
                        } => ("partial", lower_bound, upper_bound),
                    };
                    writeln!(
                        out,
                        "{},{kind},{lo},{hi},{},{}",
                        csv_field(&f.to_string()),
                        r.unresolved.len(),
                        r.max_level
                    )
                    .map_err(io_err)?;
                }
                Format::Json => json_line(out, &json!({ "map": f.to_string(), "result": r }))?,
            }
            Ok(undecided_code(!r.is_exact()))
        }
        Command::Hallform {
            rank,
            class,
            word,
            format,
        } => {
            let w = Word::parse(rank, &word)?;
            let basis = HallBasis::new(rank, class)?;
            let e = NilpotentElement::collect(&w, &basis)?;
            match format {
                Format::Text => writeln!(out, "{e}").map_err(io_err)?,
                Format::Csv => {
                    writeln!(out, "index,commutator,weight,exponent").map_err(io_err)?;
                    for (i, x) in e.exponents().iter().enumerate() {
                        writeln!(out, "{},{},{},{x}", i + 1, csv_field(&basis.name(i)), basis.weight(i)).map_err(io_err)?;
                    }
                }
                Format::Json => {
                    let entries: Vec<_> = e
                        .exponents()
                        .iter()
                        .enumerate()
                        .map(|(i, x)| json!({ "commutator": basis.name(i), "weight": basis.weight(i), "exponent": x.to_string() }))
                        .collect();
                    json_line(
                        out,
                        &json!({ "word": w.to_string(), "rank": rank, "class": class, "normal_form": e.to_string(), "exponents": entries }),
                    )?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Fox {
            rank,
            map,
            word,
            format,
        } => {
            let rows: Vec<(String, crate::foxcalc::GroupRingElement)> = match (map, word) {
                (Some(m), _) => {
                    let f = Endomorphism::parse(rank, rank, &m)?;
                    vec![("RT".to_string(), reidemeister_trace(&f)?)]
                }
                (None, Some(w)) => {
                    let w = Word::parse(rank, &w)?;
                    (0..rank)
                        .map(|i| Ok((format!("d/d{}", generator_name(rank, i)), fox_derivative(&w, i)?)))
                        .collect::<Result<_>>()?
                }
                (None, None) => unreachable!("required by clap"),
            };
            match format {
                Format::Text => {
                    for (name, x) in &rows {
                        writeln!(out, "{name} = {x}").map_err(io_err)?;
                    }
                }
                Format::Csv => {
                    writeln!(out, "element,term,coefficient").map_err(io_err)?;
                    for (name, x) in &rows {
                        for (w, c) in x.terms() {
                            writeln!(out, "{name},{},{c}", csv_field(&w.to_string())).map_err(io_err)?;
                        }
                    }
                }
                Format::Json => {
                    let v: Vec<_> = rows
                        .iter()
                        .map(|(name, x)| {
                            let terms: Vec<_> = x
                                .terms()
                                .map(|(w, c)| json!({ "word": w.to_string(), "coefficient": c.to_string() }))
                                .collect();
                            json!({ "element": name, "value": x.to_string(), "terms": terms })
                        })
                        .collect();
                    json_line(out, &serde_json::Value::Array(v))?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Experiment {
            k,
            k1,
            k2,
            l,
            trials,
            seed,
            timeout,
            lengths,
            log,
            per_trial,
            decider,
            format,
        } => {
            if !(timeout.is_finite() && timeout > 0.0) {
                return Err(Error::InvalidArgument(format!("timeout must be positive, got {timeout}")));
            }
            let cfg = ExperimentConfig {
                trials,
                base_seed: seed,
                lengths: match lengths {
                    Lengths::ByWordCount => LengthDistribution::ByWordCount,
                    Lengths::UniformLength => LengthDistribution::UniformLength,
                },
                timeout: Duration::from_secs_f64(timeout),
                decider: decider.config(),
                keep_trials: per_trial || log.is_some(),
            };
            let mut reports = Vec::new();
            for &len in &l {
                reports.push(match (k, k1, k2) {
                    (Some(k), _, _) => run_single_experiment(k, len, &cfg)?,
                    (None, Some(a), Some(b)) => run_double_experiment(a, b, len, &cfg)?,
                    _ => unreachable!("required by clap"),
                });
            }
            if let Some(path) = &log {
                let mut file = File::create(path).map_err(io_err)?;
                for r in &reports {
                    file.write_all(r.trial_log().as_bytes()).map_err(io_err)?;
                }
            }
            if !per_trial {
                for r in &mut reports {
                    r.trials.clear();
                }
            }
            let rows: Vec<_> = reports.iter().map(|r| r.summary.clone()).collect();
            match format {
                Format::Csv => write!(out, "{}", to_csv(&rows)).map_err(io_err)?,
                Format::Json => json_line(out, &serde_json::to_value(&reports).expect("reports serialize"))?,
                Format::Text => {
                    for r in &rows {
                        writeln!(
                            out,
                            "k1={} k2={} l={} trials={} success={:.2}% matrix-failure={:.2}% complexity-failure={:.2}% depth={:.3} sd={:.3}",
                            r.k1,
                            r.k2,
                            r.l,
                            r.trials,
                            r.success_pct,
                            r.matrix_failure_pct,
                            r.complexity_failure_pct,
                            r.avg_depth,
                            r.depth_sd
                        )
                        .map_err(io_err)?;
                    }
                }
            }
            Ok(EXIT_OK)
        }
    }
}
