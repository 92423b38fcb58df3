//! surdforge — periodic continued fractions of √D, congruence-constrained
//! constructions, and rank lower-bound certificates, with exact arithmetic
//! throughout.
//!
//! Output is a human-readable summary by default and canonical JSON with
//! `--json`. Identical arguments always produce byte-identical output; the
//! census is additionally independent of its shard count. Errors go to
//! stderr as one structured JSON object.
//!
//! Exit codes: 0 success; 1 a theorem-guaranteed search failed (signals a
//! bug); 2 invalid input; 3 the parity condition rejects a user palindrome.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use serde_json::Value;

use surdforge_core::canonical;
use surdforge_core::{
    build_family, construct, construct_large_rank, enumerate_d, expand_sqrt, parity_condition,
    rank_lower_bound, sweep_with_coverage, ArithError, CensusReport, CfError, ConstructError,
    ConstructionCertificate, FamilyError, PalindromeSeq, RankBoundCertificate, SearchLimits,
    UValue,
};

const ENV_MAX_ATTEMPTS: &str = "SURDFORGE_MAX_ATTEMPTS";

#[derive(Parser)]
#[command(
    name = "surdforge",
    version,
    about = "Exact periodic continued fractions of sqrt(D)"
)]
struct Cli {
    /// Emit canonical JSON on stdout instead of a human-readable summary.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Expand sqrt(D) into [a0; (a1, ..., a_k)].
    Expand {
        /// The radicand; any non-square integer >= 2.
        #[arg(long, value_parser = parse_biguint)]
        d: BigUint,
    },
    /// Build the family D(b) = alpha*b^2 + beta*b + gamma of a palindrome
    /// and enumerate its verified members over a b range.
    Family {
        /// Comma-separated palindrome (a1,...,a_{k-1}); prescribes period k.
        #[arg(long, required = true, value_delimiter = ',', value_parser = parse_biguint)]
        palindrome: Vec<BigUint>,
        /// Inclusive b interval, lo:hi.
        #[arg(long, value_parser = parse_range)]
        b_range: (BigInt, BigInt),
    },
    /// Construct D ≡ residue (mod modulus) with the prescribed period
    /// length, verified by round-trip expansion.
    Construct {
        #[arg(long = "mod", value_parser = parse_biguint)]
        modulus: BigUint,
        #[arg(long, value_parser = parse_bigint, allow_hyphen_values = true)]
        residue: BigInt,
        /// Period length k; period 4 supports any modulus, other even k
        /// require an odd modulus.
        #[arg(long)]
        period: usize,
        /// Cap on the construction searches (default 10000 candidates,
        /// 65536 parity assignments).
        #[arg(long)]
        max_attempts: Option<u64>,
    },
    /// Construct D ≡ residue (mod modulus) whose certificate forces at
    /// least min-rank variables on every universal quadratic form over
    /// Z[sqrt(D)].
    ConstructRank {
        #[arg(long = "mod", value_parser = parse_biguint)]
        modulus: BigUint,
        #[arg(long, value_parser = parse_bigint, allow_hyphen_values = true)]
        residue: BigInt,
        /// Required lower bound on the number of variables.
        #[arg(long)]
        min_rank: u64,
        /// Even period length; 4 (the default) supports any modulus.
        #[arg(long, default_value_t = 4)]
        period: usize,
        #[arg(long)]
        max_attempts: Option<u64>,
    },
    /// Sweep every non-square 2 <= D <= max-d, validating the structural
    /// claims and reporting period statistics.
    Census {
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
        max_d: u64,
        /// Contiguous subranges processed in parallel; the report is
        /// identical for any value.
        #[arg(long)]
        shards: Option<usize>,
        /// Also write one CSV record per D to this path.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Track residues attained mod n by period-k members; repeatable,
        /// formatted k:n.
        #[arg(long = "coverage", value_parser = parse_pair)]
        coverage: Vec<(u64, u64)>,
    },
    /// Rank lower bounds for universal quadratic forms over Z[sqrt(D)].
    RankBound {
        #[arg(long, value_parser = parse_biguint)]
        d: BigUint,
    },
}

fn parse_biguint(s: &str) -> Result<BigUint, String> {
    s.parse()
        .map_err(|e| format!("invalid natural number: {e}"))
}

fn parse_bigint(s: &str) -> Result<BigInt, String> {
    s.parse().map_err(|e| format!("invalid integer: {e}"))
}

fn parse_range(s: &str) -> Result<(BigInt, BigInt), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected lo:hi")?;
    let lo = parse_bigint(lo)?;
    let hi = parse_bigint(hi)?;
    if lo > hi {
        return Err(format!("empty range {lo}:{hi}"));
    }
    Ok((lo, hi))
}

fn parse_pair(s: &str) -> Result<(u64, u64), String> {
    let (k, n) = s.split_once(':').ok_or("expected k:n")?;
    let k: u64 = k.parse().map_err(|e| format!("invalid k: {e}"))?;
    let n: u64 = n.parse().map_err(|e| format!("invalid n: {e}"))?;
    if k == 0 || n == 0 {
        return Err("k and n must be >= 1".to_string());
    }
    Ok((k, n))
}

/// A terminal failure: structured JSON on stderr plus the exit code.
struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

impl Failure {
    fn new(code: u8, kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            code,
            kind,
            message: message.into(),
        }
    }

    fn invalid(kind: &'static str, message: impl Into<String>) -> Self {
        Self::new(2, kind, message)
    }
}

impl From<CfError> for Failure {
    fn from(e: CfError) -> Self {
        let kind = match &e {
            CfError::DNotPositive => "d_not_positive",
            CfError::PerfectSquare(_) => "perfect_square",
            CfError::EmptySequence => "empty_sequence",
            CfError::MismatchAt { .. } => "expansion_mismatch",
        };
        match &e {
            CfError::MismatchAt { .. } => Failure::new(1, kind, e.to_string()),
            _ => Failure::invalid(kind, e.to_string()),
        }
    }
}

impl From<FamilyError> for Failure {
    fn from(e: FamilyError) -> Self {
        match &e {
            FamilyError::ParityConditionFails { .. } => {
                Failure::new(3, "parity_condition_fails", e.to_string())
            }
            FamilyError::NotAPalindrome => Failure::invalid("not_a_palindrome", e.to_string()),
            FamilyError::EntryZero => Failure::invalid("entry_zero", e.to_string()),
        }
    }
}

impl From<ConstructError> for Failure {
    fn from(e: ConstructError) -> Self {
        let (code, kind) = match &e {
            ConstructError::InvalidK(_) => (2, "invalid_k"),
            ConstructError::OddK { .. } => (2, "odd_k"),
            ConstructError::EvenN { .. } => (2, "even_n"),
            ConstructError::KnownObstruction { .. } => (2, "known_obstruction"),
            ConstructError::NotIntegral { .. } => (2, "not_integral"),
            ConstructError::ParitySearchExhausted { .. } => (1, "parity_search_exhausted"),
            ConstructError::SearchExhausted { .. } => (1, "search_exhausted"),
            ConstructError::Arith(inner) => {
                let kind = match inner {
                    ArithError::NotInvertible { .. } => "not_invertible",
                    ArithError::ModuliNotCoprime { .. } => "moduli_not_coprime",
                    ArithError::TooLargeToFactor { .. } => "too_large_to_factor",
                };
                (2, kind)
            }
        };
        Failure::new(code, kind, e.to_string())
    }
}

fn limits_from(flag: Option<u64>) -> Result<SearchLimits, Failure> {
    let cap = match flag {
        Some(cap) => Some(cap),
        None => match std::env::var(ENV_MAX_ATTEMPTS) {
            Ok(raw) => Some(raw.parse::<u64>().map_err(|e| {
                Failure::invalid(
                    "invalid_argument",
                    format!("{ENV_MAX_ATTEMPTS} must be a positive integer: {e}"),
                )
            })?),
            Err(_) => None,
        },
    };
    Ok(match cap {
        Some(cap) if cap > 0 => SearchLimits::with_cap(cap),
        Some(_) => {
            return Err(Failure::invalid(
                "invalid_argument",
                "attempt cap must be >= 1",
            ))
        }
        None => SearchLimits::default(),
    })
}

/// Verify the certificate's own checks; a failure here means a
/// theorem-guaranteed construction did not survive its round trip.
fn gate_certificate(cert: &ConstructionCertificate) -> Result<(), Failure> {
    if cert.all_checks_pass() {
        Ok(())
    } else {
        let failed: Vec<&str> = cert
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name)
            .collect();
        Err(Failure::new(
            1,
            "verification_failed",
            format!("certificate checks failed: {}", failed.join(", ")),
        ))
    }
}

fn print_json(value: &Value) {
    println!("{}", canonical::to_canonical_string(value));
}

fn fmt_period(period: &[BigUint]) -> String {
    let inner: Vec<String> = period.iter().map(|a| a.to_string()).collect();
    format!("({})", inner.join(", "))
}

fn print_certificate_human(cert: &ConstructionCertificate) {
    println!(
        "target: D ≡ {} (mod {}), period {}",
        cert.target_m, cert.target_n, cert.target_k
    );
    println!("palindrome = {}", fmt_period(cert.coefficients.entries()));
    println!(
        "family: alpha = {}, beta = {}, gamma = {}",
        cert.family.alpha, cert.family.beta, cert.family.gamma
    );
    println!("b = {}", cert.b);
    println!("D = {}", cert.d);
    println!(
        "sqrt(D) = [{}; {}]  (k = {})",
        cert.expansion.a0,
        fmt_period(&cert.expansion.period),
        cert.expansion.k()
    );
    for check in &cert.checks {
        println!(
            "  [{}] {}: {}",
            if check.passed { "ok" } else { "FAIL" },
            check.name,
            check.detail
        );
    }
}

fn print_rank_human(rank: &RankBoundCertificate) {
    println!("D = {}", rank.d);
    println!("k = {}", rank.k);
    match &rank.u {
        UValue::MaxOddIndexed(u) => println!("U = {u}"),
        UValue::SqrtOfD(d) => println!("U = sqrt({d})"),
    }
    println!("classical rank bound: r >= {}", rank.classical_bound);
    match &rank.general_bound {
        Some(g) => println!("general rank bound: r >= {g}"),
        None => println!("general rank bound: not applicable (U < 240)"),
    }
}

fn print_census_human(report: &CensusReport) {
    println!("range: [{}, {}]", report.lo, report.hi);
    let total: u64 = report.period_counts.iter().map(|(_, c)| c).sum();
    println!("non-square D examined: {total}");
    println!("period-length distribution:");
    for (k, count) in &report.period_counts {
        println!("  k = {k}: {count}");
    }
    for (k, n, set) in &report.residue_coverage {
        let residues: Vec<String> = set.iter().map(|r| r.to_string()).collect();
        println!(
            "residues mod {n} attained by period-{k} D: {{{}}}",
            residues.join(", ")
        );
    }
    if report.counterexamples.is_empty() {
        println!("counterexamples: none");
    } else {
        println!("counterexamples ({}):", report.counterexamples.len());
        for cx in &report.counterexamples {
            println!("  D = {}: {} ({})", cx.d, cx.claim, cx.detail);
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Expand { d } => {
            let expansion = expand_sqrt(&d)?;
            if cli.json {
                print_json(&canonical::expansion(&expansion));
            } else {
                println!("D = {}", expansion.d);
                println!("a0 = {}", expansion.a0);
                println!("period = {}", fmt_period(&expansion.period));
                println!("k = {}", expansion.k());
            }
            Ok(())
        }
        Command::Family {
            palindrome,
            b_range,
        } => {
            let seq = PalindromeSeq::new(palindrome)?;
            let parity = parity_condition(&seq);
            let family = build_family(&seq)?;
            let outcome = enumerate_d(&family, &seq, &b_range.0, &b_range.1);
            if cli.json {
                print_json(&canonical::enumeration(&seq, &parity, &family, &outcome));
            } else {
                println!(
                    "palindrome = {}  (k = {})",
                    fmt_period(seq.entries()),
                    seq.k()
                );
                println!(
                    "family: alpha = {}, beta = {}, gamma = {}  (discriminant {})",
                    family.alpha,
                    family.beta,
                    family.gamma,
                    family.discriminant()
                );
                println!("members in b = {}..{}:", b_range.0, b_range.1);
                for m in &outcome.emitted {
                    let sqf = match m.squarefree {
                        Some(true) => "squarefree",
                        Some(false) => "not squarefree",
                        None => "squarefree status unknown",
                    };
                    println!(
                        "  b = {}: D = {} = [{}; {}]  ({})",
                        m.b,
                        m.d,
                        m.expansion.a0,
                        fmt_period(&m.expansion.period),
                        sqf
                    );
                }
                for s in &outcome.skipped {
                    println!("  b = {}: skipped ({})", s.b, s.reason);
                }
            }
            Ok(())
        }
        Command::Construct {
            modulus,
            residue,
            period,
            max_attempts,
        } => {
            if modulus.is_zero() {
                return Err(Failure::invalid("invalid_argument", "--mod must be >= 1"));
            }
            let limits = limits_from(max_attempts)?;
            let cert = construct(&residue, &modulus, period, &limits)?;
            gate_certificate(&cert)?;
            if cli.json {
                print_json(&canonical::certificate(&cert));
            } else {
                print_certificate_human(&cert);
            }
            Ok(())
        }
        Command::ConstructRank {
            modulus,
            residue,
            min_rank,
            period,
            max_attempts,
        } => {
            if modulus.is_zero() {
                return Err(Failure::invalid("invalid_argument", "--mod must be >= 1"));
            }
            let limits = limits_from(max_attempts)?;
            let (cert, rank) = construct_large_rank(&residue, &modulus, min_rank, period, &limits)?;
            gate_certificate(&cert)?;
            if cli.json {
                let mut map = serde_json::Map::new();
                map.insert("certificate".to_string(), canonical::certificate(&cert));
                map.insert("rank_bound".to_string(), canonical::rank_certificate(&rank));
                print_json(&Value::Object(map));
            } else {
                print_certificate_human(&cert);
                print_rank_human(&rank);
            }
            Ok(())
        }
        Command::Census {
            max_d,
            shards,
            csv,
            coverage,
        } => {
            let shards = shards.unwrap_or_else(|| {
                std::thread::available_parallelism()
                    .map(|p| p.get())
                    .unwrap_or(1)
            });
            let report = match csv {
                Some(path) => {
                    let file = File::create(&path).map_err(|e| {
                        Failure::invalid(
                            "io_error",
                            format!("cannot write {}: {e}", path.display()),
                        )
                    })?;
                    let mut writer = BufWriter::new(file);
                    let report = surdforge_core::census::sweep_to_csv(
                        2,
                        max_d,
                        shards,
                        &coverage,
                        &mut writer,
                    )
                    .map_err(|e| Failure::new(1, "io_error", e.to_string()))?;
                    writer
                        .flush()
                        .map_err(|e| Failure::new(1, "io_error", e.to_string()))?;
                    report
                }
                None => sweep_with_coverage(2, max_d, shards, &coverage),
            };
            if cli.json {
                print_json(&canonical::census_report(&report));
            } else {
                print_census_human(&report);
            }
            if report.counterexamples.is_empty() {
                Ok(())
            } else {
                Err(Failure::new(
                    1,
                    "counterexamples_found",
                    format!("{} claim violations in range", report.counterexamples.len()),
                ))
            }
        }
        Command::RankBound { d } => {
            let rank = rank_lower_bound(&d)?;
            if cli.json {
                print_json(&canonical::rank_certificate(&rank));
            } else {
                print_rank_human(&rank);
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    // Die quietly on a closed pipe (e.g. `surdforge ... | head`).
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!(
                "{}",
                canonical::to_canonical_string(&canonical::error(failure.kind, &failure.message))
            );
            ExitCode::from(failure.code)
        }
    }
}
