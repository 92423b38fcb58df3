//! Sharded exhaustive sweeps over D validating the structural claims.
//!
//! A sweep expands every non-square D in a range on the u64 fast path and
//! checks, per D: the closing coefficient a_k = 2a0, the palindromic prefix,
//! the period-1 ⟺ D = t² + 1 equivalence, and — for odd periods — that no
//! prime ≡ 3 (mod 4) divides D. Divisibility is decided completely: a
//! segmented residual sieve divides out every prime below √hi, so the one
//! possible remaining factor is itself prime and its residue class is read
//! directly. (Restricting the sieve to primes ≡ 3 (mod 4) would miss large
//! prime divisors such as 7919 | 39595.)
//!
//! Shards are contiguous subranges processed independently and merged in
//! range order, so every report is byte-identical regardless of shard count.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, Write};

use rayon::prelude::*;

use crate::arith::{isqrt_u64, small_primes};
use crate::cf::{is_palindrome, scan_sqrt_u64};

/// Largest supported sweep bound; keeps the prime table for the residual
/// sieve within [`crate::arith::TRIAL_DIVISION_LIMIT`].
pub const SWEEP_LIMIT: u64 = 1_000_000_000_000;

/// Per-D census data, derived purely from the expansion and the residual
/// sieve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusRecord {
    pub d: u64,
    pub k: usize,
    /// max(a1, a3, …, a_{k-1}); even k only.
    pub max_odd_coeff: Option<u64>,
    /// Smallest prime ≡ 3 (mod 4) dividing D, if any.
    pub prime3mod4_divisor: Option<u64>,
    pub squarefree: bool,
}

impl CensusRecord {
    pub fn k_is_odd(&self) -> bool {
        self.k % 2 == 1
    }

    /// One CSV row: `D,k,k_parity,max_odd_coeff,prime3mod4_divisor,squarefree`
    /// with empty fields where not applicable.
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.d,
            self.k,
            if self.k_is_odd() { "odd" } else { "even" },
            self.max_odd_coeff
                .map(|m| m.to_string())
                .unwrap_or_default(),
            self.prime3mod4_divisor
                .map(|p| p.to_string())
                .unwrap_or_default(),
            self.squarefree,
        )
    }
}

pub const CSV_HEADER: &str = "D,k,k_parity,max_odd_coeff,prime3mod4_divisor,squarefree";

/// A violated claim, with the D that violated it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub d: u64,
    pub claim: &'static str,
    pub detail: String,
}

/// Aggregate sweep output. Identical for any shard count over the same
/// range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusReport {
    pub lo: u64,
    pub hi: u64,
    /// (period length, number of D attaining it), sorted by period length.
    pub period_counts: Vec<(usize, u64)>,
    /// Empty iff every claim holds on the range.
    pub counterexamples: Vec<Counterexample>,
    /// (k, n, residues attained by {D in range : period(D) = k} mod n).
    pub residue_coverage: Vec<(u64, u64, BTreeSet<u64>)>,
}

struct ShardOutput {
    counts: BTreeMap<usize, u64>,
    counterexamples: Vec<Counterexample>,
    coverage: Vec<BTreeSet<u64>>,
    csv: String,
    records: Vec<CensusRecord>,
}

fn odd_period_counterexample(record: &CensusRecord) -> Option<Counterexample> {
    match (record.k_is_odd(), record.prime3mod4_divisor) {
        (true, Some(p)) => Some(Counterexample {
            d: record.d,
            claim: "odd_period_divisibility",
            detail: format!(
                "period length {} is odd but {} ≡ 3 (mod 4) divides D",
                record.k, p
            ),
        }),
        _ => None,
    }
}

/// Flag every odd-period record divisible by a prime ≡ 3 (mod 4).
/// Expected empty on genuine sweep output.
pub fn check_odd_period_divisibility(records: &[CensusRecord]) -> Vec<Counterexample> {
    records
        .iter()
        .filter_map(odd_period_counterexample)
        .collect()
}

fn process_range(
    lo: u64,
    hi: u64,
    prime_limit: u64,
    pairs: &[(u64, u64)],
    want_csv: bool,
    want_records: bool,
) -> ShardOutput {
    let mut out = ShardOutput {
        counts: BTreeMap::new(),
        counterexamples: Vec::new(),
        coverage: vec![BTreeSet::new(); pairs.len()],
        csv: String::new(),
        records: Vec::new(),
    };
    if lo > hi {
        return out;
    }

    // Segmented residual sieve: divide out all primes ≤ prime_limit; what
    // remains per D is 1 or a single prime above the limit.
    let len = (hi - lo + 1) as usize;
    let mut residual: Vec<u64> = (lo..=hi).collect();
    let mut square_divided = vec![false; len];
    let mut div3mod4 = vec![0u64; len];
    for &p in small_primes() {
        let p = p as u64;
        if p > prime_limit {
            break;
        }
        let mut multiple = lo.div_ceil(p) * p;
        while multiple <= hi {
            let idx = (multiple - lo) as usize;
            let mut exp = 0u32;
            while residual[idx].is_multiple_of(p) {
                residual[idx] /= p;
                exp += 1;
            }
            if exp >= 2 {
                square_divided[idx] = true;
            }
            if p % 4 == 3 && div3mod4[idx] == 0 {
                div3mod4[idx] = p;
            }
            multiple += p;
        }
    }
    for idx in 0..len {
        let r = residual[idx];
        if r > 1 && r % 4 == 3 && div3mod4[idx] == 0 {
            div3mod4[idx] = r;
        }
    }

    let mut buf = Vec::new();
    for d in lo..=hi {
        let Some(a0) = scan_sqrt_u64(d, &mut buf) else {
            continue; // perfect square or d < 2
        };
        let k = buf.len();
        let idx = (d - lo) as usize;

        if *buf.last().expect("non-empty period") != 2 * a0 {
            out.counterexamples.push(Counterexample {
                d,
                claim: "closing_coefficient",
                detail: format!("a_k = {} but 2*a0 = {}", buf.last().unwrap(), 2 * a0),
            });
        }
        if !is_palindrome(&buf[..k - 1]) {
            out.counterexamples.push(Counterexample {
                d,
                claim: "palindrome",
                detail: "(a1, …, a_{k-1}) is not palindromic".to_string(),
            });
        }
        let t_form = isqrt_u64(d - 1).1;
        if (k == 1) != t_form {
            out.counterexamples.push(Counterexample {
                d,
                claim: "period_one_form",
                detail: format!("period 1 must coincide with D = t^2 + 1; k = {k}"),
            });
        }

        let record = CensusRecord {
            d,
            k,
            max_odd_coeff: (k % 2 == 0).then(|| buf.iter().step_by(2).max().copied().unwrap()),
            prime3mod4_divisor: (div3mod4[idx] != 0).then_some(div3mod4[idx]),
            squarefree: !square_divided[idx],
        };
        if let Some(cx) = odd_period_counterexample(&record) {
            out.counterexamples.push(cx);
        }

        *out.counts.entry(k).or_insert(0) += 1;
        for (slot, &(pk, pn)) in out.coverage.iter_mut().zip(pairs) {
            if k as u64 == pk {
                slot.insert(d % pn);
            }
        }
        if want_csv {
            out.csv.push_str(&record.csv_row());
            out.csv.push('\n');
        }
        if want_records {
            out.records.push(record);
        }
    }
    out
}

fn shard_bounds(lo: u64, hi: u64, shards: usize) -> Vec<(u64, u64)> {
    let shards = shards.max(1) as u64;
    let len = hi - lo + 1;
    let base = len / shards;
    let extra = len % shards;
    let mut bounds = Vec::new();
    let mut start = lo;
    for i in 0..shards {
        let size = base + u64::from(i < extra);
        if size == 0 {
            continue;
        }
        bounds.push((start, start + size - 1));
        start += size;
    }
    bounds
}

fn run_sweep(
    lo: u64,
    hi: u64,
    shards: usize,
    pairs: &[(u64, u64)],
    mut csv_writer: Option<&mut dyn Write>,
) -> io::Result<CensusReport> {
    assert!(2 <= lo && lo <= hi, "sweep requires 2 <= lo <= hi");
    assert!(hi <= SWEEP_LIMIT, "sweep supports hi <= {SWEEP_LIMIT}");
    let prime_limit = isqrt_u64(hi).0;
    let want_csv = csv_writer.is_some();

    let outputs: Vec<ShardOutput> = shard_bounds(lo, hi, shards)
        .into_par_iter()
        .map(|(a, b)| process_range(a, b, prime_limit, pairs, want_csv, false))
        .collect();

    let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
    let mut counterexamples = Vec::new();
    let mut coverage = vec![BTreeSet::new(); pairs.len()];
    if let Some(w) = csv_writer.as_mut() {
        writeln!(w, "{CSV_HEADER}")?;
    }
    for shard in outputs {
        for (k, c) in shard.counts {
            *counts.entry(k).or_insert(0) += c;
        }
        counterexamples.extend(shard.counterexamples);
        for (merged, part) in coverage.iter_mut().zip(shard.coverage) {
            merged.extend(part);
        }
        if let Some(w) = csv_writer.as_mut() {
            w.write_all(shard.csv.as_bytes())?;
        }
    }
    Ok(CensusReport {
        lo,
        hi,
        period_counts: counts.into_iter().collect(),
        counterexamples,
        residue_coverage: pairs
            .iter()
            .zip(coverage)
            .map(|(&(k, n), set)| (k, n, set))
            .collect(),
    })
}

/// Sweep [lo, hi], skipping perfect squares. The report is independent of
/// the shard count.
pub fn sweep(lo: u64, hi: u64, shards: usize) -> CensusReport {
    run_sweep(lo, hi, shards, &[], None).expect("no I/O without a CSV writer")
}

/// Sweep and additionally record, for each requested (k, n), the residue
/// classes mod n attained by period-k members of the range.
pub fn sweep_with_coverage(lo: u64, hi: u64, shards: usize, pairs: &[(u64, u64)]) -> CensusReport {
    run_sweep(lo, hi, shards, pairs, None).expect("no I/O without a CSV writer")
}

/// Sweep while streaming one CSV record per non-square D to `writer`.
pub fn sweep_to_csv<W: Write>(
    lo: u64,
    hi: u64,
    shards: usize,
    pairs: &[(u64, u64)],
    writer: &mut W,
) -> io::Result<CensusReport> {
    run_sweep(lo, hi, shards, pairs, Some(writer))
}

/// Residue classes mod n attained by {D ≤ hi : period(D) = k}.
pub fn residue_coverage(k: u64, n: u64, hi: u64) -> BTreeSet<u64> {
    assert!(k >= 1 && n >= 1);
    let shards = std::thread::available_parallelism()
        .map(|p| p.get())
        .unwrap_or(1);
    let report = sweep_with_coverage(2, hi, shards, &[(k, n)]);
    let (_, _, set) = report
        .residue_coverage
        .into_iter()
        .next()
        .expect("one pair requested");
    set
}

/// Census records for a range, in D order. Intended for spot checks and
/// small ranges; the sweeps above aggregate without retaining records.
pub fn records_in_range(lo: u64, hi: u64) -> Vec<CensusRecord> {
    assert!(2 <= lo && lo <= hi && hi <= SWEEP_LIMIT);
    let prime_limit = isqrt_u64(hi).0;
    process_range(lo, hi, prime_limit, &[], false, true).records
}

/// The record of a single D, or `None` for squares and D < 2.
pub fn record_for(d: u64) -> Option<CensusRecord> {
    if d < 2 {
        return None;
    }
    records_in_range(d, d).into_iter().next()
}
