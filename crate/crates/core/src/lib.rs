//! Exact arithmetic for periodic continued fractions of √D.
//!
//! The library computes the periodic expansion √D = [a₀; a₁, …, a_k] with
//! exact integer arithmetic, constructs D lying in a prescribed congruence
//! class with a prescribed even period length, and derives lower bounds on
//! the rank of universal quadratic forms over ℤ[√D] from the expansion.
//! Every constructed D is verified by an independent round-trip expansion
//! before it is emitted.
//!
//! Module map:
//! - [`arith`] — bigint square roots, modular inverses, CRT, trial-division
//!   factorization.
//! - [`cf`] — the √D expansion engine, convergent tables, round-trip
//!   verification.
//! - [`friesen`] — Friesen families D(b) = αb² + βb + γ realizing a
//!   prescribed palindromic period.
//! - [`congruence`] — constructors for D ≡ m (mod n) with period 4 or any
//!   even period length (odd n).
//! - [`rank`] — rank lower-bound certificates and large-rank constructions.
//! - [`census`] — sharded exhaustive sweeps validating the structural claims
//!   over ranges of D.
//! - [`canonical`] — canonical JSON serialization of certificates and
//!   reports.

pub mod arith;
pub mod canonical;
pub mod census;
pub mod cf;
pub mod congruence;
pub mod friesen;
pub mod rank;

pub use arith::{crt, factorize, isqrt, mod_inv, ArithError, PrimePowerFactorization};
pub use census::{
    check_odd_period_divisibility, residue_coverage, sweep, sweep_with_coverage, CensusRecord,
    CensusReport, Counterexample,
};
pub use cf::{
    convergents, expand_sqrt, is_palindrome, verify_expansion, CfError, ConvergentTable,
    SurdExpansion, VerificationReport,
};
pub use congruence::{
    choose_coeff_residues, construct, construct_mod_n, period4_construct, period4_d,
    reject_unsupported, Check, ConstructError, ConstructionCertificate, ConstructionRoute,
    ResidueAssignment, ResidueCase, SearchLimits,
};
pub use friesen::{
    build_family, enumerate_d, parity_condition, EmittedMember, EnumerationOutcome, FamilyError,
    FriesenFamily, PalindromeSeq, ParityCase, ParityCheck, ParityWitness, SkipReason,
    SkippedCandidate,
};
pub use rank::{construct_large_rank, rank_lower_bound, RankBoundCertificate, UValue};
