//! Quadratic families D(b) = αb² + βb + γ realizing a prescribed palindrome.
//!
//! Friesen's theorem: for a symmetric sequence of positive integers
//! (a1, …, a_{k-1}) there are infinitely many D with
//! √D = [a0; a1, …, a_{k-1}, 2a0] exactly when q_{k-2} is even or
//! (q_{k-2}² − (−1)^k)/q_{k-1} is even, and the solutions are the integral
//! values of a quadratic polynomial in b whose coefficients depend only on
//! q_{k-1} and q_{k-2}. When both quantities are odd there are no solutions
//! at all.
//!
//! γ (and, before simplification, β) involves the term q_{k-2}²/4, so the
//! coefficients are carried as exact rationals; D(b) is evaluated exactly
//! and only integral, positive, non-square values that survive a round-trip
//! expansion are emitted.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::arith::squarefree_status;
use crate::cf::{expand_sqrt, is_palindrome, palindrome_q_pair, SurdExpansion};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FamilyError {
    #[error("sequence is not a palindrome")]
    NotAPalindrome,
    #[error("palindrome entries must be positive")]
    EntryZero,
    #[error(
        "parity condition fails: q_{{k-2}} = {q_km2} and (q_{{k-2}}^2 - (-1)^k)/q_{{k-1}} = {quotient} are both odd, so no D realizes this palindrome"
    )]
    ParityConditionFails { q_km2: BigUint, quotient: BigUint },
}

/// A symmetric sequence of positive integers (a1, …, a_{k-1}); the empty
/// sequence seeds the period-1 family D = b² + 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PalindromeSeq {
    entries: Vec<BigUint>,
}

impl PalindromeSeq {
    pub fn new(entries: Vec<BigUint>) -> Result<Self, FamilyError> {
        if entries.iter().any(|e| e.is_zero()) {
            return Err(FamilyError::EntryZero);
        }
        if !is_palindrome(&entries) {
            return Err(FamilyError::NotAPalindrome);
        }
        Ok(Self { entries })
    }

    /// Mirror the independent half (a1, …, a_{k/2}) of an even-k palindrome.
    pub fn from_half(k: usize, half: &[BigUint]) -> Self {
        assert!(k >= 2 && k.is_multiple_of(2) && half.len() == k / 2);
        assert!(half.iter().all(|e| !e.is_zero()));
        let mut entries = half.to_vec();
        entries.extend(half.iter().rev().skip(1).cloned());
        debug_assert_eq!(entries.len(), k - 1);
        Self { entries }
    }

    pub fn entries(&self) -> &[BigUint] {
        &self.entries
    }

    /// The period length k this palindrome prescribes.
    pub fn k(&self) -> usize {
        self.entries.len() + 1
    }
}

/// Which quantity witnessed the parity condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParityWitness {
    QKm2Even,
    QuotientEven,
}

/// Outcome of the solvability test, with the convergent denominators it was
/// read from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCheck {
    pub satisfiable: bool,
    pub q_km1: BigUint,
    pub q_km2: BigUint,
    /// (q_{k-2}² − (−1)^k) / q_{k-1}; the division is exact for palindromes.
    pub quotient: BigUint,
    pub witness: Option<ParityWitness>,
}

/// Parity of q_{k-1}, which selects the coefficient formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParityCase {
    QOdd,
    QEven,
}

/// The family D(b) = αb² + βb + γ for one palindrome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FriesenFamily {
    pub alpha: BigRational,
    pub beta: BigRational,
    pub gamma: BigRational,
    pub q_km1: BigUint,
    pub q_km2: BigUint,
    pub parity_case: ParityCase,
    pub k: usize,
}

impl FriesenFamily {
    /// β² − 4αγ; always one of 1, −1, 4, −4.
    pub fn discriminant(&self) -> BigRational {
        &self.beta * &self.beta
            - BigRational::from_integer(BigInt::from(4)) * &self.alpha * &self.gamma
    }

    pub fn evaluate(&self, b: &BigInt) -> BigRational {
        let b = BigRational::from_integer(b.clone());
        (&self.alpha * &b + &self.beta) * &b + &self.gamma
    }

    /// β with its (already trivial) denominator cleared: the numerator of the
    /// reduced rational.
    pub fn beta_numerator(&self) -> BigInt {
        self.beta.numer().clone()
    }
}

fn sigma(k: usize) -> BigInt {
    if k.is_multiple_of(2) {
        BigInt::one()
    } else {
        -BigInt::one()
    }
}

/// Numerator of the parity quotient, q_{k-2}² − (−1)^k, as an unsigned value.
fn quotient_numerator(q_km2: &BigUint, k: usize) -> BigUint {
    let sq = q_km2 * q_km2;
    if k.is_multiple_of(2) {
        // q_{k-2} >= 1 for k >= 2; for k = 1 the parity branch is odd.
        sq - BigUint::one()
    } else {
        sq + BigUint::one()
    }
}

/// Decide whether any D realizes the palindrome.
///
/// Satisfiable iff q_{k-2} is even or (q_{k-2}² − (−1)^k)/q_{k-1} is even.
pub fn parity_condition(p: &PalindromeSeq) -> ParityCheck {
    let (q_km1, q_km2) = palindrome_q_pair(p.entries());
    let numerator = quotient_numerator(&q_km2, p.k());
    assert!(
        (&numerator % &q_km1).is_zero(),
        "q_{{k-1}} = {q_km1} does not divide q_{{k-2}}^2 - (-1)^k = {numerator}; input is not a palindrome"
    );
    let quotient = numerator / &q_km1;
    let witness = if q_km2.is_even() {
        Some(ParityWitness::QKm2Even)
    } else if quotient.is_even() {
        Some(ParityWitness::QuotientEven)
    } else {
        None
    };
    ParityCheck {
        satisfiable: witness.is_some(),
        q_km1,
        q_km2,
        quotient,
        witness,
    }
}

/// Build the family for a palindrome passing the parity condition.
///
/// With σ = (−1)^k and q = q_{k-2}:
///
/// ```text
/// q_{k-1} odd:   α = q_{k-1}²        β = 2q − σ·q(q² − σ)
/// q_{k-1} even:  α = q_{k-1}²/4      β = (2q − σ·q(q² − σ))/2
/// both cases:    γ = (q²/4 − σ)(q² − σ)² / q_{k-1}²
/// ```
pub fn build_family(p: &PalindromeSeq) -> Result<FriesenFamily, FamilyError> {
    let check = parity_condition(p);
    if !check.satisfiable {
        return Err(FamilyError::ParityConditionFails {
            q_km2: check.q_km2,
            quotient: check.quotient,
        });
    }
    let k = p.k();
    let s = sigma(k);
    let q1 = BigInt::from(check.q_km1.clone());
    let q2 = BigInt::from(check.q_km2.clone());
    let q2_sq = &q2 * &q2;

    let alpha_full = BigRational::from_integer(&q1 * &q1);
    let beta_full = BigRational::from_integer(BigInt::from(2) * &q2 - &s * &q2 * (&q2_sq - &s));
    let gamma = (BigRational::new(q2_sq.clone(), BigInt::from(4))
        - BigRational::from_integer(s.clone()))
        * BigRational::from_integer((&q2_sq - &s) * (&q2_sq - &s))
        / BigRational::from_integer(&q1 * &q1);

    let even_q1 = check.q_km1.is_even();
    let (alpha, beta, parity_case) = if even_q1 {
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        (
            alpha_full * &half * &half,
            beta_full * half,
            ParityCase::QEven,
        )
    } else {
        (alpha_full, beta_full, ParityCase::QOdd)
    };

    let family = FriesenFamily {
        alpha,
        beta,
        gamma,
        q_km1: check.q_km1,
        q_km2: check.q_km2,
        parity_case,
        k,
    };
    debug_assert!(family.discriminant_matches_case());
    Ok(family)
}

impl FriesenFamily {
    /// Discriminant table: 4σ for odd q_{k-1}, σ for even q_{k-1}.
    pub fn expected_discriminant(&self) -> BigInt {
        let s = sigma(self.k);
        match self.parity_case {
            ParityCase::QOdd => BigInt::from(4) * s,
            ParityCase::QEven => s,
        }
    }

    pub fn discriminant_matches_case(&self) -> bool {
        self.discriminant() == BigRational::from_integer(self.expected_discriminant())
    }
}

/// Why a candidate b was not emitted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SkipReason {
    /// D(b) is not an integer.
    NotIntegral,
    /// D(b) < 2.
    NotPositive,
    /// D(b) is a perfect square.
    PerfectSquare,
    /// √D(b) is periodic but with the wrong period length (b below the
    /// "sufficiently large" threshold of the family).
    WrongPeriod { actual_k: usize },
    /// Period length matches but the coefficients do not.
    WrongCoefficients,
}

impl std::fmt::Display for SkipReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SkipReason::NotIntegral => write!(f, "not integral"),
            SkipReason::NotPositive => write!(f, "below 2"),
            SkipReason::PerfectSquare => write!(f, "perfect square"),
            SkipReason::WrongPeriod { actual_k } => write!(f, "period is {actual_k}"),
            SkipReason::WrongCoefficients => write!(f, "coefficients differ"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedCandidate {
    pub b: BigInt,
    pub reason: SkipReason,
}

/// A verified family member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmittedMember {
    pub b: BigInt,
    pub d: BigUint,
    pub expansion: SurdExpansion,
    /// `None` when D is too large for trial division to classify.
    pub squarefree: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumerationOutcome {
    pub emitted: Vec<EmittedMember>,
    pub skipped: Vec<SkippedCandidate>,
}

/// Evaluate D(b) over an inclusive b range, emitting exactly the verified
/// members and recording every rejection with its reason.
pub fn enumerate_d(
    family: &FriesenFamily,
    palindrome: &PalindromeSeq,
    b_lo: &BigInt,
    b_hi: &BigInt,
) -> EnumerationOutcome {
    let mut emitted = Vec::new();
    let mut skipped = Vec::new();
    let mut b = b_lo.clone();
    while &b <= b_hi {
        match classify_candidate(family, palindrome, &b) {
            Ok(member) => emitted.push(member),
            Err(reason) => skipped.push(SkippedCandidate {
                b: b.clone(),
                reason,
            }),
        }
        b += 1;
    }
    EnumerationOutcome { emitted, skipped }
}

/// Check a single b: integral, ≥ 2, non-square, and round-trips to period k
/// with exactly the prescribed palindrome.
pub fn classify_candidate(
    family: &FriesenFamily,
    palindrome: &PalindromeSeq,
    b: &BigInt,
) -> Result<EmittedMember, SkipReason> {
    let value = family.evaluate(b);
    if !value.is_integer() {
        return Err(SkipReason::NotIntegral);
    }
    let d_int = value.to_integer();
    if d_int < BigInt::one() {
        return Err(SkipReason::NotPositive);
    }
    let d = d_int.to_biguint().expect("checked >= 1");
    // D = 1 falls out here too: expand_sqrt classifies it as a square.
    let expansion = match expand_sqrt(&d) {
        Ok(e) => e,
        Err(_) => return Err(SkipReason::PerfectSquare),
    };
    if expansion.k() != palindrome.k() {
        return Err(SkipReason::WrongPeriod {
            actual_k: expansion.k(),
        });
    }
    if expansion.palindrome_part() != palindrome.entries() {
        return Err(SkipReason::WrongCoefficients);
    }
    debug_assert_eq!(
        expansion.period.last().unwrap(),
        &(&expansion.a0 * 2u32),
        "engine invariant"
    );
    let squarefree = squarefree_status(&d);
    Ok(EmittedMember {
        b: b.clone(),
        d,
        expansion,
        squarefree,
    })
}
