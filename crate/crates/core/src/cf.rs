//! Periodic continued-fraction expansion of √D and convergent tables.
//!
//! For non-square D ≥ 2 the expansion is computed with the classical
//! quadratic-surd recurrence on exact integers:
//!
//! ```text
//! a0 = floor(sqrt(D)),   m1 = a0,   d1 = D - a0^2
//! a_i     = floor((a0 + m_i) / d_i)
//! m_{i+1} = a_i * d_i - m_i
//! d_{i+1} = (D - m_{i+1}^2) / d_i        (the division is exact)
//! ```
//!
//! The period ends at the first i where the state (m_{i+1}, d_{i+1}) equals
//! (m1, d1). That recurrence of state is the defining criterion; the
//! equivalent "first d_i = 1" criterion is asserted against it as a
//! cross-check rather than trusted alone.
//!
//! Expansions of word-sized D (≤ 10¹⁸) run entirely in u64 arithmetic; the
//! intermediates are bounded by 4D, so nothing overflows. Larger D fall back
//! to bigints. Both paths produce identical structures and are pinned
//! together by tests.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::arith::{isqrt, isqrt_u64};

/// Largest D routed to the u64 expansion path.
pub const U64_EXPANSION_LIMIT: u64 = 1_000_000_000_000_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CfError {
    #[error("D must be at least 2")]
    DNotPositive,
    #[error("{0} is a perfect square; sqrt({0}) has no periodic expansion")]
    PerfectSquare(BigUint),
    #[error("coefficient sequence is empty")]
    EmptySequence,
    #[error("re-expansion differs at position {index} (0 = a0, i >= 1 = period index i)")]
    MismatchAt { index: usize },
}

/// The periodic expansion √D = [a0; period], period = (a1, …, a_k).
///
/// The state trace keeps the (m_i, d_i) pair from which each period
/// coefficient was produced, so diagnostics and divisibility audits can run
/// without re-expanding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurdExpansion {
    pub d: BigUint,
    pub a0: BigUint,
    pub period: Vec<BigUint>,
    pub state_trace: Vec<(BigUint, BigUint)>,
}

impl SurdExpansion {
    /// Period length k.
    pub fn k(&self) -> usize {
        self.period.len()
    }

    /// The palindromic prefix (a1, …, a_{k-1}).
    pub fn palindrome_part(&self) -> &[BigUint] {
        &self.period[..self.period.len() - 1]
    }

    /// Max of the odd-indexed period coefficients a1, a3, …, a_{k-1}
    /// (1-based); `None` when k is odd, where that maximum is not the
    /// quantity of interest.
    pub fn max_odd_indexed(&self) -> Option<&BigUint> {
        if !self.k().is_multiple_of(2) {
            return None;
        }
        self.period.iter().step_by(2).max()
    }
}

/// True iff the sequence equals its reverse. The empty sequence qualifies.
pub fn is_palindrome<T: PartialEq>(seq: &[T]) -> bool {
    seq.iter().eq(seq.iter().rev())
}

fn expand_sqrt_u64(d: u64) -> Result<SurdExpansion, CfError> {
    if d < 2 {
        return if d == 1 {
            Err(CfError::PerfectSquare(BigUint::one()))
        } else {
            Err(CfError::DNotPositive)
        };
    }
    let (a0, exact) = isqrt_u64(d);
    if exact {
        return Err(CfError::PerfectSquare(BigUint::from(d)));
    }
    let m1 = a0;
    let d1 = d - a0 * a0;
    let (mut m, mut den) = (m1, d1);
    let mut period = Vec::new();
    let mut trace = Vec::new();
    let mut first_unit_den = None;
    loop {
        let a = (a0 + m) / den;
        trace.push((BigUint::from(m), BigUint::from(den)));
        period.push(BigUint::from(a));
        if den == 1 && first_unit_den.is_none() {
            first_unit_den = Some(period.len());
        }
        let m_next = a * den - m;
        let den_next = (d - m_next * m_next) / den;
        debug_assert_eq!((d - m_next * m_next) % den, 0);
        if m_next == m1 && den_next == d1 {
            break;
        }
        m = m_next;
        den = den_next;
    }
    assert_eq!(
        first_unit_den,
        Some(period.len()),
        "state-recurrence and d=1 period criteria disagree for D={d}"
    );
    Ok(SurdExpansion {
        d: BigUint::from(d),
        a0: BigUint::from(a0),
        period,
        state_trace: trace,
    })
}

fn expand_sqrt_big(d: &BigUint) -> Result<SurdExpansion, CfError> {
    let (a0, exact) = isqrt(d);
    if exact {
        return Err(CfError::PerfectSquare(d.clone()));
    }
    let m1 = a0.clone();
    let d1 = d - &a0 * &a0;
    let mut m = m1.clone();
    let mut den = d1.clone();
    let mut period = Vec::new();
    let mut trace = Vec::new();
    let mut first_unit_den = None;
    loop {
        let a = (&a0 + &m) / &den;
        let m_next = &a * &den - &m;
        let den_next = (d - &m_next * &m_next) / &den;
        debug_assert!((d - &m_next * &m_next).is_multiple_of(&den));
        trace.push((m, den));
        period.push(a);
        if trace.last().expect("just pushed").1.is_one() && first_unit_den.is_none() {
            first_unit_den = Some(period.len());
        }
        if m_next == m1 && den_next == d1 {
            break;
        }
        m = m_next;
        den = den_next;
    }
    assert_eq!(
        first_unit_den,
        Some(period.len()),
        "state-recurrence and d=1 period criteria disagree for D={d}"
    );
    Ok(SurdExpansion {
        d: d.clone(),
        a0,
        period,
        state_trace: trace,
    })
}

/// Expand √D for non-square D ≥ 2.
pub fn expand_sqrt(d: &BigUint) -> Result<SurdExpansion, CfError> {
    match d.to_u64() {
        Some(small) if small <= U64_EXPANSION_LIMIT => expand_sqrt_u64(small),
        _ => expand_sqrt_big(d),
    }
}

/// Lean u64 scan used by range sweeps: fills `period_buf` with the period
/// coefficients and returns a0, without allocating a trace or bigints.
/// Returns `None` for d < 2 and for perfect squares.
pub fn scan_sqrt_u64(d: u64, period_buf: &mut Vec<u64>) -> Option<u64> {
    assert!(
        d <= U64_EXPANSION_LIMIT,
        "scan_sqrt_u64 is limited to D <= 10^18"
    );
    period_buf.clear();
    if d < 2 {
        return None;
    }
    let (a0, exact) = isqrt_u64(d);
    if exact {
        return None;
    }
    let m1 = a0;
    let d1 = d - a0 * a0;
    let (mut m, mut den) = (m1, d1);
    loop {
        let a = (a0 + m) / den;
        period_buf.push(a);
        let m_next = a * den - m;
        let den_next = (d - m_next * m_next) / den;
        if m_next == m1 && den_next == d1 {
            return Some(a0);
        }
        m = m_next;
        den = den_next;
    }
}

/// Convergent table for a coefficient sequence, following the three-term
/// recurrences with seeds p_{-1} = 1, q_{-1} = 0, q_0 = 1.
///
/// The q column depends only on the coefficients after the leading term, so
/// a table built without a0 (for palindrome work) carries no p column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvergentTable {
    pub coefficients: Vec<BigUint>,
    pub includes_leading: bool,
    /// p_0, …, p_n; present only when the leading coefficient is included.
    pub p: Option<Vec<BigUint>>,
    /// q_0, …, q_n (q_0 = 1).
    pub q: Vec<BigUint>,
}

impl ConvergentTable {
    /// Last two q values as (q_last, q_second_to_last), using the seed
    /// q_{-1} = 0 when the table has a single column.
    pub fn last_q_pair(&self) -> (BigUint, BigUint) {
        let n = self.q.len();
        let prev = if n >= 2 {
            self.q[n - 2].clone()
        } else {
            BigUint::zero()
        };
        (self.q[n - 1].clone(), prev)
    }
}

/// Build the convergent table of a coefficient sequence.
///
/// With `include_a0` the first entry is treated as a0 and the p column is
/// produced; otherwise the entries are a1, a2, … and only q is produced.
/// All entries after the leading one must be ≥ 1.
pub fn convergents(coeffs: &[BigUint], include_a0: bool) -> Result<ConvergentTable, CfError> {
    if coeffs.is_empty() {
        return Err(CfError::EmptySequence);
    }
    let tail = if include_a0 { &coeffs[1..] } else { coeffs };
    assert!(
        tail.iter().all(|a| !a.is_zero()),
        "partial quotients after the leading term must be >= 1"
    );

    // q_n depends only on a1..a_n regardless of a0.
    let q_inputs = tail;
    let mut q = Vec::with_capacity(q_inputs.len() + 1);
    q.push(BigUint::one());
    let mut q_prev2 = BigUint::zero();
    let mut q_prev1 = BigUint::one();
    for a in q_inputs {
        let q_next = a * &q_prev1 + &q_prev2;
        q.push(q_next.clone());
        q_prev2 = std::mem::replace(&mut q_prev1, q_next);
    }

    let p = include_a0.then(|| {
        let mut p = Vec::with_capacity(coeffs.len());
        let mut p_prev2 = BigUint::one();
        let mut p_prev1 = coeffs[0].clone();
        p.push(p_prev1.clone());
        for a in &coeffs[1..] {
            let p_next = a * &p_prev1 + &p_prev2;
            p.push(p_next.clone());
            p_prev2 = std::mem::replace(&mut p_prev1, p_next);
        }
        p
    });

    Ok(ConvergentTable {
        coefficients: coeffs.to_vec(),
        includes_leading: include_a0,
        p,
        q,
    })
}

/// Outcome of re-deriving an expansion from its D alone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub d: BigUint,
    pub period_len: usize,
    pub palindrome_ok: bool,
    pub closing_coefficient_ok: bool,
    pub state_divisibility_ok: bool,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.palindrome_ok && self.closing_coefficient_ok && self.state_divisibility_ok
    }
}

/// Re-run the expansion from `e.d` alone and compare every component.
///
/// Mismatch positions: 0 for a0, i ≥ 1 for the i-th period coefficient or
/// its (m, d) state. Structural facts (palindrome prefix, a_k = 2·a0,
/// d_i | D − m_i²) are reported, not assumed.
pub fn verify_expansion(e: &SurdExpansion) -> Result<VerificationReport, CfError> {
    let fresh = expand_sqrt(&e.d)?;
    if fresh.a0 != e.a0 {
        return Err(CfError::MismatchAt { index: 0 });
    }
    let upto = fresh.period.len().min(e.period.len());
    for i in 0..upto {
        if fresh.period[i] != e.period[i] || fresh.state_trace[i] != e.state_trace[i] {
            return Err(CfError::MismatchAt { index: i + 1 });
        }
    }
    if fresh.period.len() != e.period.len() {
        return Err(CfError::MismatchAt { index: upto + 1 });
    }

    let closing = e
        .period
        .last()
        .map(|a| a == &(&e.a0 * 2u32))
        .unwrap_or(false);
    let divisibility = e
        .state_trace
        .iter()
        .all(|(m, den)| !den.is_zero() && (&e.d - m * m).is_multiple_of(den));
    Ok(VerificationReport {
        d: e.d.clone(),
        period_len: e.period.len(),
        palindrome_ok: is_palindrome(e.palindrome_part()),
        closing_coefficient_ok: closing,
        state_divisibility_ok: divisibility,
    })
}

/// q_{k-1} and q_{k-2} of a palindrome (a1, …, a_{k-1}) directly from the
/// recurrence seeds, valid for the empty palindrome too (q_0 = 1, q_{-1} = 0).
pub(crate) fn palindrome_q_pair(entries: &[BigUint]) -> (BigUint, BigUint) {
    let mut prev = BigUint::zero();
    let mut cur = BigUint::one();
    for a in entries {
        let next = a * &cur + &prev;
        prev = std::mem::replace(&mut cur, next);
    }
    (cur, prev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    fn bigs(ns: &[u64]) -> Vec<BigUint> {
        ns.iter().map(|&n| big(n)).collect()
    }

    fn expand(d: u64) -> SurdExpansion {
        expand_sqrt(&big(d)).unwrap()
    }

    #[test]
    fn expand_classic_small_cases() {
        let e = expand(2);
        assert_eq!(e.a0, big(1));
        assert_eq!(e.period, bigs(&[2]));

        let e = expand(55);
        assert_eq!(e.a0, big(7));
        assert_eq!(e.period, bigs(&[2, 2, 2, 14]));

        let e = expand(6);
        assert_eq!(e.a0, big(2));
        assert_eq!(e.period, bigs(&[2, 4]));

        // Odd period length 5.
        let e = expand(13);
        assert_eq!(e.a0, big(3));
        assert_eq!(e.period, bigs(&[1, 1, 1, 1, 6]));
    }

    #[test]
    fn expand_rejects_squares_and_tiny_d() {
        assert!(matches!(
            expand_sqrt(&big(49)),
            Err(CfError::PerfectSquare(_))
        ));
        assert!(matches!(
            expand_sqrt(&big(1)),
            Err(CfError::PerfectSquare(_))
        ));
        assert!(matches!(expand_sqrt(&big(0)), Err(CfError::DNotPositive)));
    }

    #[test]
    fn expand_1035_with_state_trace() {
        let e = expand(1035);
        assert_eq!(e.a0, big(32));
        assert_eq!(e.period, bigs(&[5, 1, 5, 64]));
        let trace: Vec<(u64, u64)> = e
            .state_trace
            .iter()
            .map(|(m, d)| (m.to_u64().unwrap(), d.to_u64().unwrap()))
            .collect();
        assert_eq!(trace, vec![(32, 11), (23, 46), (23, 11), (32, 1)]);
    }

    #[test]
    fn big_path_agrees_with_u64_path() {
        for d in 2u64..5000 {
            let via_u64 = expand_sqrt_u64(d);
            let via_big = expand_sqrt_big(&big(d));
            assert_eq!(via_u64, via_big, "paths disagree at D={d}");
        }
    }

    #[test]
    fn big_path_handles_huge_d() {
        // D = (10^20)^2 + 1 has period (2 * 10^20).
        let t = BigUint::from(10u32).pow(20);
        let d = &t * &t + 1u32;
        let e = expand_sqrt(&d).unwrap();
        assert_eq!(e.a0, t);
        assert_eq!(e.period, vec![&e.a0 * 2u32]);
    }

    #[test]
    fn scan_matches_expand() {
        let mut buf = Vec::new();
        for d in 0u64..3000 {
            match (scan_sqrt_u64(d, &mut buf), expand_sqrt(&big(d))) {
                (Some(a0), Ok(e)) => {
                    assert_eq!(big(a0), e.a0);
                    assert_eq!(bigs(&buf), e.period);
                }
                (None, Err(_)) => {}
                (scan, full) => panic!("scan/full disagree at D={d}: {scan:?} vs {full:?}"),
            }
        }
    }

    #[test]
    fn convergents_q_examples() {
        let t = convergents(&bigs(&[2]), false).unwrap();
        assert_eq!(t.q, bigs(&[1, 2]));
        assert!(t.p.is_none());

        let t = convergents(&bigs(&[1, 1, 1]), false).unwrap();
        assert_eq!(t.q, bigs(&[1, 1, 2, 3]));

        let t = convergents(&bigs(&[5, 1, 5]), false).unwrap();
        assert_eq!(t.q, bigs(&[1, 5, 6, 35]));
        assert_eq!(t.last_q_pair(), (big(35), big(6)));

        assert!(matches!(
            convergents(&[], false),
            Err(CfError::EmptySequence)
        ));
    }

    #[test]
    fn convergents_with_leading_term() {
        // [7; 2, 2, 2] are the first convergents of sqrt(55).
        let t = convergents(&bigs(&[7, 2, 2, 2]), true).unwrap();
        assert_eq!(t.p.as_ref().unwrap(), &bigs(&[7, 15, 37, 89]));
        assert_eq!(t.q, bigs(&[1, 2, 5, 12]));
    }

    #[test]
    fn palindrome_flag() {
        assert!(is_palindrome(&bigs(&[2, 2, 2])));
        assert!(is_palindrome::<BigUint>(&[]));
        assert!(!is_palindrome(&bigs(&[1, 2])));
    }

    #[test]
    fn palindrome_q_pair_convention() {
        assert_eq!(palindrome_q_pair(&[]), (big(1), big(0)));
        assert_eq!(palindrome_q_pair(&bigs(&[5, 1, 5])), (big(35), big(6)));
    }

    #[test]
    fn verify_accepts_genuine_expansions() {
        let r = verify_expansion(&expand(6)).unwrap();
        assert_eq!(r.period_len, 2);
        assert!(r.passed());

        let r = verify_expansion(&expand(1035)).unwrap();
        assert_eq!(r.period_len, 4);
        assert!(r.passed());
    }

    #[test]
    fn verify_flags_tampering() {
        let mut e = expand(6);
        e.period[0] = big(3);
        assert_eq!(verify_expansion(&e), Err(CfError::MismatchAt { index: 1 }));

        let mut e = expand(6);
        e.a0 = big(3);
        assert_eq!(verify_expansion(&e), Err(CfError::MismatchAt { index: 0 }));

        let mut e = expand(6);
        e.period.push(big(4));
        e.state_trace.push((big(2), big(2)));
        assert_eq!(verify_expansion(&e), Err(CfError::MismatchAt { index: 3 }));
    }

    #[test]
    fn structure_holds_below_ten_thousand() {
        // a_k = 2*a0 and palindromic (a1..a_{k-1}) for every non-square D.
        let mut buf = Vec::new();
        for d in 2u64..10_000 {
            if let Some(a0) = scan_sqrt_u64(d, &mut buf) {
                assert_eq!(*buf.last().unwrap(), 2 * a0, "closing coefficient at D={d}");
                let prefix = &buf[..buf.len() - 1];
                assert!(is_palindrome(prefix), "palindrome fails at D={d}");
            }
        }
    }

    #[test]
    fn period_one_is_exactly_t_squared_plus_one() {
        for t in 1u64..=1000 {
            let e = expand(t * t + 1);
            assert_eq!(e.period, vec![big(2 * t)]);
        }
        let mut buf = Vec::new();
        for d in 2u64..=100_000 {
            if scan_sqrt_u64(d, &mut buf).is_some() && buf.len() == 1 {
                let (r, sq) = isqrt_u64(d - 1);
                assert!(sq && r >= 1, "period-1 D={d} is not t^2+1");
            }
        }
    }

    /// Independent algebraic oracle: the convergent just before the period
    /// closes solves Pell's equation, p_{k-1}^2 - D q_{k-1}^2 = (-1)^k.
    fn pell_check(e: &SurdExpansion) {
        let mut coeffs = vec![e.a0.clone()];
        coeffs.extend_from_slice(e.palindrome_part());
        let t = convergents(&coeffs, true).unwrap();
        let p = BigInt::from(t.p.unwrap().last().unwrap().clone());
        let q = BigInt::from(t.q.last().unwrap().clone());
        let lhs = &p * &p - BigInt::from(e.d.clone()) * &q * &q;
        let rhs = if e.k().is_multiple_of(2) {
            BigInt::one()
        } else {
            -BigInt::one()
        };
        assert_eq!(lhs, rhs, "Pell identity fails for D={}", e.d);
    }

    #[test]
    fn pell_identity_below_two_thousand() {
        for d in 2u64..2000 {
            if let Ok(e) = expand_sqrt(&big(d)) {
                pell_check(&e);
            }
        }
    }

    #[test]
    fn splitting_identity_on_expansions() {
        // For even period k and l = k/2 - 1: q_{k-1} = q_l (q_{l+1} + q_{l-1}),
        // over the q table of the palindromic prefix. Every even-period D
        // up to 10^5.
        let mut buf = Vec::new();
        for d in 2u64..=100_000 {
            if scan_sqrt_u64(d, &mut buf).is_none() {
                continue;
            }
            let k = buf.len();
            if k % 2 != 0 {
                continue;
            }
            let t = convergents(&bigs(&buf[..k - 1]), false).unwrap().q;
            let l = k / 2 - 1;
            let q_lm1 = if l == 0 {
                BigUint::zero()
            } else {
                t[l - 1].clone()
            };
            assert_eq!(
                t[k - 1],
                &t[l] * (&t[l + 1] + q_lm1),
                "splitting fails at D={d}"
            );
        }
    }

    proptest! {
        #[test]
        fn determinant_identity(coeffs in proptest::collection::vec(1u64..50, 1..12), a0 in 0u64..50) {
            let mut seq = vec![big(a0)];
            seq.extend(coeffs.iter().map(|&c| big(c)));
            let t = convergents(&seq, true).unwrap();
            let p = t.p.as_ref().unwrap();
            // p_n q_{n-1} - p_{n-1} q_n = (-1)^{n+1}, starting from the seeds.
            let mut p_prev = BigInt::one();
            let mut q_prev = BigInt::zero();
            for (n, (pn, qn)) in p.iter().zip(&t.q).enumerate() {
                let pn = BigInt::from(pn.clone());
                let qn = BigInt::from(qn.clone());
                let det = &pn * &q_prev - &p_prev * &qn;
                let expected = if n % 2 == 0 { -BigInt::one() } else { BigInt::one() };
                prop_assert_eq!(det, expected);
                prop_assert!(pn.gcd(&qn).is_one());
                p_prev = pn;
                q_prev = qn;
            }
            // q strictly increases from index 1 on.
            for w in t.q.windows(2).skip(1) {
                prop_assert!(w[0] < w[1]);
            }
        }

        #[test]
        fn splitting_identity_on_random_palindromes(half in proptest::collection::vec(1u64..30, 1..7)) {
            // Build a palindrome of odd length k-1 = 2*len(half)-1, so k is even.
            let mut entries: Vec<BigUint> = half.iter().map(|&c| big(c)).collect();
            entries.extend(half.iter().rev().skip(1).map(|&c| big(c)));
            let k = entries.len() + 1;
            prop_assert_eq!(k % 2, 0);
            let q = convergents(&entries, false).unwrap().q;
            let l = k / 2 - 1;
            let q_lm1 = if l == 0 { BigUint::zero() } else { q[l - 1].clone() };
            prop_assert_eq!(q[k - 1].clone(), &q[l] * (&q[l + 1] + q_lm1));
        }

        #[test]
        fn structure_on_random_u64_d(d in 2u64..1_000_000_000) {
            let mut buf = Vec::new();
            if let Some(a0) = scan_sqrt_u64(d, &mut buf) {
                prop_assert_eq!(*buf.last().unwrap(), 2 * a0);
                prop_assert!(is_palindrome(&buf[..buf.len() - 1]));
            }
        }
    }
}
