//! Rank lower bounds for universal quadratic forms over ℤ[√D].
//!
//! With √D = [a0; a1, …, a_k], put U = max(a1, a3, …, a_{k−1}) for even k
//! and U = √D for odd k. Any universal quadratic form over ℤ[√D] of rank r
//! satisfies r ≥ U/2 when the form is classical, and r ≥ √U/2 in general
//! provided U ≥ 240. Bounds are kept exact: the irrational U of the odd-k
//! case is carried symbolically and all ceilings are computed by integer
//! comparison, never through floating point.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::Zero;

use crate::cf::{expand_sqrt, CfError};
use crate::congruence::{
    construct_mod_n_with_floor, period4_construct_with_u, ConstructError, ConstructionCertificate,
    SearchLimits,
};

/// The exact value of U: an integer coefficient maximum for even periods,
/// the irrational √D for odd periods.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UValue {
    MaxOddIndexed(BigUint),
    SqrtOfD(BigUint),
}

/// U together with the derived integer bounds.
///
/// `classical_bound` = ⌈U/2⌉; `general_bound` = ⌈√U/2⌉, present only when
/// U ≥ 240 (the threshold under which the general bound is not available).
/// The threshold is enforced on U itself, the stronger reading.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankBoundCertificate {
    pub d: BigUint,
    pub k: usize,
    pub u: UValue,
    pub classical_bound: BigUint,
    pub general_bound: Option<BigUint>,
    pub u_threshold_met: bool,
}

const U_THRESHOLD: u32 = 240;

/// Smallest r with 4r² ≥ x, i.e. ⌈√x / 2⌉ for integer or irrational-√ x.
fn min_r_quarter(x: &BigUint) -> BigUint {
    let mut r = x.sqrt() / 2u32;
    while &(&r * &r * 4u32) < x {
        r += 1u32;
    }
    r
}

/// Smallest r with 16r⁴ ≥ d, i.e. ⌈d^{1/4} / 2⌉ for non-fourth-power d.
fn min_r_sixteenth(d: &BigUint) -> BigUint {
    let mut r = d.sqrt().sqrt() / 2u32;
    loop {
        let r4 = (&r * &r) * (&r * &r);
        if &(r4 * 16u32) >= d {
            return r;
        }
        r += 1u32;
    }
}

/// Compute the rank lower-bound certificate for a non-square D ≥ 2.
pub fn rank_lower_bound(d: &BigUint) -> Result<RankBoundCertificate, CfError> {
    let expansion = expand_sqrt(d)?;
    rank_bound_from_expansion(
        &expansion.d,
        expansion.k(),
        expansion.max_odd_indexed().cloned(),
    )
}

fn rank_bound_from_expansion(
    d: &BigUint,
    k: usize,
    max_odd: Option<BigUint>,
) -> Result<RankBoundCertificate, CfError> {
    let threshold = BigUint::from(U_THRESHOLD);
    let (u, classical, threshold_met) = match max_odd {
        Some(u) => {
            let classical = (&u + 1u32) / 2u32;
            let met = u >= threshold;
            (UValue::MaxOddIndexed(u), classical, met)
        }
        None => {
            // Odd k: U = √D. ⌈√D/2⌉ by integer comparison; U ≥ 240 iff
            // D ≥ 240² (D is non-square, so equality cannot occur).
            let classical = min_r_quarter(d);
            let met = *d >= &threshold * &threshold;
            (UValue::SqrtOfD(d.clone()), classical, met)
        }
    };
    let general = threshold_met.then(|| match &u {
        UValue::MaxOddIndexed(u) => min_r_quarter(u),
        UValue::SqrtOfD(d) => min_r_sixteenth(d),
    });
    Ok(RankBoundCertificate {
        d: d.clone(),
        k,
        u,
        classical_bound: classical,
        general_bound: general,
        u_threshold_met: threshold_met,
    })
}

/// Construct D ≡ m (mod n) with period k whose certificate guarantees every
/// universal quadratic form over ℤ[√D] has at least s variables.
///
/// The congruence machinery leaves the targeted odd-indexed coefficient free
/// modulo its constraint, so it is enlarged in steps of its modulus until
/// max(a1, a3, …, a_{k−1}) ≥ max(4s², 240); then √U/2 ≥ s with the general
/// bound applicable. k = 4 runs through the period-4 parametrization and
/// accepts any n; every other even k requires odd n.
pub fn construct_large_rank(
    m: &BigInt,
    n: &BigUint,
    s: u64,
    k: usize,
    limits: &SearchLimits,
) -> Result<(ConstructionCertificate, RankBoundCertificate), ConstructError> {
    if k == 0 {
        return Err(ConstructError::InvalidK(k));
    }
    if !k.is_multiple_of(2) {
        return Err(ConstructError::OddK { k });
    }
    let four_s_sq = BigUint::from(s) * BigUint::from(s) * 4u32;
    let target_u = four_s_sq.max(BigUint::from(U_THRESHOLD));

    let cert = if k == 4 {
        // u ≡ 0 (mod 2n), enlarged to the first multiple at or above target.
        let step = 2u32 * n;
        let mut u = target_u.clone();
        let rem = &u % &step;
        if !rem.is_zero() {
            u += &step - rem;
        }
        if u.is_zero() {
            u = step;
        }
        period4_construct_with_u(m, n, &u, limits)?
    } else {
        if n.is_even() {
            return Err(ConstructError::EvenN { n: n.clone(), k });
        }
        construct_mod_n_with_floor(m, n, k, Some(&target_u), limits)?
    };

    let rank = rank_lower_bound(&cert.d).expect("certificate D is non-square");
    debug_assert!(matches!(&rank.u, UValue::MaxOddIndexed(u) if *u >= target_u));
    debug_assert!(rank
        .general_bound
        .as_ref()
        .is_some_and(|g| *g >= BigUint::from(s)));
    Ok((cert, rank))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn bound_examples_even_period() {
        // D = 1035: period (5, 1, 5, 64), U = max(5, 5) = 5.
        let c = rank_lower_bound(&big(1035)).unwrap();
        assert_eq!(c.k, 4);
        assert_eq!(c.u, UValue::MaxOddIndexed(big(5)));
        assert_eq!(c.classical_bound, big(3));
        assert_eq!(c.general_bound, None);
        assert!(!c.u_threshold_met);

        // D = 6: period (2, 4), U = 2.
        let c = rank_lower_bound(&big(6)).unwrap();
        assert_eq!(c.u, UValue::MaxOddIndexed(big(2)));
        assert_eq!(c.classical_bound, big(1));
        assert_eq!(c.general_bound, None);
    }

    #[test]
    fn bound_examples_odd_period() {
        // D = 13: k = 5, U = √13, ⌈√13/2⌉ = 2.
        let c = rank_lower_bound(&big(13)).unwrap();
        assert_eq!(c.k, 5);
        assert_eq!(c.u, UValue::SqrtOfD(big(13)));
        assert_eq!(c.classical_bound, big(2));
        assert_eq!(c.general_bound, None);
        assert!(!c.u_threshold_met);

        // D = 57601 = 240² + 1: period 1, √D barely above the threshold.
        let c = rank_lower_bound(&big(57601)).unwrap();
        assert_eq!(c.k, 1);
        assert!(c.u_threshold_met);
        assert_eq!(c.classical_bound, big(121)); // ⌈240.002/2⌉
        assert_eq!(c.general_bound, Some(big(8))); // ⌈√240.002/2⌉

        // One below the threshold: D = 57599 (non-square), √D < 240.
        let c = rank_lower_bound(&big(57599)).unwrap();
        assert!(!c.u_threshold_met);
        assert_eq!(c.general_bound, None);
    }

    #[test]
    fn rejects_squares() {
        assert!(rank_lower_bound(&big(49)).is_err());
    }

    #[test]
    fn ceilings_are_exact() {
        // ⌈√240/2⌉ = 8: 4·7² = 196 < 240 ≤ 4·8² = 256.
        assert_eq!(min_r_quarter(&big(240)), big(8));
        assert_eq!(min_r_quarter(&big(256)), big(8));
        assert_eq!(min_r_quarter(&big(257)), big(9));
        assert_eq!(min_r_quarter(&big(1)), big(1));
        assert_eq!(min_r_quarter(&big(4)), big(1));
        assert_eq!(min_r_quarter(&big(5)), big(2));

        assert_eq!(min_r_sixteenth(&big(57601)), big(8));
        assert_eq!(min_r_sixteenth(&big(16)), big(1));
        assert_eq!(min_r_sixteenth(&big(17)), big(2));
    }

    #[test]
    fn enlarging_an_odd_indexed_coefficient_never_decreases_u() {
        let base = [big(3), big(2), big(3), big(10)];
        let u_of = |coeffs: &[BigUint]| coeffs.iter().step_by(2).max().cloned().unwrap();
        let u0 = u_of(&base);
        for grow in [1u32, 5, 100] {
            let mut enlarged = base.clone();
            enlarged[2] += grow;
            assert!(u_of(&enlarged) >= u0);
        }
    }

    #[test]
    fn large_rank_period4_any_modulus() {
        let limits = SearchLimits::default();
        // (m=1, n=2, s=4): u ≡ 0 (mod 4), u ≥ 240 → u = 240.
        let (cert, rank) = construct_large_rank(&BigInt::one(), &big(2), 4, 4, &limits).unwrap();
        assert!(cert.all_checks_pass());
        assert_eq!(cert.expansion.k(), 4);
        assert_eq!(cert.coefficients.entries()[0], big(240));
        assert_eq!(rank.u, UValue::MaxOddIndexed(big(240)));
        assert_eq!(rank.general_bound, Some(big(8)));
        assert!((&cert.d % 2u32).is_one());
    }

    #[test]
    fn large_rank_weakest_target() {
        let limits = SearchLimits::default();
        let (cert, rank) = construct_large_rank(&BigInt::zero(), &big(1), 1, 4, &limits).unwrap();
        assert!(cert.all_checks_pass());
        match rank.u {
            UValue::MaxOddIndexed(u) => assert!(u >= big(240)),
            UValue::SqrtOfD(_) => panic!("period 4 is even"),
        }
        assert!(rank.general_bound.unwrap() >= big(1));
    }

    #[test]
    fn large_rank_k2_odd_modulus() {
        let limits = SearchLimits::default();
        let (cert, rank) = construct_large_rank(&BigInt::from(2), &big(3), 3, 2, &limits).unwrap();
        assert!(cert.all_checks_pass());
        assert_eq!(cert.expansion.k(), 2);
        assert_eq!(
            BigInt::from(cert.d.clone()) % BigInt::from(3),
            BigInt::from(2)
        );
        let UValue::MaxOddIndexed(u) = &rank.u else {
            panic!()
        };
        assert!(*u >= big(240));
        assert!((u % 3u32).is_zero());
        assert!(rank.general_bound.unwrap() >= big(3));
    }

    #[test]
    fn large_rank_u_matches_fresh_expansion() {
        let limits = SearchLimits::default();
        let (cert, rank) = construct_large_rank(&BigInt::from(1), &big(5), 2, 6, &limits).unwrap();
        let fresh = expand_sqrt(&cert.d).unwrap();
        assert_eq!(
            rank.u,
            UValue::MaxOddIndexed(fresh.max_odd_indexed().cloned().unwrap())
        );
    }

    #[test]
    fn large_rank_rejections() {
        let limits = SearchLimits::default();
        assert!(matches!(
            construct_large_rank(&BigInt::one(), &big(2), 2, 6, &limits),
            Err(ConstructError::EvenN { .. })
        ));
        assert!(matches!(
            construct_large_rank(&BigInt::one(), &big(3), 2, 5, &limits),
            Err(ConstructError::OddK { k: 5 })
        ));
    }
}
