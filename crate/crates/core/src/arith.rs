//! Arbitrary-precision integer and exact-rational primitives.
//!
//! Everything here is deterministic and pure. Big integers are
//! `num_bigint::{BigUint, BigInt}`, exact rationals are
//! `num_rational::BigRational` (always in lowest terms, denominator
//! positive). Factorization is plain trial division against a cached prime
//! table — sufficient for the moduli this crate constructs with, and
//! intentionally refused above [`FACTOR_BOUND`].

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Largest value `factorize` accepts: 10¹².
pub const FACTOR_BOUND: u64 = 1_000_000_000_000;

/// Trial-division limit, `sqrt(FACTOR_BOUND)`.
pub const TRIAL_DIVISION_LIMIT: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("{a} is not invertible modulo {modulus} (gcd = {gcd})")]
    NotInvertible {
        a: BigInt,
        modulus: BigUint,
        gcd: BigUint,
    },
    #[error("moduli {m1} and {m2} are not coprime (gcd = {gcd})")]
    ModuliNotCoprime {
        m1: BigUint,
        m2: BigUint,
        gcd: BigUint,
    },
    #[error("{n} exceeds the trial-division factoring bound {FACTOR_BOUND}")]
    TooLargeToFactor { n: BigUint },
}

/// Floor of the square root together with an exactness flag.
///
/// Postcondition: `root² ≤ n < (root + 1)²`, and `is_square` iff `root² = n`.
pub fn isqrt(n: &BigUint) -> (BigUint, bool) {
    let root = n.sqrt();
    let exact = &root * &root == *n;
    (root, exact)
}

/// `isqrt` specialized to machine words; used on the sweep fast path.
pub fn isqrt_u64(n: u64) -> (u64, bool) {
    let root = n.isqrt();
    (root, root * root == n)
}

fn ext_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    // Returns (g, x, y) with a*x + b*y = g = gcd(a, b), g >= 0.
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut x0, mut x1) = (BigInt::one(), BigInt::zero());
    let (mut y0, mut y1) = (BigInt::zero(), BigInt::one());
    while !r1.is_zero() {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        r0 = std::mem::replace(&mut r1, r2);
        let x2 = &x0 - &q * &x1;
        x0 = std::mem::replace(&mut x1, x2);
        let y2 = &y0 - &q * &y1;
        y0 = std::mem::replace(&mut y1, y2);
    }
    if r0.is_negative() {
        (-r0, -x0, -y0)
    } else {
        (r0, x0, y0)
    }
}

/// Modular inverse via extended Euclid, canonical representative in `[1, n)`.
pub fn mod_inv(a: &BigInt, n: &BigUint) -> Result<BigUint, ArithError> {
    assert!(*n >= BigUint::from(2u32), "mod_inv requires modulus >= 2");
    let n_int = BigInt::from(n.clone());
    let a_red = a.mod_floor(&n_int);
    let (g, x, _) = ext_gcd(&a_red, &n_int);
    if !g.is_one() {
        return Err(ArithError::NotInvertible {
            a: a.clone(),
            modulus: n.clone(),
            gcd: g.to_biguint().expect("gcd is non-negative"),
        });
    }
    let inv = x.mod_floor(&n_int);
    Ok(inv.to_biguint().expect("mod_floor of positive modulus"))
}

/// Chinese Remainder Theorem over pairwise coprime moduli.
///
/// Returns `(residue, product)` with `0 ≤ residue < product` satisfying every
/// input congruence. The congruences fold left to right; a shared factor
/// between any two moduli surfaces as `ModuliNotCoprime`.
pub fn crt(congruences: &[(BigInt, BigUint)]) -> Result<(BigUint, BigUint), ArithError> {
    let mut residue = BigInt::zero();
    let mut modulus = BigUint::one();
    for (r, m) in congruences {
        assert!(!m.is_zero(), "crt requires nonzero moduli");
        let m_int = BigInt::from(m.clone());
        let r = r.mod_floor(&m_int);
        if m.is_one() {
            continue;
        }
        let g = modulus.gcd(m);
        if !g.is_one() {
            return Err(ArithError::ModuliNotCoprime {
                m1: modulus,
                m2: m.clone(),
                gcd: g,
            });
        }
        // residue + modulus * t ≡ r (mod m)  =>  t ≡ (r - residue) / modulus
        let mod_int = BigInt::from(modulus.clone());
        let inv = BigInt::from(mod_inv(&mod_int, m)?);
        let t = ((&r - &residue) * inv).mod_floor(&m_int);
        residue += BigInt::from(modulus.clone()) * t;
        modulus *= m;
    }
    Ok((
        residue
            .to_biguint()
            .expect("residue normalized non-negative"),
        modulus,
    ))
}

/// Prime-power decomposition `n = ∏ pᵢ^{aᵢ}` as a sorted map.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PrimePowerFactorization {
    factors: BTreeMap<u64, u32>,
}

impl PrimePowerFactorization {
    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// `(prime, exponent)` pairs in increasing prime order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, u32)> + '_ {
        self.factors.iter().map(|(&p, &a)| (p, a))
    }

    /// The prime powers `p^a` themselves, in increasing prime order.
    pub fn prime_powers(&self) -> impl Iterator<Item = BigUint> + '_ {
        self.iter().map(|(p, a)| BigUint::from(p).pow(a))
    }

    /// Reconstructs the factored value.
    pub fn value(&self) -> BigUint {
        self.prime_powers().product()
    }

    pub fn exponent_of(&self, prime: u64) -> u32 {
        self.factors.get(&prime).copied().unwrap_or(0)
    }
}

impl FromIterator<(u64, u32)> for PrimePowerFactorization {
    fn from_iter<T: IntoIterator<Item = (u64, u32)>>(iter: T) -> Self {
        Self {
            factors: iter.into_iter().collect(),
        }
    }
}

/// Primes below [`TRIAL_DIVISION_LIMIT`], sieved once per process.
pub fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let limit = TRIAL_DIVISION_LIMIT as usize;
        let mut composite = vec![false; limit + 1];
        let mut primes = Vec::with_capacity(80_000);
        for p in 2..=limit {
            if !composite[p] {
                primes.push(p as u32);
                let mut q = p * p;
                while q <= limit {
                    composite[q] = true;
                    q += p;
                }
            }
        }
        primes
    })
}

/// Trial-division factorization for `1 ≤ n ≤ 10¹²`.
///
/// After dividing out every prime below 10⁶ the remaining cofactor of a
/// number below 10¹² is 1 or prime, so the decomposition is complete.
pub fn factorize(n: &BigUint) -> Result<PrimePowerFactorization, ArithError> {
    assert!(!n.is_zero(), "factorize requires n >= 1");
    let Some(mut rest) = n.to_u64().filter(|&v| v <= FACTOR_BOUND) else {
        return Err(ArithError::TooLargeToFactor { n: n.clone() });
    };
    let mut factors = BTreeMap::new();
    for &p in small_primes() {
        let p = p as u64;
        if p * p > rest {
            break;
        }
        let mut exp = 0u32;
        while rest % p == 0 {
            rest /= p;
            exp += 1;
        }
        if exp > 0 {
            factors.insert(p, exp);
        }
    }
    if rest > 1 {
        *factors.entry(rest).or_insert(0) += 1;
    }
    Ok(PrimePowerFactorization { factors })
}

/// Squarefree status by trial division below 10⁶.
///
/// `Some(false)` when some p² divides n, `Some(true)` when the factorization
/// completes (cofactor 1 or a single large prime), `None` when the cofactor
/// is too large to classify.
pub fn squarefree_status(n: &BigUint) -> Option<bool> {
    if n.is_zero() {
        return Some(false);
    }
    let mut rest = n.clone();
    for &p in small_primes() {
        let p_big = BigUint::from(p);
        if (&p_big * &p_big) > rest {
            break;
        }
        if (&rest % &p_big).is_zero() {
            rest /= &p_big;
            if (&rest % &p_big).is_zero() {
                return Some(false);
            }
        }
    }
    if rest.is_one() {
        return Some(true);
    }
    // Cofactor has no prime factor below 10^6; it is prime iff below 10^12.
    if rest < BigUint::from(FACTOR_BOUND) {
        Some(true)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn isqrt_examples() {
        assert_eq!(isqrt(&big(49)), (big(7), true));
        assert_eq!(isqrt(&big(55)), (big(7), false));
        assert_eq!(isqrt(&big(0)), (big(0), true));
    }

    #[test]
    fn mod_inv_examples() {
        assert_eq!(mod_inv(&BigInt::from(2), &big(5)).unwrap(), big(3));
        for n in [2u64, 3, 17, 1000] {
            assert_eq!(mod_inv(&BigInt::one(), &big(n)).unwrap(), big(1));
        }
        assert!(matches!(
            mod_inv(&BigInt::from(3), &big(9)),
            Err(ArithError::NotInvertible { .. })
        ));
    }

    #[test]
    fn mod_inv_negative_input() {
        // -1 is its own inverse mod n.
        let inv = mod_inv(&BigInt::from(-1), &big(7)).unwrap();
        assert_eq!(inv, big(6));
    }

    #[test]
    fn crt_examples() {
        let (r, m) = crt(&[(BigInt::zero(), big(3)), (BigInt::one(), big(2))]).unwrap();
        assert_eq!((r, m), (big(3), big(6)));

        // Oracle: exhaustive scan for the unique solution below 35.
        let expected = (0u64..35)
            .find(|x| x % 5 == 2 && x % 7 == 3)
            .expect("solution exists");
        assert_eq!(expected, 17);
        let (r, m) = crt(&[(BigInt::from(2), big(5)), (BigInt::from(3), big(7))]).unwrap();
        assert_eq!((r, m), (big(expected), big(35)));

        assert!(matches!(
            crt(&[(BigInt::one(), big(4)), (BigInt::from(3), big(6))]),
            Err(ArithError::ModuliNotCoprime { .. })
        ));
    }

    #[test]
    fn crt_empty_is_trivial() {
        assert_eq!(crt(&[]).unwrap(), (big(0), big(1)));
    }

    #[test]
    fn factorize_examples() {
        let f = factorize(&big(45)).unwrap();
        assert_eq!(f.iter().collect::<Vec<_>>(), vec![(3, 2), (5, 1)]);
        assert_eq!(f.value(), big(45));

        assert!(factorize(&big(1)).unwrap().is_empty());

        let f = factorize(&big(97)).unwrap();
        assert_eq!(f.iter().collect::<Vec<_>>(), vec![(97, 1)]);

        // Large prime cofactor above the trial-division limit.
        let p = 1_000_003u64;
        let f = factorize(&big(4 * p)).unwrap();
        assert_eq!(f.iter().collect::<Vec<_>>(), vec![(2, 2), (p, 1)]);

        assert!(matches!(
            factorize(&(big(FACTOR_BOUND) + 1u32)),
            Err(ArithError::TooLargeToFactor { .. })
        ));
    }

    #[test]
    fn squarefree_status_cases() {
        assert_eq!(squarefree_status(&big(1)), Some(true));
        assert_eq!(squarefree_status(&big(10)), Some(true));
        assert_eq!(squarefree_status(&big(12)), Some(false));
        assert_eq!(squarefree_status(&big(1_000_003 * 5)), Some(true));
        // 1000003^2 > 10^12 and has no small factor: unclassifiable.
        let huge = BigUint::from(1_000_003u64) * BigUint::from(1_000_033u64);
        assert_eq!(squarefree_status(&huge), None);
    }

    fn is_prime_oracle(n: u64) -> bool {
        if n < 2 {
            return false;
        }
        let mut d = 2;
        while d * d <= n {
            if n.is_multiple_of(d) {
                return false;
            }
            d += 1;
        }
        true
    }

    proptest! {
        #[test]
        fn isqrt_brackets(n in 0u64..=1_000_000_000_000) {
            let (root, exact) = isqrt(&big(n));
            let r = root.to_u64().unwrap();
            prop_assert!(r * r <= n);
            prop_assert!((r + 1) * (r + 1) > n);
            prop_assert_eq!(exact, r * r == n);
        }

        #[test]
        fn isqrt_beyond_word_size(n in any::<u128>()) {
            let n = BigUint::from(n);
            let (root, exact) = isqrt(&n);
            prop_assert!(&root * &root <= n);
            let next = &root + 1u32;
            prop_assert!(&next * &next > n);
            prop_assert_eq!(exact, &root * &root == n);
        }

        #[test]
        fn mod_inv_multiplies_to_one(a in 1u64..1_000_000, n in 2u64..1_000_000) {
            prop_assume!(a.gcd(&n) == 1);
            let inv = mod_inv(&BigInt::from(a), &big(n)).unwrap();
            prop_assert!(inv >= big(1) && inv < big(n));
            prop_assert_eq!((inv * big(a)) % big(n), big(1));
        }

        #[test]
        fn crt_matches_exhaustive_scan(r1 in 0u64..16, m1 in 1u64..16, r2 in 0u64..16, m2 in 1u64..16) {
            prop_assume!(m1.gcd(&m2) == 1);
            let (r1, r2) = (r1 % m1, r2 % m2);
            let got = crt(&[(BigInt::from(r1), big(m1)), (BigInt::from(r2), big(m2))]).unwrap();
            let scan = (0..m1 * m2).find(|x| x % m1 == r1 && x % m2 == r2).unwrap();
            prop_assert_eq!(got, (big(scan), big(m1 * m2)));
        }

        #[test]
        fn factorize_reconstructs_with_prime_keys(n in 1u64..5_000_000) {
            let f = factorize(&big(n)).unwrap();
            prop_assert_eq!(f.value(), big(n));
            for (p, a) in f.iter() {
                prop_assert!(is_prime_oracle(p), "non-prime key {}", p);
                prop_assert!(a >= 1);
            }
        }
    }
}
