//! Exact modular arithmetic over arbitrary-precision integers.
//!
//! Everything here reduces with floored semantics, so negative intermediates
//! such as `k1 - ms * r` always land in `[0, modulus)`.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};

/// An integer reduced into `[0, modulus)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Residue {
    value: BigUint,
    modulus: BigUint,
}

impl Residue {
    pub fn new(value: &BigInt, modulus: &BigUint) -> Result<Self> {
        if *modulus < BigUint::from(2u8) {
            return Err(Error::InvalidModulus);
        }
        Ok(Residue {
            value: reduce(value, modulus),
            modulus: modulus.clone(),
        })
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    pub fn into_value(self) -> BigUint {
        self.value
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Floored reduction of a signed integer into `[0, modulus)`.
pub fn reduce(a: &BigInt, modulus: &BigUint) -> BigUint {
    let m = BigInt::from(modulus.clone());
    a.mod_floor(&m).to_biguint().expect("floored remainder is non-negative")
}

/// `(a - b) mod m` for unsigned operands.
pub fn sub_mod(a: &BigUint, b: &BigUint, m: &BigUint) -> BigUint {
    reduce(&(BigInt::from(a.clone()) - BigInt::from(b.clone())), m)
}

/// `base^exp mod m` for non-negative exponents.
pub fn pow_mod(base: &BigUint, exp: &BigUint, m: &BigUint) -> BigUint {
    base.modpow(exp, m)
}

/// `base^exponent mod modulus`, where a negative exponent means the inverse
/// of the positive power.
pub fn mod_exp(base: &BigInt, exponent: &BigInt, modulus: &BigUint) -> Result<Residue> {
    if *modulus < BigUint::from(2u8) {
        return Err(Error::InvalidModulus);
    }
    let b = reduce(base, modulus);
    let e = exponent.magnitude();
    let value = if exponent.is_negative() {
        let inv = mod_inv(&BigInt::from(b), modulus).map_err(|err| match err {
            Error::NotInvertible(..) => Error::NegativeExponentNonInvertible,
            other => other,
        })?;
        inv.value.modpow(e, modulus)
    } else {
        b.modpow(e, modulus)
    };
    Ok(Residue {
        value,
        modulus: modulus.clone(),
    })
}

/// Extended Euclid: returns `(g, x, y)` with `a*x + b*y = g = gcd(a, b)`.
pub fn extended_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let (mut old_r, mut r) = (a.clone(), b.clone());
    let (mut old_s, mut s) = (BigInt::one(), BigInt::zero());
    let (mut old_t, mut t) = (BigInt::zero(), BigInt::one());
    while !r.is_zero() {
        let quotient = old_r.div_floor(&r);
        let next_r = &old_r - &quotient * &r;
        old_r = std::mem::replace(&mut r, next_r);
        let next_s = &old_s - &quotient * &s;
        old_s = std::mem::replace(&mut s, next_s);
        let next_t = &old_t - &quotient * &t;
        old_t = std::mem::replace(&mut t, next_t);
    }
    if old_r.is_negative() {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

/// Multiplicative inverse of `a` modulo `modulus`.
pub fn mod_inv(a: &BigInt, modulus: &BigUint) -> Result<Residue> {
    if *modulus < BigUint::from(2u8) {
        return Err(Error::InvalidModulus);
    }
    let m = BigInt::from(modulus.clone());
    let (g, x, _) = extended_gcd(&a.mod_floor(&m), &m);
    if !g.is_one() {
        return Err(Error::NotInvertible(a.to_string(), modulus.to_string()));
    }
    Residue::new(&x, modulus)
}

/// Lagrange basis coefficient at `x = 0` for `points[i]`:
/// `prod_{j != i} (-u_j) / (u_i - u_j) mod q`.
///
/// Points are reduced mod `q` first; distinctness and nonzeroness are
/// checked on the reduced values.
pub fn lagrange_coeff_at_zero(i: usize, points: &[BigUint], q: &BigUint) -> Result<Residue> {
    assert!(i < points.len(), "index {i} out of range for {} points", points.len());
    let reduced = check_points(points, q)?;
    let ui = BigInt::from(reduced[i].clone());
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for (j, uj) in reduced.iter().enumerate() {
        if j == i {
            continue;
        }
        let uj = BigInt::from(uj.clone());
        num *= -&uj;
        den *= &ui - &uj;
    }
    let inv = mod_inv(&den, q)?;
    Residue::new(&(num * BigInt::from(inv.into_value())), q)
}

/// Reduces points mod `q` and rejects zero or colliding points.
pub(crate) fn check_points(points: &[BigUint], q: &BigUint) -> Result<Vec<BigUint>> {
    let reduced: Vec<BigUint> = points.iter().map(|u| u % q).collect();
    for (idx, r) in reduced.iter().enumerate() {
        if r.is_zero() {
            return Err(Error::ZeroPoint(points[idx].to_string()));
        }
        if let Some(prev) = reduced[..idx].iter().position(|other| other == r) {
            return Err(Error::DuplicatePoint(format!("{} and {}", points[prev], points[idx])));
        }
    }
    Ok(reduced)
}

const SMALL_PRIMES: [u32; 25] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
];

/// Number of Miller-Rabin rounds; the false-positive rate is at most `4^-64`.
pub const MILLER_RABIN_ROUNDS: usize = 64;

/// Miller-Rabin with trial division up front. Witnesses come from a fixed
/// seed, so the answer for a given `n` never changes between runs.
pub fn is_probable_prime(n: &BigUint) -> bool {
    use num_bigint::RandBigInt;

    if *n < BigUint::from(2u8) {
        return false;
    }
    for &sp in SMALL_PRIMES.iter() {
        let sp = BigUint::from(sp);
        if *n == sp {
            return true;
        }
        if (n % &sp).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let n_minus_one = n - &one;
    let mut d = n_minus_one.clone();
    let mut s = 0u32;
    while d.is_even() {
        d >>= 1;
        s += 1;
    }
    let two = BigUint::from(2u8);
    let mut rng = ChaCha20Rng::seed_from_u64(0x6d69_6c6c_6572);
    'witness: for _ in 0..MILLER_RABIN_ROUNDS {
        let a = rng.gen_biguint_range(&two, &n_minus_one);
        let mut x = a.modpow(&d, n);
        if x == one || x == n_minus_one {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_one {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn ubig(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn exp_matches_worked_example() {
        assert_eq!(mod_exp(&big(18), &big(3), &ubig(23)).unwrap().value(), &ubig(13));
        assert_eq!(mod_exp(&big(8), &big(7), &ubig(23)).unwrap().value(), &ubig(12));
    }

    #[test]
    fn exp_zero_is_one() {
        for x in 1..23 {
            assert_eq!(mod_exp(&big(x), &big(0), &ubig(23)).unwrap().value(), &ubig(1));
        }
    }

    #[test]
    fn negative_exponent() {
        // 18^-1 mod 23 = 9 since 18 * 9 = 162 = 7 * 23 + 1
        assert_eq!(mod_exp(&big(18), &big(-1), &ubig(23)).unwrap().value(), &ubig(9));
        assert_eq!(
            mod_exp(&big(11), &big(-2), &ubig(22)),
            Err(Error::NegativeExponentNonInvertible)
        );
    }

    #[test]
    fn negative_base_is_canonicalized() {
        // 2 - 30 = -28 = 5 mod 11
        assert_eq!(reduce(&big(-28), &ubig(11)), ubig(5));
        assert_eq!(mod_exp(&big(-1), &big(3), &ubig(11)).unwrap().value(), &ubig(10));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(mod_inv(&big(7), &ubig(11)).unwrap().value(), &ubig(8));
        assert_eq!(mod_inv(&big(1), &ubig(97)).unwrap().value(), &ubig(1));
        assert!(matches!(mod_inv(&big(22), &ubig(11)), Err(Error::NotInvertible(..))));
        assert_eq!(mod_inv(&big(3), &ubig(1)), Err(Error::InvalidModulus));
    }

    #[test]
    fn inverse_exhaustive_small_moduli() {
        for m in 2u64..300 {
            for a in 0..m {
                let brute = (1..m).find(|b| a * b % m == 1);
                match (brute, mod_inv(&big(a as i64), &ubig(m))) {
                    (Some(b), Ok(r)) => assert_eq!(r.value(), &ubig(b)),
                    (None, Err(Error::NotInvertible(..))) => {}
                    (b, r) => panic!("a={a} m={m}: brute {b:?} vs {r:?}"),
                }
            }
        }
    }

    #[test]
    fn lagrange_worked_example() {
        let pts = [ubig(9), ubig(16)];
        let q = ubig(11);
        let ca = lagrange_coeff_at_zero(0, &pts, &q).unwrap();
        assert_eq!(ca.value(), &ubig(7));
        let cf = lagrange_coeff_at_zero(1, &pts, &q).unwrap();
        assert_eq!((ubig(6) * cf.value()) % &q, ubig(8));
        assert_eq!(lagrange_coeff_at_zero(0, &[ubig(5)], &q).unwrap().value(), &ubig(1));
    }

    #[test]
    fn lagrange_rejects_bad_points() {
        let q = ubig(11);
        assert!(matches!(
            lagrange_coeff_at_zero(0, &[ubig(1), ubig(12)], &q),
            Err(Error::DuplicatePoint(_))
        ));
        assert!(matches!(
            lagrange_coeff_at_zero(0, &[ubig(3), ubig(22)], &q),
            Err(Error::ZeroPoint(_))
        ));
    }

    #[test]
    fn primality_matches_sieve() {
        let limit = 5000usize;
        let mut sieve = vec![true; limit];
        sieve[0] = false;
        sieve[1] = false;
        for i in 2..limit {
            if sieve[i] {
                for j in (i * i..limit).step_by(i) {
                    sieve[j] = false;
                }
            }
        }
        for (n, &prime) in sieve.iter().enumerate() {
            assert_eq!(is_probable_prime(&ubig(n as u64)), prime, "n = {n}");
        }
        // Carmichael numbers
        for c in [561u64, 1105, 1729, 2465, 2821, 6601, 8911, 41041, 825265] {
            assert!(!is_probable_prime(&ubig(c)));
        }
        // 2^127 - 1
        let m127 = (BigUint::one() << 127u32) - BigUint::one();
        assert!(is_probable_prime(&m127));
    }

    proptest! {
        #[test]
        fn inverse_times_value_is_one(a in 1u64..10_000, m in 2u64..10_000) {
            if let Ok(inv) = mod_inv(&big(a as i64), &ubig(m)) {
                prop_assert_eq!((ubig(a) * inv.value()) % ubig(m), ubig(1) % ubig(m));
            } else {
                prop_assert!(num_integer::gcd(a, m) != 1);
            }
        }

        #[test]
        fn exp_is_homomorphic(a in 0u64..5000, b in 0u64..5000) {
            let p = ubig(10007);
            let g = big(5);
            let lhs = mod_exp(&g, &big((a + b) as i64), &p).unwrap();
            let ga = mod_exp(&g, &big(a as i64), &p).unwrap();
            let gb = mod_exp(&g, &big(b as i64), &p).unwrap();
            prop_assert_eq!(lhs.value(), &((ga.value() * gb.value()) % &p));
        }

        #[test]
        fn lagrange_reconstructs_constant_term(
            coeffs in proptest::collection::vec(0u64..101, 1..5),
            seed_points in proptest::collection::btree_set(1u64..101, 5),
        ) {
            let q = 101u64;
            let t = coeffs.len();
            let points: Vec<u64> = seed_points.into_iter().take(t).collect();
            // brute-force Horner evaluation
            let eval = |x: u64| coeffs.iter().rev().fold(0u64, |acc, c| (acc * x + c) % q);
            let pts: Vec<BigUint> = points.iter().map(|&u| ubig(u)).collect();
            let mut acc = 0u64;
            for (i, &u) in points.iter().enumerate() {
                let c = lagrange_coeff_at_zero(i, &pts, &ubig(q)).unwrap();
                let c: u64 = c.value().try_into().unwrap();
                acc = (acc + c * eval(u)) % q;
            }
            prop_assert_eq!(acc, coeffs[0]);
        }
    }
}
