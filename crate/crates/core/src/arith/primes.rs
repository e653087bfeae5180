use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: i128, m: u64) -> Option<u64> {
    let m_i = m as i128;
    let a = a.rem_euclid(m_i);
    let (mut r0, mut r1) = (m_i, a);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    (r0 == 1).then(|| t0.rem_euclid(m_i) as u64)
}

/// Deterministic Miller–Rabin for the full `u64` range.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for p in SMALL {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub fn require_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::input(format!("{p} is not prime")))
    }
}

pub fn next_prime(n: u64) -> u64 {
    let mut c = n + 1;
    while !is_prime(c) {
        c += 1;
    }
    c
}

/// All primes `<= bound`.
pub fn primes_up_to(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    (0..=n).filter(|&k| sieve[k]).map(|k| k as u64).collect()
}

/// Distinct prime divisors of a nonzero integer by trial division, refusing
/// inputs whose cofactor stays composite past `limit`.
pub fn prime_divisors(n: &BigInt, limit: u64) -> Result<Vec<u64>> {
    if n.is_zero() {
        return Err(Error::input("zero has no prime factorization"));
    }
    let mut n = n.abs();
    let mut out = Vec::new();
    let mut d: u64 = 2;
    while !n.is_one() {
        if let Some(small) = n.to_u64() {
            if is_prime(small) {
                out.push(small);
                break;
            }
        }
        if d > limit {
            return Err(Error::resource(format!(
                "trial division limit {limit} exceeded while factoring"
            )));
        }
        let db = BigInt::from(d);
        if &db * &db > n {
            // Remaining cofactor is prime but too large for u64.
            return Err(Error::unsupported("prime factor exceeds 64 bits"));
        }
        if n.is_multiple_of(&db) {
            out.push(d);
            while n.is_multiple_of(&db) {
                n /= &db;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Smallest prime `p <= bound` with `p ≡ a (mod m)` and `extra(p)`.
///
/// Returns `Ok(None)` when the bound is exhausted; a progression with
/// `gcd(a, m) != 1` is rejected since it holds at most one prime.
pub fn dirichlet_prime(
    a: i64,
    m: u64,
    extra: impl Fn(u64) -> bool,
    bound: u64,
) -> Result<Option<u64>> {
    if m == 0 {
        return Err(Error::input("modulus must be positive"));
    }
    let r = a.rem_euclid(m as i64) as u64;
    if r.gcd(&m) != 1 {
        return Err(Error::input(format!(
            "gcd({a}, {m}) != 1: the progression holds at most one prime"
        )));
    }
    let mut c = r;
    while c <= bound {
        if is_prime(c) && extra(c) {
            debug_assert_eq!(c % m, r);
            return Ok(Some(c));
        }
        c = match c.checked_add(m) {
            Some(v) => v,
            None => break,
        };
    }
    Ok(None)
}

/// Legendre symbol `(a / p)` for an odd prime `p`.
pub fn legendre(a: &BigInt, p: u64) -> i32 {
    let r = a.mod_floor(&BigInt::from(p)).to_u64().unwrap();
    if r == 0 {
        return 0;
    }
    if pow_mod(r, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

/// Combine `x ≡ a1 (mod m1)` and `x ≡ a2 (mod m2)` for coprime moduli.
pub fn crt_pair(a1: u64, m1: u64, a2: u64, m2: u64) -> Option<(u64, u64)> {
    let inv = inv_mod(m1 as i128, m2)?;
    let m = m1.checked_mul(m2)?;
    let diff = (a2 as i128 - a1 as i128).rem_euclid(m2 as i128) as u64;
    let k = mul_mod(diff, inv, m2);
    let x = (a1 as u128 + m1 as u128 * k as u128) % m as u128;
    Some((x as u64, m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality_matches_trial_division() {
        let trial = |n: u64| n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d));
        for n in 0..5000 {
            assert_eq!(is_prime(n), trial(n), "{n}");
        }
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to bases 2,3,5,7
    }

    #[test]
    fn dirichlet_examples() {
        assert_eq!(dirichlet_prime(1, 2, |l| l > 2, 100).unwrap(), Some(3));
        assert_eq!(
            dirichlet_prime(2, 3, |p| p > 3 && p % 2 == 1, 100).unwrap(),
            Some(5)
        );
        assert!(matches!(dirichlet_prime(0, 2, |_| true, 100), Err(Error::Input(_))));
        assert_eq!(dirichlet_prime(1, 7, |_| true, 20).unwrap(), None);
    }

    #[test]
    fn small_helpers() {
        assert_eq!(inv_mod(2, 11), Some(6));
        assert_eq!(inv_mod(4, 8), None);
        assert_eq!(crt_pair(1, 10, 5, 11), Some((71, 110)));
        assert_eq!(prime_divisors(&BigInt::from(-360), 1000).unwrap(), vec![2, 3, 5]);
        assert_eq!(legendre(&BigInt::from(2), 5), -1);
        assert_eq!(legendre(&BigInt::from(-1), 5), 1);
        assert_eq!(primes_up_to(20), vec![2, 3, 5, 7, 11, 13, 17, 19]);
    }
}
