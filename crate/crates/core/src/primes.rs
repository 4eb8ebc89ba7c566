//! Prime sieving, deterministic primality, factorization, and totients.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;
use crate::Result;

/// A bitset sieve of Eratosthenes. Bit i is set iff i is prime, for
/// 0 ≤ i ≤ limit. Bits are stored LSB-first in 64-bit words, which is also
/// the layout of the on-disk cache written by the CLI.
#[derive(Debug, Clone)]
pub struct PrimeSieve {
    limit: u64,
    words: Vec<u64>,
}

impl PrimeSieve {
    pub fn new(limit: u64) -> Self {
        let n = limit as usize;
        let mut words = vec![u64::MAX; n / 64 + 1];
        let mut sieve = PrimeSieve { limit, words: Vec::new() };
        // Start from "everything ≥ 2 is prime" and cross out composites.
        std::mem::swap(&mut sieve.words, &mut words);
        sieve.clear(0);
        if limit >= 1 {
            sieve.clear(1);
        }
        let mut i = 2u64;
        while i * i <= limit {
            if sieve.is_prime(i) {
                let mut j = i * i;
                while j <= limit {
                    sieve.clear(j);
                    j += i;
                }
            }
            i += 1;
        }
        // Mask bits beyond the limit so the word vector is canonical.
        let last_bits = (n + 1) % 64;
        if last_bits != 0 {
            let len = sieve.words.len();
            sieve.words[len - 1] &= (1u64 << last_bits) - 1;
        }
        sieve
    }

    /// Rebuilds a sieve from raw words (the cache-file payload). The caller
    /// is responsible for the words actually describing primes up to `limit`.
    pub fn from_words(limit: u64, words: Vec<u64>) -> Result<Self> {
        let needed = limit as usize / 64 + 1;
        if words.len() < needed {
            return Err(Error::Precondition(format!(
                "sieve payload too short: need {needed} words for limit {limit}, got {}",
                words.len()
            )));
        }
        Ok(PrimeSieve { limit, words })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    fn clear(&mut self, i: u64) {
        self.words[(i / 64) as usize] &= !(1u64 << (i % 64));
    }

    pub fn is_prime(&self, i: u64) -> bool {
        debug_assert!(i <= self.limit);
        self.words[(i / 64) as usize] >> (i % 64) & 1 == 1
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        (2..=self.limit).filter(move |&i| self.is_prime(i))
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
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

/// Deterministic Miller–Rabin for u64 (the 12-witness set suffices below 2⁶⁴).
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
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

fn pollard_rho(n: u64) -> u64 {
    // Brent's cycle variant with batched gcds.
    if n % 2 == 0 {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let mut x = 2u64;
        let mut y = 2u64;
        let mut d = 1u64;
        let mut q = 1u64;
        let mut count = 0u32;
        while d == 1 {
            x = f(x);
            y = f(f(y));
            let diff = x.abs_diff(y);
            if diff == 0 {
                break;
            }
            q = mul_mod(q, diff, n);
            count += 1;
            if count % 64 == 0 {
                d = gcd_u64(q, n);
            }
        }
        if d == 1 {
            d = gcd_u64(q, n);
        }
        if d != 1 && d != n {
            return d;
        }
        c += 1;
    }
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Prime factorization of n ≥ 1 as (prime, exponent) pairs in ascending order.
pub fn factorize_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47] {
        if n == 1 {
            break;
        }
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    }
    let mut stack = Vec::new();
    if n > 1 {
        stack.push(n);
    }
    let mut rest = Vec::new();
    while let Some(m) = stack.pop() {
        if is_prime_u64(m) {
            rest.push(m);
        } else {
            let d = pollard_rho(m);
            stack.push(d);
            stack.push(m / d);
        }
    }
    rest.sort_unstable();
    let mut i = 0;
    while i < rest.len() {
        let p = rest[i];
        let mut e = 0;
        while i < rest.len() && rest[i] == p {
            e += 1;
            i += 1;
        }
        out.push((p, e));
    }
    out.sort_unstable();
    out
}

/// Euler's totient by factorization.
pub fn totient_u64(n: u64) -> u64 {
    assert!(n >= 1);
    let mut phi = n;
    for (p, _) in factorize_u64(n) {
        phi = phi / p * (p - 1);
    }
    phi
}

/// φ(k) for all k ≤ limit via a linear-time sieve; φ(0) is reported as 0.
pub fn totient_sieve(limit: u64) -> Vec<u64> {
    let n = limit as usize;
    let mut phi: Vec<u64> = (0..=n as u64).collect();
    for i in 2..=n {
        if phi[i] == i as u64 {
            // i is prime
            let mut j = i;
            while j <= n {
                phi[j] -= phi[j] / i as u64;
                j += i;
            }
        }
    }
    if n >= 1 {
        phi[1] = 1;
    }
    phi
}

/// Square-free part of a nonzero integer (sign discarded): the unique
/// square-free s with |n| = s·m².
pub fn squarefree_part_u64(n: u64) -> u64 {
    assert!(n >= 1);
    factorize_u64(n)
        .into_iter()
        .filter(|&(_, e)| e % 2 == 1)
        .map(|(p, _)| p)
        .product()
}

/// Square-free part for big integers. Values beyond u64 are first stripped
/// of small square factors; if the remainder still does not fit in u64 the
/// factorization effort is declared exhausted.
pub fn squarefree_part_big(n: &BigInt) -> Result<BigInt> {
    let mut m = n.abs();
    if m.is_zero() {
        return Err(Error::Precondition("square-free part of 0 is undefined".into()));
    }
    if let Some(v) = m.to_u64() {
        return Ok(BigInt::from(squarefree_part_u64(v)));
    }
    let mut square_free_small = BigInt::one();
    for p in 2u64..=100_000 {
        let pb = BigInt::from(p);
        let mut e = 0u32;
        while (&m % &pb).is_zero() {
            m /= &pb;
            e += 1;
        }
        if e % 2 == 1 {
            square_free_small *= pb;
        }
        if let Some(v) = m.to_u64() {
            return Ok(square_free_small * BigInt::from(squarefree_part_u64(v)));
        }
    }
    Err(Error::Unfactorable { value: n.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sieve_counts_and_membership() {
        let s = PrimeSieve::new(100);
        assert_eq!(s.count(), 25);
        assert!(s.is_prime(2));
        assert!(s.is_prime(97));
        assert!(!s.is_prime(1));
        assert!(!s.is_prime(91));
        let listed: Vec<u64> = s.primes().take(5).collect();
        assert_eq!(listed, vec![2, 3, 5, 7, 11]);
    }

    #[test]
    fn sieve_agrees_with_miller_rabin() {
        let s = PrimeSieve::new(10_000);
        for i in 0..=10_000u64 {
            assert_eq!(s.is_prime(i), is_prime_u64(i), "disagreement at {i}");
        }
    }

    #[test]
    fn factorization_round_trips() {
        for n in [1u64, 2, 360, 97, 1_000_003, 600_851_475_143, 2u64.pow(61) - 1] {
            let f = factorize_u64(n);
            let back: u64 = f.iter().map(|&(p, e)| p.pow(e)).product();
            assert_eq!(back, n);
            for &(p, _) in &f {
                assert!(is_prime_u64(p));
            }
        }
    }

    #[test]
    fn totients() {
        assert_eq!(totient_u64(12), 4);
        assert_eq!(totient_u64(101), 100);
        assert_eq!(totient_u64(1_000_000), 400_000);
        let sieve = totient_sieve(1000);
        for n in 1..=1000u64 {
            assert_eq!(sieve[n as usize], totient_u64(n), "phi({n})");
        }
    }

    #[test]
    fn squarefree_parts() {
        assert_eq!(squarefree_part_u64(1), 1);
        assert_eq!(squarefree_part_u64(8), 2);
        assert_eq!(squarefree_part_u64(36), 1);
        assert_eq!(squarefree_part_u64(12), 3);
        let n = BigInt::from(2) * BigInt::from(3).pow(5);
        assert_eq!(squarefree_part_big(&n).unwrap(), BigInt::from(6));
    }
}
