//! Exact arithmetic primitives: primes, von Mangoldt, Möbius, totient,
//! distinct-prime counting and primorials.
//!
//! Logarithms are natural logarithms throughout the crate.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// All primes up to `limit`, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
}

/// Sieve of Eratosthenes over odd numbers. A limit below 2 gives an empty table.
pub fn sieve_primes(limit: u64) -> PrimeTable {
    if limit < 2 {
        return PrimeTable {
            limit,
            primes: Vec::new(),
        };
    }
    let n = usize::try_from(limit).expect("sieve limit exceeds address space");
    // index i stands for 2i + 1
    let half = n / 2 + 1;
    let mut composite = vec![false; half];
    composite[0] = true;
    let mut i = 1;
    while (2 * i + 1) * (2 * i + 1) <= n {
        if !composite[i] {
            let p = 2 * i + 1;
            let mut j = p * p / 2;
            while j < half {
                composite[j] = true;
                j += p;
            }
        }
        i += 1;
    }
    let mut primes = vec![2u64];
    primes.extend(
        composite
            .iter()
            .enumerate()
            .filter(|&(i, &c)| !c && 2 * i < n)
            .map(|(i, _)| (2 * i + 1) as u64),
    );
    PrimeTable { limit, primes }
}

impl PrimeTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// Primes strictly below the real cutoff `z`.
    pub fn primes_below(&self, z: f64) -> &[u64] {
        let end = self.primes.partition_point(|&p| (p as f64) < z);
        &self.primes[..end]
    }

    /// `true` if the table holds every prime strictly below `z`.
    pub fn covers_below(&self, z: f64) -> bool {
        z <= self.limit as f64 + 1.0
    }

    /// Membership test; only meaningful for `n <= limit`.
    pub fn contains(&self, n: u64) -> bool {
        self.primes.binary_search(&n).is_ok()
    }

    /// Prime factorisation `(prime, exponent)` by trial division against the
    /// table. Needs `limit^2 >= n` unless the leftover cofactor is 1.
    pub fn factorize(&self, n: u64) -> Result<Vec<(u64, u32)>> {
        if n == 0 {
            return Err(Error::Domain("factorisation of 0"));
        }
        let mut rest = n;
        let mut out = Vec::new();
        for &p in &self.primes {
            if p.saturating_mul(p) > rest {
                break;
            }
            if rest.is_multiple_of(p) {
                let mut e = 0;
                while rest.is_multiple_of(p) {
                    rest /= p;
                    e += 1;
                }
                out.push((p, e));
            }
        }
        if rest > 1 {
            let last = self.primes.last().copied().unwrap_or(1);
            if (last as u128) * (last as u128) < rest as u128 && !is_prime_u64(rest) {
                return Err(Error::Range("prime table too small to factor input"));
            }
            out.push((rest, 1));
        }
        Ok(out)
    }

    pub fn mobius(&self, n: u64) -> Result<i8> {
        let f = self.factorize(n)?;
        if f.iter().any(|&(_, e)| e > 1) {
            Ok(0)
        } else if f.len() % 2 == 0 {
            Ok(1)
        } else {
            Ok(-1)
        }
    }

    pub fn euler_phi(&self, n: u64) -> Result<u64> {
        Ok(self
            .factorize(n)?
            .iter()
            .fold(n, |acc, &(p, _)| acc / p * (p - 1)))
    }

    pub fn omega_distinct(&self, n: u64) -> Result<u32> {
        Ok(self.factorize(n)?.len() as u32)
    }

    pub fn is_squarefree(&self, n: u64) -> Result<bool> {
        Ok(self.mobius(n)? != 0)
    }
}

/// Euler's totient for every `n <= limit` (entry 0 is 0).
pub fn totients_up_to(limit: usize) -> Vec<u64> {
    let mut phi: Vec<u64> = (0..=limit as u64).collect();
    for p in 2..=limit {
        if phi[p] == p as u64 {
            let mut m = p;
            while m <= limit {
                phi[m] -= phi[m] / p as u64;
                m += p;
            }
        }
    }
    phi
}

/// Product of all primes strictly below `w`.
///
/// The largest cutoff that fits `u64` is `w = 53`: the product of the primes
/// below 53 is about 6.1e17, and multiplying in 53 overflows.
pub fn primorial(w: f64) -> Result<u64> {
    if w.is_nan() || w <= 1.0 {
        return Err(Error::Domain("primorial cutoff must exceed 1"));
    }
    let mut acc: u64 = 1;
    for p in 2u64.. {
        if (p as f64) >= w {
            break;
        }
        if is_prime_u64(p) {
            acc = acc.checked_mul(p).ok_or(Error::Range(
                "primorial exceeds 64 bits (cutoff must be <= 53)",
            ))?;
        }
    }
    Ok(acc)
}

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
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

/// Deterministic Miller–Rabin, valid for every 64-bit input
/// (Jim Sinclair's seven-base set).
pub fn is_prime_u64(n: u64) -> bool {
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    const BASES: [u64; 7] = [2, 325, 9375, 28178, 450775, 9780504, 1795265022];
    if n < 2 {
        return false;
    }
    for p in SMALL {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    if n < 37 * 37 {
        return true;
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in BASES {
        let a = a % n;
        if a == 0 {
            continue;
        }
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

fn checked_pow(r: u64, a: u32) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..a {
        acc = acc.checked_mul(r)?;
    }
    Some(acc)
}

/// `floor(n^(1/a))` by binary search with exact integer checks.
pub fn integer_root(n: u64, a: u32) -> u64 {
    assert!(a >= 1, "root index must be positive");
    if a == 1 || n < 2 {
        return n;
    }
    let bits = 64 - n.leading_zeros();
    if a >= bits {
        return 1;
    }
    // lo^a <= n < hi^a
    let mut lo = 1u64 << ((bits - 1) / a);
    let mut hi = 1u64 << (bits / a + 1);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        match checked_pow(mid, a) {
            Some(v) if v <= n => lo = mid,
            _ => hi = mid,
        }
    }
    lo
}

/// The prime `ℓ` with `n = ℓ^a` for some `a >= 1`, or `None`.
///
/// No factorisation is attempted. Small primes are split off directly;
/// otherwise `n` is either prime, or a perfect `e`-th power for a prime
/// exponent `e` whose root is then examined recursively.
pub fn mangoldt_base(n: u64) -> Result<Option<u64>> {
    if n == 0 {
        return Err(Error::Domain("von Mangoldt function at 0"));
    }
    Ok(mangoldt_base_nonzero(n))
}

fn mangoldt_base_nonzero(n: u64) -> Option<u64> {
    const SMALL: [u64; 6] = [2, 3, 5, 7, 11, 13];
    if n == 1 {
        return None;
    }
    for p in SMALL {
        if n.is_multiple_of(p) {
            let mut rest = n;
            while rest.is_multiple_of(p) {
                rest /= p;
            }
            return (rest == 1).then_some(p);
        }
    }
    if is_prime_u64(n) {
        return Some(n);
    }
    // every prime factor is >= 17, so a perfect power has exponent < 16
    for e in [2u32, 3, 5, 7, 11, 13] {
        let r = integer_root(n, e);
        if r < 17 {
            break;
        }
        if checked_pow(r, e) == Some(n) {
            return mangoldt_base_nonzero(r);
        }
    }
    None
}

/// `Λ(n)`: `log ℓ` if `n` is a power of the prime `ℓ`, else 0.
pub fn von_mangoldt(n: u64) -> Result<f64> {
    Ok(mangoldt_base(n)?.map_or(0.0, |p| libm::log(p as f64)))
}

/// Sum of `log ℓ` over a multiset of primes, kept exactly as prime counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LogSum {
    counts: BTreeMap<u64, u32>,
}

impl LogSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, prime: u64) {
        *self.counts.entry(prime).or_insert(0) += 1;
    }

    pub fn extend(&mut self, other: &LogSum) {
        for (&p, &c) in &other.counts {
            *self.counts.entry(p).or_insert(0) += c;
        }
    }

    pub fn terms(&self) -> usize {
        self.counts.values().map(|&c| c as usize).sum()
    }

    pub fn value(&self) -> f64 {
        self.counts
            .iter()
            .map(|(&p, &c)| c as f64 * libm::log(p as f64))
            .sum::<crate::sum::NeumaierSum>()
            .value()
    }
}

/// Tabulated `Λ(n)` for `n <= limit`, falling back to [`von_mangoldt`] above it.
#[derive(Debug, Clone)]
pub struct MangoldtTable {
    values: Vec<f64>,
}

impl MangoldtTable {
    pub fn new(limit: u64) -> Self {
        let primes = sieve_primes(limit);
        let mut values = vec![0.0; limit as usize + 1];
        for &p in primes.primes() {
            let lp = libm::log(p as f64);
            let mut pk = p;
            loop {
                values[pk as usize] = lp;
                match pk.checked_mul(p) {
                    Some(next) if next <= limit => pk = next,
                    _ => break,
                }
            }
        }
        Self { values }
    }

    pub fn limit(&self) -> u64 {
        self.values.len() as u64 - 1
    }

    /// `Λ(n)` for `n >= 1`; `n = 0` is never queried by callers and yields 0.
    #[inline]
    pub fn get(&self, n: u64) -> f64 {
        match self.values.get(n as usize) {
            Some(&v) => v,
            None => von_mangoldt(n).unwrap_or(0.0),
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

/// `Λ`-bases for every `n` in `lo..=hi` (`lo >= 1`) by a segmented sieve.
pub fn mangoldt_segment(lo: u64, hi: u64) -> Result<Vec<Option<u64>>> {
    if lo == 0 {
        return Err(Error::Domain("segment must start at 1 or above"));
    }
    if hi < lo {
        return Ok(Vec::new());
    }
    const MULTI: u64 = u64::MAX;
    let len = (hi - lo + 1) as usize;
    let mut first = vec![0u64; len];
    let small = sieve_primes(integer_root(hi, 2));
    for &p in small.primes() {
        let start = lo.div_ceil(p) * p;
        let mut m = start;
        while m <= hi {
            let slot = &mut first[(m - lo) as usize];
            *slot = if *slot == 0 { p } else { MULTI };
            m += p;
        }
    }
    Ok(first
        .iter()
        .enumerate()
        .map(|(i, &f)| {
            let n = lo + i as u64;
            match f {
                MULTI => None,
                0 => (n >= 2).then_some(n),
                p => {
                    let mut rest = n;
                    while rest.is_multiple_of(p) {
                        rest /= p;
                    }
                    (rest == 1).then_some(p)
                }
            }
        })
        .collect())
}

/// Factorisation by plain trial division, for the small moduli used in
/// residue-class enumerations.
pub fn factor_trial(n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut rest = n;
    let mut d = 2u64;
    while d.saturating_mul(d) <= rest {
        if rest.is_multiple_of(d) {
            let mut e = 0;
            while rest.is_multiple_of(d) {
                rest /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if rest > 1 {
        out.push((rest, 1));
    }
    out
}

/// Prime divisors of a squarefree `k >= 1`, ascending.
pub fn squarefree_primes(k: u64) -> Result<Vec<u64>> {
    if k == 0 {
        return Err(Error::Domain("modulus must be positive"));
    }
    let f = factor_trial(k);
    if f.iter().any(|&(_, e)| e > 1) {
        return Err(Error::Domain("modulus is not squarefree"));
    }
    Ok(f.into_iter().map(|(p, _)| p).collect())
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}
