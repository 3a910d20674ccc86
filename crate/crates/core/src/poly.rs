//! Integer polynomials, root counting modulo primes and squarefree moduli,
//! and traversal of the family `Poly_d(H)`.
//!
//! `Poly_d(H)` is the set of `c_d t^d + … + c_0` with every `|c_i| <= H` and
//! `c_d > 0`; it has exactly `H (2H+1)^d` members.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::{is_prime_u64, squarefree_primes};
use crate::error::{Error, Result};

/// Integer coefficient vector `(c_0, …, c_d)`; the degree is the index of
/// the last entry.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntPolynomial {
    coeffs: Vec<i64>,
}

impl IntPolynomial {
    pub fn new(coeffs: Vec<i64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Domain("polynomial needs at least one coefficient"));
        }
        Ok(Self { coeffs })
    }

    /// Coefficients in ascending order, `c_0` first.
    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> i64 {
        self.coeffs[self.degree()]
    }

    /// Membership in `Poly_d(H)` for `d = self.degree()`.
    pub fn in_family(&self, height: u64) -> bool {
        self.leading() > 0 && self.coeffs.iter().all(|c| c.unsigned_abs() <= height)
    }

    /// `Σ |c_i| |m|^i`, which bounds every Horner partial value at `m`.
    pub fn value_bound(&self, m: i64) -> Option<u128> {
        let am = m.unsigned_abs() as u128;
        let mut acc: u128 = 0;
        for &c in self.coeffs.iter().rev() {
            acc = acc.checked_mul(am)?.checked_add(c.unsigned_abs() as u128)?;
        }
        Some(acc)
    }

    /// Exact `P(m)` by Horner's rule; refuses inputs whose value bound does
    /// not fit `i64`.
    pub fn eval(&self, m: i64) -> Result<i64> {
        match self.value_bound(m) {
            Some(b) if b <= i64::MAX as u128 => Ok(self.eval_unchecked(m)),
            _ => Err(Error::Range("polynomial value may exceed 64 bits")),
        }
    }

    /// Horner evaluation for callers that already checked [`Self::value_bound`].
    #[inline]
    pub(crate) fn eval_unchecked(&self, m: i64) -> i64 {
        self.coeffs.iter().rev().fold(0i64, |acc, &c| acc * m + c)
    }

    /// `ω_P(ℓ)`: number of residues `r mod ℓ` with `P(r) ≡ 0`. Returns `ℓ`
    /// when every coefficient is divisible by `ℓ`.
    pub fn roots_count_mod_prime(&self, prime: u64) -> Result<u64> {
        if !is_prime_u64(prime) {
            return Err(Error::Domain("root count modulus is not prime"));
        }
        if prime > u32::MAX as u64 {
            return Err(Error::Range("root count modulus exceeds 32 bits"));
        }
        let residues: Vec<u64> = self
            .coeffs
            .iter()
            .map(|&c| c.rem_euclid(prime as i64) as u64)
            .collect();
        Ok(count_roots_residues(&residues, prime))
    }

    /// `ω_P(k)` for squarefree `k`, the product of the prime root counts.
    pub fn roots_count_mod_squarefree(&self, k: u64) -> Result<u64> {
        squarefree_primes(k)?
            .into_iter()
            .try_fold(1u64, |acc, p| Ok(acc * self.roots_count_mod_prime(p)?))
    }
}

/// Root count of a polynomial given by reduced coefficients `0 <= c < ℓ`,
/// for a prime `ℓ < 2^32`. The zero polynomial has `ℓ` roots.
pub fn count_roots_residues(residues: &[u64], prime: u64) -> u64 {
    if residues.iter().all(|&c| c == 0) {
        return prime;
    }
    (0..prime)
        .filter(|&r| {
            residues
                .iter()
                .rev()
                .fold(0u64, |acc, &c| (acc * r + c) % prime)
                == 0
        })
        .count() as u64
}

/// Default cap on `H (2H+1)^d` for exhaustive traversal.
pub const DEFAULT_EXHAUSTIVE_BUDGET: u128 = 100_000_000;

/// Items per traversal chunk. Chunk boundaries depend only on the spec, never
/// on the number of workers, so merged results are identical for any thread
/// count.
pub const CHUNK_LEN: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exhaustive,
    MonteCarlo { samples: u64, seed: u64 },
}

/// Description of `Poly_d(H)` together with how to traverse it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FamilySpec {
    pub degree: u32,
    pub height: u64,
    pub mode: Mode,
    /// Largest family size accepted in exhaustive mode.
    pub budget: u128,
}

impl FamilySpec {
    pub fn exhaustive(degree: u32, height: u64) -> Self {
        Self {
            degree,
            height,
            mode: Mode::Exhaustive,
            budget: DEFAULT_EXHAUSTIVE_BUDGET,
        }
    }

    pub fn monte_carlo(degree: u32, height: u64, samples: u64, seed: u64) -> Self {
        Self {
            degree,
            height,
            mode: Mode::MonteCarlo { samples, seed },
            budget: DEFAULT_EXHAUSTIVE_BUDGET,
        }
    }

    pub fn with_budget(mut self, budget: u128) -> Self {
        self.budget = budget;
        self
    }

    /// `|Poly_d(H)| = H (2H+1)^d`, or `None` on `u128` overflow.
    pub fn cardinality(&self) -> Option<u128> {
        let side = 2 * self.height as u128 + 1;
        (0..self.degree).try_fold(self.height as u128, |acc, _| acc.checked_mul(side))
    }

    /// The leading-order count `2^d H^{d+1}` used to normalise family sums.
    pub fn moment_normalizer(&self) -> f64 {
        libm::pow(2.0, self.degree as f64) * libm::pow(self.height as f64, self.degree as f64 + 1.0)
    }

    /// `(d+1) H x^d`, the largest `|P(m)|` over the family for `|m| <= x`.
    pub fn value_bound(&self, x: u64) -> Option<u128> {
        let mut pow: u128 = 1;
        for _ in 0..self.degree {
            pow = pow.checked_mul(x as u128)?;
        }
        (self.degree as u128 + 1)
            .checked_mul(self.height as u128)?
            .checked_mul(pow)
    }

    /// Check that evaluation at `1..=x` cannot overflow `i64`.
    pub fn check_value_range(&self, x: u64) -> Result<()> {
        match self.value_bound(x) {
            Some(b) if b <= i64::MAX as u128 => Ok(()),
            _ => Err(Error::Range("family values at m <= x may exceed 64 bits")),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.degree == 0 {
            return Err(Error::Domain("family degree must be at least 1"));
        }
        if self.height == 0 || self.height > i64::MAX as u64 / 2 {
            return Err(Error::Domain("family height must be in 1..2^62"));
        }
        match self.mode {
            Mode::Exhaustive => {
                let needed = self.cardinality().unwrap_or(u128::MAX);
                if needed > self.budget {
                    return Err(Error::Budget {
                        what: "exhaustive family traversal",
                        needed,
                        budget: self.budget,
                    });
                }
            }
            Mode::MonteCarlo { samples, .. } => {
                if samples == 0 {
                    return Err(Error::Domain("Monte Carlo needs at least one sample"));
                }
            }
        }
        Ok(())
    }

    /// Number of polynomials a traversal visits.
    pub fn visits(&self) -> u64 {
        match self.mode {
            Mode::Exhaustive => self
                .cardinality()
                .map_or(u64::MAX, |c| u64::try_from(c).unwrap_or(u64::MAX)),
            Mode::MonteCarlo { samples, .. } => samples,
        }
    }

    pub fn chunk_count(&self) -> u64 {
        self.visits().div_ceil(CHUNK_LEN)
    }

    /// The exhaustive member at `index`, in lexicographic order of
    /// `(c_d, c_{d-1}, …, c_0)` with `c_0` varying fastest.
    pub fn member(&self, index: u64) -> IntPolynomial {
        let side = 2 * self.height + 1;
        let h = self.height as i64;
        let mut rest = index;
        let mut coeffs = vec![0i64; self.degree as usize + 1];
        for c in coeffs.iter_mut().take(self.degree as usize) {
            *c = (rest % side) as i64 - h;
            rest /= side;
        }
        coeffs[self.degree as usize] = rest as i64 + 1;
        IntPolynomial { coeffs }
    }

    /// The Monte Carlo draw number `index` for `seed`. Each draw reads its
    /// own ChaCha stream, so any subrange can be regenerated independently.
    pub fn sample(&self, seed: u64, index: u64) -> IntPolynomial {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        self.draw(&mut rng)
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> IntPolynomial {
        let h = self.height as i64;
        let d = self.degree as usize;
        let mut coeffs = Vec::with_capacity(d + 1);
        for _ in 0..d {
            coeffs.push(rng.random_range(-h..=h));
        }
        coeffs.push(rng.random_range(1..=h));
        IntPolynomial { coeffs }
    }
}

/// Accumulation over a family. `merge` must be associative; traversals
/// merge chunk results strictly in chunk order.
pub trait FamilyVisitor {
    type Acc;

    fn empty(&self) -> Self::Acc;

    fn visit(&self, acc: &mut Self::Acc, poly: &IntPolynomial);

    fn merge(&self, left: Self::Acc, right: Self::Acc) -> Self::Acc;
}

/// Visit the members of chunk `chunk` (see [`FamilySpec::chunk_count`]).
pub fn traverse_chunk<V: FamilyVisitor>(spec: &FamilySpec, visitor: &V, chunk: u64) -> V::Acc {
    let start = chunk * CHUNK_LEN;
    let end = (start + CHUNK_LEN).min(spec.visits());
    let mut acc = visitor.empty();
    match spec.mode {
        Mode::Exhaustive => {
            if start >= end {
                return acc;
            }
            let h = spec.height as i64;
            let mut poly = spec.member(start);
            for i in start..end {
                visitor.visit(&mut acc, &poly);
                if i + 1 < end {
                    // odometer step, c_0 fastest
                    for c in poly.coeffs.iter_mut() {
                        if *c < h {
                            *c += 1;
                            break;
                        }
                        *c = -h;
                    }
                }
            }
        }
        Mode::MonteCarlo { seed, .. } => {
            let base = ChaCha8Rng::seed_from_u64(seed);
            for i in start..end {
                let mut rng = base.clone();
                rng.set_stream(i);
                let poly = spec.draw(&mut rng);
                visitor.visit(&mut acc, &poly);
            }
        }
    }
    acc
}

/// Sequential traversal of the whole family.
pub fn traverse_family<V: FamilyVisitor>(spec: &FamilySpec, visitor: &V) -> Result<V::Acc> {
    spec.validate()?;
    let mut acc = visitor.empty();
    for chunk in 0..spec.chunk_count() {
        let part = traverse_chunk(spec, visitor, chunk);
        acc = visitor.merge(acc, part);
    }
    Ok(acc)
}
