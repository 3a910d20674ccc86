//! Exact averaging identities over residue-class polynomials
//! `P₀ ∈ (ℤ/kℤ)[t]` of degree at most `d`.
//!
//! Every left-hand side is computed by enumerating all `k^{d+1}` residue
//! polynomials modulo `k` itself; reductions modulo the prime factors of `k`
//! happen per polynomial, so multiplicativity over `k` is observed rather
//! than assumed.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul};

use num_rational::Ratio;
use num_traits::{One, Zero};

use crate::arith::{is_prime_u64, squarefree_primes};
use crate::error::{Error, Result};
use crate::poly::count_roots_residues;

/// Default cap on `k^{d+1}`.
pub const DEFAULT_RESIDUE_BUDGET: u128 = 10_000_000;

pub type Rational = Ratio<i128>;

/// Enumerated value next to its closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Checked<T> {
    pub enumerated: T,
    pub closed_form: T,
}

impl<T: PartialEq> Checked<T> {
    pub fn holds(&self) -> bool {
        self.enumerated == self.closed_form
    }
}

fn check_budget(k: u64, d: u32, budget: u128) -> Result<()> {
    let needed = (k as u128).checked_pow(d + 1).unwrap_or(u128::MAX);
    if needed > budget {
        return Err(Error::Budget {
            what: "residue polynomial enumeration",
            needed,
            budget,
        });
    }
    Ok(())
}

/// Calls `f` with the coefficients `(c_0, …, c_d)` of every residue
/// polynomial modulo `k`.
fn for_each_residue_poly(k: u64, d: u32, mut f: impl FnMut(&[u64])) {
    let mut coeffs = vec![0u64; d as usize + 1];
    loop {
        f(&coeffs);
        let mut i = 0;
        loop {
            if i == coeffs.len() {
                return;
            }
            coeffs[i] += 1;
            if coeffs[i] < k {
                break;
            }
            coeffs[i] = 0;
            i += 1;
        }
    }
}

/// `Σ_{P₀ mod ℓ, deg <= d} ω_{P₀}(ℓ)^j` for `j ∈ {1, 2}`, against the closed
/// forms `ℓ^{d+1}` and `ℓ^d (2ℓ - 1)`.
pub fn omega_moment(prime: u64, d: u32, j: u32, budget: u128) -> Result<Checked<u128>> {
    if !is_prime_u64(prime) {
        return Err(Error::Domain("omega moment modulus is not prime"));
    }
    if !(1..=2).contains(&j) {
        return Err(Error::Domain("omega moment order must be 1 or 2"));
    }
    check_budget(prime, d, budget)?;
    let mut total: u128 = 0;
    for_each_residue_poly(prime, d, |c| {
        total += (count_roots_residues(c, prime) as u128).pow(j);
    });
    let l = prime as u128;
    let closed_form = match j {
        1 => l.pow(d + 1),
        _ => l.pow(d) * (2 * l - 1),
    };
    Ok(Checked {
        enumerated: total,
        closed_form,
    })
}

/// `G(k)` computed directly and as `∏_{ℓ|k} G(ℓ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplicativeAverage<T> {
    pub direct: T,
    pub product: T,
}

/// `G(k) = Σ_{P₀ mod k} ∏_{ℓ|k} g(P₀ mod ℓ, ℓ)` for squarefree `k`.
///
/// `local` receives the reduced coefficients of `P₀ mod ℓ` (ascending) and `ℓ`.
pub fn multiplicative_average<T, G>(
    k: u64,
    d: u32,
    local: G,
    budget: u128,
) -> Result<MultiplicativeAverage<T>>
where
    T: Clone + Zero + One + Add<Output = T> + Mul<Output = T>,
    G: Fn(&[u64], u64) -> T,
{
    let primes = squarefree_primes(k)?;
    check_budget(k, d, budget)?;

    let mut direct = T::zero();
    let mut reduced = vec![0u64; d as usize + 1];
    for_each_residue_poly(k, d, |c| {
        let mut term = T::one();
        for &p in &primes {
            for (r, &ci) in reduced.iter_mut().zip(c) {
                *r = ci % p;
            }
            term = term * local(&reduced, p);
        }
        direct = direct.clone() + term;
    });

    let mut product = T::one();
    for &p in &primes {
        let mut g_p = T::zero();
        for_each_residue_poly(p, d, |c| g_p = g_p.clone() + local(c, p));
        product = product * g_p;
    }
    Ok(MultiplicativeAverage { direct, product })
}

/// `ω/ℓ` as an exact rational.
pub fn omega_over_prime(residues: &[u64], prime: u64) -> Rational {
    Rational::new(count_roots_residues(residues, prime) as i128, prime as i128)
}

/// `2ω/ℓ - ω²/ℓ²`, the local factor of `f̂` for `f = ∏ (1 - ω/ℓ)²`.
pub fn squared_local_factor(residues: &[u64], prime: u64) -> Rational {
    let r = omega_over_prime(residues, prime);
    r * Rational::from_integer(2) - r * r
}

/// `Σ_{P₀ mod k} ∏_{ℓ|k} (2ω/ℓ - ω²/ℓ²)` against `∏_{ℓ|k} (2ℓ^d - 2ℓ^{d-1} + ℓ^{d-2})`.
pub fn squared_factor_sum(k: u64, d: u32, budget: u128) -> Result<Checked<Rational>> {
    if d == 0 {
        return Err(Error::Domain("degree must be at least 1"));
    }
    let avg = multiplicative_average(k, d, squared_local_factor, budget)?;
    let closed_form = squarefree_primes(k)?
        .into_iter()
        .map(|p| {
            let l = Rational::from_integer(p as i128);
            let d = d as i32;
            Rational::from_integer(2) * l.pow(d) - Rational::from_integer(2) * l.pow(d - 1)
                + l.pow(d - 2)
        })
        .fold(Rational::one(), |acc, f| acc * f);
    Ok(Checked {
        enumerated: avg.direct,
        closed_form,
    })
}

/// Squarefree integers in `1..=n`.
pub fn squarefree_up_to(n: u64) -> Vec<u64> {
    (1..=n).filter(|&k| squarefree_primes(k).is_ok()).collect()
}
