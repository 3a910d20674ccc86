//! Truncated singular series and the Euler products and totient sums that
//! describe their family averages.

use crate::arith::{sieve_primes, totients_up_to, PrimeTable};
use crate::error::{Error, Result};
use crate::poly::IntPolynomial;
use crate::sum::{CompensatedProduct, NeumaierSum};

/// Cutoff at which the infinite product `∏ (1 + 1/(ℓ(ℓ-1)))` is served.
pub const REFERENCE_CUTOFF: f64 = 1e5;

/// A real truncation parameter `z > 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct TruncationPoint(f64);

impl TruncationPoint {
    pub fn new(z: f64) -> Result<Self> {
        if z > 1.0 && z.is_finite() {
            Ok(Self(z))
        } else {
            Err(Error::Domain(
                "truncation point must be a finite real above 1",
            ))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

fn primes_for(table: &PrimeTable, z: TruncationPoint) -> Result<&[u64]> {
    if !table.covers_below(z.get()) {
        return Err(Error::Range(
            "prime table does not reach the truncation point",
        ));
    }
    Ok(table.primes_below(z.get()))
}

/// The local factor `(1 - 1/ℓ)^{-1} (1 - ω_P(ℓ)/ℓ) = (ℓ - ω_P(ℓ)) / (ℓ - 1)`.
pub fn bh_factor(poly: &IntPolynomial, prime: u64) -> Result<f64> {
    let omega = poly.roots_count_mod_prime(prime)?;
    Ok((prime - omega) as f64 / (prime - 1) as f64)
}

/// `𝔖_P(z) = ∏_{ℓ<z} (1 - 1/ℓ)^{-1} (1 - ω_P(ℓ)/ℓ)`, multiplied in ascending `ℓ`.
pub fn truncated_bh_constant(
    poly: &IntPolynomial,
    z: TruncationPoint,
    table: &PrimeTable,
) -> Result<f64> {
    let mut acc = CompensatedProduct::new();
    for &p in primes_for(table, z)? {
        acc.mul(bh_factor(poly, p)?);
    }
    Ok(acc.value())
}

/// `∏_{ℓ<z} (1 + 1/(ℓ(ℓ-1)))`.
pub fn reference_product(z: TruncationPoint, table: &PrimeTable) -> Result<f64> {
    let mut acc = CompensatedProduct::new();
    for &p in primes_for(table, z)? {
        let q = (p * (p - 1)) as f64;
        acc.mul((q + 1.0) / q);
    }
    Ok(acc.value())
}

/// The full product `∏_ℓ (1 + 1/(ℓ(ℓ-1)))`, served as its truncation at
/// [`REFERENCE_CUTOFF`].
pub fn reference_constant() -> f64 {
    let table = sieve_primes(REFERENCE_CUTOFF as u64);
    reference_product(TruncationPoint(REFERENCE_CUTOFF), &table).expect("table covers the cutoff")
}

/// `S₁ = Σ_{t<=x} t/φ(t)` and `S₂ = Σ_{t<=x} t²/φ(t)` with their predicted
/// main terms `x C` and `x² C / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TotientSums {
    pub s1: f64,
    pub s2: f64,
    pub main1: f64,
    pub main2: f64,
}

pub fn totient_ratio_sums(x: u64) -> Result<TotientSums> {
    if x == 0 {
        return Err(Error::Domain("totient sums need x >= 1"));
    }
    let phi = totients_up_to(x as usize);
    let mut s1 = NeumaierSum::new();
    let mut s2 = NeumaierSum::new();
    for t in 1..=x {
        let r = t as f64 / phi[t as usize] as f64;
        s1 += r;
        s2 += r * t as f64;
    }
    let c = reference_constant();
    let xf = x as f64;
    Ok(TotientSums {
        s1: s1.value(),
        s2: s2.value(),
        main1: xf * c,
        main2: xf * xf / 2.0 * c,
    })
}

/// `Σ_{1<=m₁<m₂<=x} (m₂-m₁)/φ(m₂-m₁) = Σ_{t<x} (x-t) t/φ(t)`; zero for `x < 2`.
pub fn nondiagonal_phi_sum(x: u64) -> f64 {
    if x < 2 {
        return 0.0;
    }
    let phi = totients_up_to(x as usize);
    (1..x)
        .map(|t| (x - t) as f64 * (t as f64 / phi[t as usize] as f64))
        .sum::<NeumaierSum>()
        .value()
}
