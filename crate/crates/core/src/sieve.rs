//! Brun-type sieve weights, their sandwich property, weighted sieve sums and
//! Hooley's neutraliser bounds for truncated Euler products.
//!
//! The weights are Bonferroni truncations of the Möbius function on the
//! squarefree divisors of `𝒫(w)`: `λ_k = μ(k)` when `ω(k) <= m`, else 0. An
//! even level `m` gives an upper sieve, an odd level a lower sieve. For every
//! `n`, with `r` the number of primes below `w` dividing `n`,
//!
//! ```text
//! Σ_{k|n} λ_k = Σ_{j<=m} (-1)^j C(r, j) = (-1)^m C(r-1, m)   (r >= 1)
//! ```
//!
//! so the divisor sums bracket `𝟙_{(n, 𝒫(w)) = 1}`.

use alloc::vec::Vec;

use crate::arith::{primorial, sieve_primes};
use crate::error::{Error, Result};
use crate::euler::TruncationPoint;
use crate::poly::IntPolynomial;
use crate::sum::{CompensatedProduct, NeumaierSum};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Upper,
    Lower,
}

/// One support point: `k`, its prime factors as a bitmask over the primes
/// below `w`, and `λ_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightEntry {
    pub k: u64,
    pub mask: u32,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SieveWeights {
    w: f64,
    y: f64,
    parity: Parity,
    level: u32,
    primes: Vec<u64>,
    entries: Vec<WeightEntry>,
}

/// Largest `m` with `w^m <= y`, capped at `limit`.
fn support_level_cap(w: f64, y: f64, limit: u32) -> u32 {
    let mut m = 0;
    while m < limit && libm::pow(w, (m + 1) as f64) <= y {
        m += 1;
    }
    m
}

/// Bonferroni weights for prime cutoff `w` and support cutoff `y`.
///
/// The level is the largest integer of the right parity with `w^m <= y`, so
/// every retained `k` (a product of at most `m` primes below `w`) lies below
/// `y`. When `w^{π(w)} <= y` the truncation is inactive and both parities
/// get the full Möbius function. An upper level below 2 leaves `{λ₁ = 1}`.
/// A lower sieve needs level 1 at least, so `w > y` is refused.
pub fn build_brun_weights(w: f64, y: f64, parity: Parity) -> Result<SieveWeights> {
    let primes = cutoff_primes(w, y)?;
    let count = primes.len() as u32;
    let cap = support_level_cap(w, y, count);
    let level = if cap >= count {
        count
    } else {
        match parity {
            Parity::Upper if cap % 2 == 1 => cap - 1,
            Parity::Lower if cap.is_multiple_of(2) => {
                if cap == 0 {
                    return Err(Error::Domain(
                        "lower sieve needs w <= y so that primes below w are retained",
                    ));
                }
                cap - 1
            }
            _ => cap,
        }
    };
    assemble(w, y, parity, level, primes)
}

/// Bonferroni weights at an explicit level. The level must match the parity
/// (even for upper, odd for lower) unless it covers every prime below `w`,
/// and every retained `k` must be below `y`.
pub fn build_brun_weights_with_level(
    w: f64,
    y: f64,
    parity: Parity,
    level: u32,
) -> Result<SieveWeights> {
    let primes = cutoff_primes(w, y)?;
    let full = level >= primes.len() as u32;
    let parity_ok = match parity {
        Parity::Upper => level.is_multiple_of(2),
        Parity::Lower => level % 2 == 1,
    };
    if !full && !parity_ok {
        return Err(Error::Domain(
            "sieve level parity does not match the sieve side",
        ));
    }
    let weights = assemble(w, y, parity, level.min(primes.len() as u32), primes)?;
    if weights.entries.iter().any(|e| e.k as f64 >= y) {
        return Err(Error::Domain(
            "sieve level retains divisors beyond the support cutoff",
        ));
    }
    Ok(weights)
}

fn cutoff_primes(w: f64, y: f64) -> Result<Vec<u64>> {
    if w.is_nan() || y.is_nan() || w < 2.0 || y < 2.0 {
        return Err(Error::Domain("sieve weights need w >= 2 and y >= 2"));
    }
    // range check only: the primorial itself is never stored
    primorial(w)?;
    let table = sieve_primes(w as u64 + 1);
    Ok(table.primes_below(w).to_vec())
}

fn assemble(w: f64, y: f64, parity: Parity, level: u32, primes: Vec<u64>) -> Result<SieveWeights> {
    let mut entries = Vec::new();
    for mask in 0u32..(1u32 << primes.len()) {
        let omega = mask.count_ones();
        if omega > level {
            continue;
        }
        let k = primes
            .iter()
            .enumerate()
            .filter(|&(i, _)| mask & (1 << i) != 0)
            .map(|(_, &p)| p)
            .product::<u64>();
        let weight = if omega % 2 == 0 { 1.0 } else { -1.0 };
        entries.push(WeightEntry { k, mask, weight });
    }
    entries.sort_by_key(|e| e.k);
    Ok(SieveWeights {
        w,
        y,
        parity,
        level,
        primes,
        entries,
    })
}

impl SieveWeights {
    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// Maximal number of prime factors retained.
    pub fn level(&self) -> u32 {
        self.level
    }

    /// The primes below `w`.
    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Support points in ascending `k`.
    pub fn support(&self) -> &[WeightEntry] {
        &self.entries
    }

    /// `λ_k`, zero off the support.
    pub fn weight(&self, k: u64) -> f64 {
        self.entries
            .binary_search_by_key(&k, |e| e.k)
            .map_or(0.0, |i| self.entries[i].weight)
    }

    /// `true` when the weights are the full Möbius function on divisors of `𝒫(w)`.
    pub fn is_untruncated(&self) -> bool {
        self.level as usize >= self.primes.len()
    }

    /// `Σ_{k|n} λ_k`.
    pub fn divisor_sum(&self, n: u64) -> f64 {
        self.entries
            .iter()
            .filter(|e| n.is_multiple_of(e.k))
            .map(|e| e.weight)
            .sum::<NeumaierSum>()
            .value()
    }

    fn mask_product(&self, mask: u32, local: &impl Fn(u64) -> f64) -> f64 {
        let mut acc = 1.0;
        for (i, &p) in self.primes.iter().enumerate() {
            if mask & (1 << i) != 0 {
                acc *= local(p);
            }
        }
        acc
    }

    /// `Σ_k λ_k ∏_{ℓ|k} local(ℓ)`.
    fn weighted_sum(&self, local: impl Fn(u64) -> f64) -> f64 {
        self.entries
            .iter()
            .map(|e| e.weight * self.mask_product(e.mask, &local))
            .sum::<NeumaierSum>()
            .value()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub n: u64,
    pub lower_sum: f64,
    pub indicator: f64,
    pub upper_sum: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichReport {
    pub checked: u64,
    pub violations: u64,
    pub first_violation: Option<Violation>,
}

impl SandwichReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Checks `Σ_{k|n} λ⁻_k <= 𝟙 <= Σ_{k|n} λ⁺_k` for all `1 <= n <= n_max`, where
/// the indicator is `𝟙_{(n, 𝒫(w)) = 1}`. On divisors of `𝒫(w)`, the integers
/// the neutraliser bounds are applied to, this is `𝟙_{n = 1}`.
pub fn sandwich_check(
    upper: &SieveWeights,
    lower: &SieveWeights,
    n_max: u64,
) -> Result<SandwichReport> {
    if upper.primes != lower.primes || upper.y != lower.y {
        return Err(Error::Domain(
            "sandwich needs weights built with identical w and y",
        ));
    }
    let len = n_max as usize + 1;
    let sums = |weights: &SieveWeights| {
        let mut s = alloc::vec![0.0f64; len];
        for e in &weights.entries {
            let mut m = e.k as usize;
            while m < len {
                s[m] += e.weight;
                m += e.k as usize;
            }
        }
        s
    };
    let up = sums(upper);
    let lo = sums(lower);
    let mut report = SandwichReport {
        checked: 0,
        violations: 0,
        first_violation: None,
    };
    for n in 1..=n_max {
        let indicator = if upper.primes.iter().any(|&p| n % p == 0) {
            0.0
        } else {
            1.0
        };
        let (l, u) = (lo[n as usize], up[n as usize]);
        report.checked += 1;
        if !(l <= indicator && indicator <= u) {
            report.violations += 1;
            report.first_violation.get_or_insert(Violation {
                n,
                lower_sum: l,
                indicator,
                upper_sum: u,
            });
        }
    }
    Ok(report)
}

/// `Σ_{k|𝒫(w)} λ_k h(k)` with `h` multiplicative, given by its prime values.
pub fn sieve_sum(weights: &SieveWeights, h: impl Fn(u64) -> f64) -> f64 {
    weights.weighted_sum(h)
}

/// `∏_{ℓ<w} (1 - h(ℓ))`, the target of [`sieve_sum`].
pub fn sieve_product(weights: &SieveWeights, h: impl Fn(u64) -> f64) -> f64 {
    let mut acc = CompensatedProduct::new();
    for &p in &weights.primes {
        acc.mul(1.0 - h(p));
    }
    acc.value()
}

/// Which multiplicative `f` the neutraliser bounds bracket.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NeutraliserVariant {
    /// `f(ℓ) = (1 - ω_P(ℓ)/ℓ)²`, `f̂(ℓ) = 2ω/ℓ - ω²/ℓ²`.
    Squared,
    /// `f(ℓ) = 1 - ω_P(ℓ)/ℓ`, `f̂(k) = ω_P(k)/k`.
    FirstPower,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeutralisedBounds {
    pub lower: f64,
    /// `f(𝒫(z)) = ∏_{ℓ<z} f(ℓ)`, evaluated directly.
    pub direct: f64,
    pub upper: f64,
}

impl NeutralisedBounds {
    /// Bracket check with a relative slack for floating-point accumulation.
    pub fn brackets(&self, rel_tol: f64) -> bool {
        let slack = rel_tol
            * self
                .direct
                .abs()
                .max(self.lower.abs())
                .max(self.upper.abs());
        self.lower <= self.direct + slack && self.direct <= self.upper + slack
    }
}

/// `Σ_{k|𝒫(z)} λ⁻_k f̂(k) <= f(𝒫(z)) <= Σ_{k|𝒫(z)} λ⁺_k f̂(k)` for the
/// variant's `f`; the weights must be built with prime cutoff `z`.
pub fn neutralised_bounds(
    poly: &IntPolynomial,
    z: TruncationPoint,
    upper: &SieveWeights,
    lower: &SieveWeights,
    variant: NeutraliserVariant,
) -> Result<NeutralisedBounds> {
    let table = sieve_primes(z.get() as u64 + 1);
    let primes = table.primes_below(z.get());
    if upper.primes != primes || lower.primes != primes {
        return Err(Error::Domain(
            "neutraliser weights must be built with w = z",
        ));
    }
    let mut ratios = Vec::with_capacity(primes.len());
    for &p in primes {
        let omega = poly.roots_count_mod_prime(p)?;
        ratios.push((p, omega as f64 / p as f64));
    }
    let r = |p: u64| {
        ratios
            .iter()
            .find(|&&(q, _)| q == p)
            .map_or(0.0, |&(_, v)| v)
    };
    type Local = fn(f64) -> f64;
    let (f, f_hat): (Local, Local) = match variant {
        NeutraliserVariant::Squared => (|r| (1.0 - r) * (1.0 - r), |r| 2.0 * r - r * r),
        NeutraliserVariant::FirstPower => (|r| 1.0 - r, |r| r),
    };
    let mut direct = CompensatedProduct::new();
    for &(_, v) in &ratios {
        direct.mul(f(v));
    }
    Ok(NeutralisedBounds {
        lower: lower.weighted_sum(|p| f_hat(r(p))),
        direct: direct.value(),
        upper: upper.weighted_sum(|p| f_hat(r(p))),
    })
}

/// `∏_{y₁<=ℓ<y₂} (1 - h(ℓ))^{-1} / (log y₂ / log y₁)^κ`, the left side of the
/// dimension-`κ` sieve condition divided by its main factor.
pub fn mertens_ratio(h: impl Fn(u64) -> f64, kappa: f64, y1: f64, y2: f64) -> Result<f64> {
    if !(2.0 <= y1 && y1 < y2) {
        return Err(Error::Domain("mertens probe needs 2 <= y1 < y2"));
    }
    let table = sieve_primes(y2 as u64 + 1);
    let mut prod = CompensatedProduct::new();
    for &p in table.primes_below(y2) {
        if (p as f64) >= y1 {
            prod.mul(1.0 / (1.0 - h(p)));
        }
    }
    Ok(prod.value() / libm::pow(libm::log(y2) / libm::log(y1), kappa))
}
