//! ψ-sums over polynomial values, primes in progressions, and the second
//! moment of `ψ_P(x) - x 𝔖_P(z)` over `Poly_d(H)` with its four-term
//! decomposition
//!
//! ```text
//! Σ_P |ψ - x𝔖|² = Σ_P Σ_m Λ_m² + Σ_P Σ_{m₁≠m₂} Λ_{m₁}Λ_{m₂} - 2x Σ_P ψ𝔖 + x² Σ_P 𝔖².
//! ```

use alloc::vec::Vec;

use crate::arith::{
    gcd, mangoldt_base, mangoldt_segment, sieve_primes, totients_up_to, LogSum, MangoldtTable,
};
use crate::error::{Error, Result};
use crate::euler::{nondiagonal_phi_sum, reference_product, TruncationPoint, REFERENCE_CUTOFF};
use crate::poly::{traverse_family, FamilySpec, FamilyVisitor, IntPolynomial, Mode};
use crate::sum::{CompensatedProduct, NeumaierSum};

/// Which von Mangoldt sum over `P(1), …, P(x)` is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsiKind {
    /// `ψ_P(x) = Σ_{1<=m<=x, P(m)>0} Λ(P(m))`.
    Plain,
    /// `ψ^abs_P(x) = Σ_{P(m)≠0} Λ(|P(m)|)` over `1 < m <= x`.
    Abs,
    /// `ψ^abs_P(x)` with the range `1 <= m <= x`.
    AbsFromOne,
}

impl PsiKind {
    fn first_m(self) -> u64 {
        match self {
            PsiKind::Abs => 2,
            PsiKind::Plain | PsiKind::AbsFromOne => 1,
        }
    }

    /// The integer whose `Λ` counts at a value `P(m)`, if any.
    #[inline]
    fn argument(self, value: i64) -> Option<u64> {
        match self {
            PsiKind::Plain => (value > 0).then_some(value as u64),
            PsiKind::Abs | PsiKind::AbsFromOne => (value != 0).then_some(value.unsigned_abs()),
        }
    }
}

fn values(poly: &IntPolynomial, first: u64, x: u64) -> Result<impl Iterator<Item = i64> + '_> {
    if x > 0 {
        let m = i64::try_from(x).map_err(|_| Error::Range("x exceeds 63 bits"))?;
        match poly.value_bound(m) {
            Some(b) if b <= i64::MAX as u128 => {}
            _ => return Err(Error::Range("polynomial values up to x may exceed 64 bits")),
        }
    }
    Ok((first..=x).map(move |m| poly.eval_unchecked(m as i64)))
}

/// The primes `ℓ` contributing `log ℓ` to the chosen ψ-sum, kept exactly.
pub fn psi_terms(poly: &IntPolynomial, x: u64, kind: PsiKind) -> Result<LogSum> {
    let mut out = LogSum::new();
    for v in values(poly, kind.first_m(), x)? {
        if let Some(n) = kind.argument(v) {
            if let Some(p) = mangoldt_base(n)? {
                out.push(p);
            }
        }
    }
    Ok(out)
}

/// The primes contributing to `Σ_{m<=x, P(m)<0} Λ(-P(m))`.
pub fn negative_terms(poly: &IntPolynomial, x: u64) -> Result<LogSum> {
    let mut out = LogSum::new();
    for v in values(poly, 1, x)? {
        if v < 0 {
            if let Some(p) = mangoldt_base(v.unsigned_abs())? {
                out.push(p);
            }
        }
    }
    Ok(out)
}

fn mangoldt_sum(
    poly: &IntPolynomial,
    first: u64,
    x: u64,
    arg: impl Fn(i64) -> Option<u64>,
) -> Result<f64> {
    let mut acc = NeumaierSum::new();
    for v in values(poly, first, x)? {
        if let Some(n) = arg(v) {
            if let Some(p) = mangoldt_base(n)? {
                acc += libm::log(p as f64);
            }
        }
    }
    Ok(acc.value())
}

/// `ψ_P(x) = Σ_{1<=n<=x, P(n)>0} Λ(P(n))`.
pub fn psi(poly: &IntPolynomial, x: u64) -> Result<f64> {
    mangoldt_sum(poly, 1, x, |v| PsiKind::Plain.argument(v))
}

/// `ψ^abs_P(x)`; `from_one` selects the range `1 <= m <= x` instead of `1 < m <= x`.
pub fn psi_abs(poly: &IntPolynomial, x: u64, from_one: bool) -> Result<f64> {
    let kind = if from_one {
        PsiKind::AbsFromOne
    } else {
        PsiKind::Abs
    };
    mangoldt_sum(poly, kind.first_m(), x, |v| kind.argument(v))
}

/// `θ_P(x) = Σ_{1<=n<=x, P(n) prime} log P(n)`.
pub fn theta(poly: &IntPolynomial, x: u64) -> Result<f64> {
    let mut acc = NeumaierSum::new();
    for v in values(poly, 1, x)? {
        if v > 1 && crate::arith::is_prime_u64(v as u64) {
            acc += libm::log(v as f64);
        }
    }
    Ok(acc.value())
}

/// `Σ_{1<=m<=x, P(m)<0} Λ(-P(m))`.
pub fn negative_part(poly: &IntPolynomial, x: u64) -> Result<f64> {
    mangoldt_sum(poly, 1, x, |v| (v < 0).then_some(v.unsigned_abs()))
}

/// `Λ` on `1..=X` for progression sums.
#[derive(Debug, Clone)]
pub struct ProgressionTable {
    table: MangoldtTable,
}

/// Default cap on `X · Q` for [`bv_average`].
pub const DEFAULT_BV_WORK_BUDGET: u128 = 1_000_000_000;

impl ProgressionTable {
    pub fn new(x_max: u64) -> Self {
        Self {
            table: MangoldtTable::new(x_max.max(1)),
        }
    }

    pub fn limit(&self) -> u64 {
        self.table.limit()
    }

    /// `E(X; q, b) = Σ_{0<n<=X, n≡b (q)} Λ(n) - X/φ(q) · 𝟙_{(q,b)=1}`.
    pub fn ap_error(&self, x: u64, q: u64, b: i64) -> Result<f64> {
        if q == 0 {
            return Err(Error::Domain("modulus must be positive"));
        }
        if x > self.limit() {
            return Err(Error::Range("X beyond the progression table"));
        }
        let r = b.rem_euclid(q as i64) as u64;
        let lam = self.table.as_slice();
        let mut acc = NeumaierSum::new();
        let mut n = if r == 0 { q } else { r };
        while n <= x {
            acc += lam[n as usize];
            n += q;
        }
        let main = if gcd(q, r) == 1 {
            x as f64 / totients_up_to(q as usize)[q as usize] as f64
        } else {
            0.0
        };
        Ok(acc.value() - main)
    }

    /// `Σ_{q<=Q} max_{1<=Y<=X} max_{b ∈ (ℤ/qℤ)^×} |E(Y; q, b)|` over integer `Y`.
    ///
    /// Within one class `S_b(Y)` is constant between members while `Y/φ(q)`
    /// grows, so the extremes sit at members and just before the next one.
    pub fn bv_average(&self, x: u64, big_q: u64, budget: u128) -> Result<f64> {
        if x == 0 || big_q == 0 {
            return Err(Error::Domain("bv_average needs X >= 1 and Q >= 1"));
        }
        if big_q > x {
            return Err(Error::Domain("bv_average needs Q <= X"));
        }
        let needed = x as u128 * big_q as u128;
        if needed > budget {
            return Err(Error::Budget {
                what: "Bombieri-Vinogradov average (X*Q)",
                needed,
                budget,
            });
        }
        if x > self.limit() {
            return Err(Error::Range("X beyond the progression table"));
        }
        let lam = self.table.as_slice();
        let phi = totients_up_to(big_q as usize);
        let mut total = NeumaierSum::new();
        for q in 1..=big_q {
            let phi_q = phi[q as usize] as f64;
            let mut best = 0.0f64;
            for b in 0..q {
                if gcd(q, b) != 1 {
                    continue;
                }
                let first = if b == 0 { q } else { b };
                if first > 1 {
                    best = best.max(((first - 1).min(x)) as f64 / phi_q);
                }
                let mut s = 0.0;
                let mut n = first;
                while n <= x {
                    s += lam[n as usize];
                    best = best.max((s - n as f64 / phi_q).abs());
                    let before_next = (n + q - 1).min(x);
                    best = best.max((s - before_next as f64 / phi_q).abs());
                    n += q;
                }
            }
            total += best;
        }
        Ok(total.value())
    }
}

/// `E(X; q, b)` with a one-off table.
pub fn ap_error(x: u64, q: u64, b: i64) -> Result<f64> {
    ProgressionTable::new(x).ap_error(x, q, b)
}

/// Bombieri–Vinogradov-type average with a one-off table.
pub fn bv_average(x: u64, big_q: u64, budget: u128) -> Result<f64> {
    ProgressionTable::new(x).bv_average(x, big_q, budget)
}

/// `Σ_{c₀∈[-H,H], c₀+N≠0} Λ(|c₀+N|)²` with its predicted main term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalTerm {
    pub value: f64,
    /// `2H log H`.
    pub main: f64,
    /// `(value - 2H log H) / (H log log H)`.
    pub ratio: f64,
}

pub fn diagonal_term(shift: i64, height: u64) -> Result<DiagonalTerm> {
    if height == 0 {
        return Err(Error::Domain("height must be positive"));
    }
    let lo = shift as i128 - height as i128;
    let hi = shift as i128 + height as i128;
    if lo.unsigned_abs().max(hi.unsigned_abs()) > 1u128 << 63 {
        return Err(Error::Range("diagonal values exceed 2^63"));
    }
    let mut acc = NeumaierSum::new();
    let mut add_segment = |a: i128, b: i128| -> Result<()> {
        if a <= b {
            for base in mangoldt_segment(a as u64, b as u64)?.into_iter().flatten() {
                let l = libm::log(base as f64);
                acc += l * l;
            }
        }
        Ok(())
    };
    // positive values c₀+N in [max(1, lo), hi]
    add_segment(lo.max(1), hi)?;
    // negative values, by absolute value
    add_segment((-hi).max(1), -lo)?;
    let h = height as f64;
    let main = 2.0 * h * libm::log(h);
    let value = acc.value();
    Ok(DiagonalTerm {
        value,
        main,
        ratio: (value - main) / (h * libm::log(libm::log(h))),
    })
}

/// Largest `Λ` table a moment computation builds; larger values fall back to
/// pointwise evaluation.
const MOMENT_TABLE_CAP: u64 = 1 << 21;

/// Compensated running sums for the second-moment experiment.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MomentAcc {
    pub count: u64,
    pub diag: NeumaierSum,
    pub nondiag: NeumaierSum,
    pub cross: NeumaierSum,
    pub ssq: NeumaierSum,
    pub direct: NeumaierSum,
    pub direct_sq: NeumaierSum,
    pub nondiag_sq: NeumaierSum,
}

impl MomentAcc {
    pub fn merge(self, o: Self) -> Self {
        Self {
            count: self.count + o.count,
            diag: self.diag + o.diag,
            nondiag: self.nondiag + o.nondiag,
            cross: self.cross + o.cross,
            ssq: self.ssq + o.ssq,
            direct: self.direct + o.direct,
            direct_sq: self.direct_sq + o.direct_sq,
            nondiag_sq: self.nondiag_sq + o.nondiag_sq,
        }
    }
}

/// Per-polynomial work of [`second_moment`], usable by any traversal driver.
#[derive(Debug, Clone)]
pub struct MomentVisitor {
    x: u64,
    kind: PsiKind,
    /// Primes below `z`; `None` means the uncentred moment (`𝔖 ≡ 0`).
    center_primes: Option<Vec<u64>>,
    table: MangoldtTable,
}

impl MomentVisitor {
    pub fn new(
        spec: &FamilySpec,
        x: u64,
        center: Option<TruncationPoint>,
        kind: PsiKind,
    ) -> Result<Self> {
        spec.validate()?;
        spec.check_value_range(x)?;
        let bound = spec.value_bound(x).unwrap_or(u128::MAX) as u64;
        let center_primes = center.map(|z| {
            let t = sieve_primes(z.get() as u64 + 1);
            t.primes_below(z.get()).to_vec()
        });
        if center_primes
            .as_ref()
            .is_some_and(|p| p.last().is_some_and(|&l| l > u32::MAX as u64))
        {
            return Err(Error::Range("truncation point beyond 32-bit primes"));
        }
        Ok(Self {
            x,
            kind,
            center_primes,
            table: MangoldtTable::new(bound.min(MOMENT_TABLE_CAP)),
        })
    }

    fn singular_series(&self, poly: &IntPolynomial) -> f64 {
        let Some(primes) = &self.center_primes else {
            return 0.0;
        };
        let mut acc = CompensatedProduct::new();
        let mut reduced = [0u64; 32];
        let coeffs = poly.coeffs();
        for &p in primes {
            let omega = if coeffs.len() <= reduced.len() {
                let r = &mut reduced[..coeffs.len()];
                for (ri, &c) in r.iter_mut().zip(coeffs) {
                    *ri = c.rem_euclid(p as i64) as u64;
                }
                crate::poly::count_roots_residues(r, p)
            } else {
                poly.roots_count_mod_prime(p).unwrap_or(p)
            };
            if omega == p {
                return 0.0;
            }
            acc.mul((p - omega) as f64 / (p - 1) as f64);
        }
        acc.value()
    }
}

impl FamilyVisitor for MomentVisitor {
    type Acc = MomentAcc;

    fn empty(&self) -> MomentAcc {
        MomentAcc::default()
    }

    fn visit(&self, acc: &mut MomentAcc, poly: &IntPolynomial) {
        let mut s = NeumaierSum::new();
        let mut sq = NeumaierSum::new();
        let mut pairs = NeumaierSum::new();
        for m in self.kind.first_m()..=self.x {
            let v = poly.eval_unchecked(m as i64);
            let Some(n) = self.kind.argument(v) else {
                continue;
            };
            let lam = self.table.get(n);
            if lam != 0.0 {
                pairs += 2.0 * lam * s.value();
                s += lam;
                sq += lam * lam;
            }
        }
        let psi = s.value();
        let nondiag = pairs.value();
        let sing = self.singular_series(poly);
        let dev = psi - self.x as f64 * sing;
        let direct = dev * dev;
        acc.count += 1;
        acc.diag += sq.value();
        acc.nondiag += nondiag;
        acc.cross += psi * sing;
        acc.ssq += sing * sing;
        acc.direct += direct;
        acc.direct_sq += direct * direct;
        acc.nondiag_sq += nondiag * nondiag;
    }

    fn merge(&self, left: MomentAcc, right: MomentAcc) -> MomentAcc {
        left.merge(right)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentParams {
    pub degree: u32,
    pub height: u64,
    pub x: u64,
    /// `None` for the uncentred moment.
    pub z: Option<f64>,
    pub mode: Mode,
    pub kind: PsiKind,
}

/// Family sums normalised by `2^d H^{d+1}` (the `diag`…`direct` fields),
/// together with raw and exact-cardinality views of the direct sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentReport {
    pub diag: f64,
    pub nondiag: f64,
    pub cross: f64,
    pub ssq: f64,
    pub direct: f64,
    /// `Σ_P |ψ - x𝔖|²` over the whole family (estimated in Monte Carlo mode).
    pub direct_raw: f64,
    /// `direct_raw / |Poly_d(H)|`.
    pub direct_mean: f64,
    /// Delete-one jackknife standard error of `direct` (Monte Carlo only).
    pub mc_stderr: Option<f64>,
    /// Same for `nondiag`.
    pub nondiag_stderr: Option<f64>,
    pub visited: u64,
    pub family_size: f64,
    pub normalizer: f64,
    /// `log H <= x`, the lower end of the range where the asymptotic is proved.
    pub in_asymptotic_range: bool,
    pub params: MomentParams,
}

/// Delete-one jackknife standard error of a sample mean. For the mean the
/// jackknife reduces to `sqrt(Σ(v - v̄)² / (n (n-1)))`.
fn jackknife_stderr(sum: f64, sum_sq: f64, n: u64) -> f64 {
    if n < 2 {
        return f64::NAN;
    }
    let nf = n as f64;
    let mean = sum / nf;
    let ss = (sum_sq - nf * mean * mean).max(0.0);
    libm::sqrt(ss / (nf * (nf - 1.0)))
}

impl MomentReport {
    pub fn from_acc(spec: &FamilySpec, params: MomentParams, acc: &MomentAcc) -> Self {
        let family = spec.cardinality().map_or(f64::INFINITY, |c| c as f64);
        let normalizer = spec.moment_normalizer();
        // Exhaustive: raw family sums. Monte Carlo: sample means scaled to the family.
        let scale = match spec.mode {
            Mode::Exhaustive => 1.0 / normalizer,
            Mode::MonteCarlo { .. } => family / (acc.count.max(1) as f64 * normalizer),
        };
        let stderr = |s: &NeumaierSum, sq: &NeumaierSum| match spec.mode {
            Mode::Exhaustive => None,
            Mode::MonteCarlo { .. } => {
                Some(jackknife_stderr(s.value(), sq.value(), acc.count) * family / normalizer)
            }
        };
        let direct = acc.direct.value() * scale;
        MomentReport {
            diag: acc.diag.value() * scale,
            nondiag: acc.nondiag.value() * scale,
            cross: acc.cross.value() * scale,
            ssq: acc.ssq.value() * scale,
            direct,
            direct_raw: direct * normalizer,
            direct_mean: direct * normalizer / family,
            mc_stderr: stderr(&acc.direct, &acc.direct_sq),
            nondiag_stderr: stderr(&acc.nondiag, &acc.nondiag_sq),
            visited: acc.count,
            family_size: family,
            normalizer,
            in_asymptotic_range: libm::log(spec.height as f64) <= params.x as f64,
            params,
        }
    }

    /// `diag + nondiag - 2x·cross + x²·ssq`.
    pub fn decomposition(&self) -> f64 {
        let x = self.params.x as f64;
        let mut acc = NeumaierSum::new();
        acc += self.diag;
        acc += self.nondiag;
        acc += -2.0 * x * self.cross;
        acc += x * x * self.ssq;
        acc.value()
    }

    /// `|direct - decomposition| / max(|direct|, tiny)`.
    pub fn decomposition_residual(&self) -> f64 {
        (self.direct - self.decomposition()).abs() / self.direct.abs().max(f64::MIN_POSITIVE)
    }
}

/// Second moment of `ψ_P(x) - x 𝔖_P(z)` over the family, sequentially.
pub fn second_moment(
    spec: &FamilySpec,
    x: u64,
    center: Option<TruncationPoint>,
    kind: PsiKind,
) -> Result<MomentReport> {
    let visitor = MomentVisitor::new(spec, x, center, kind)?;
    let acc = traverse_family(spec, &visitor)?;
    Ok(MomentReport::from_acc(
        spec,
        MomentParams {
            degree: spec.degree,
            height: spec.height,
            x,
            z: center.map(TruncationPoint::get),
            mode: spec.mode,
            kind,
        },
        &acc,
    ))
}

/// The non-diagonal family sum with its two predicted main terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NondiagonalTerm {
    /// `(2^d H^{d+1})^{-1} Σ_P Σ_{1<=m₁≠m₂<=x} Λ(|P(m₁)|) Λ(|P(m₂)|)`.
    pub value: f64,
    pub mc_stderr: Option<f64>,
    /// `x² ∏_{ℓ<1e5} (1 + 1/(ℓ(ℓ-1)))`.
    pub predicted_product: f64,
    /// `2 Σ_{1<=m₁<m₂<=x} (m₂-m₁)/φ(m₂-m₁)`.
    pub predicted_phi: f64,
}

pub fn nondiagonal_term(spec: &FamilySpec, x: u64) -> Result<NondiagonalTerm> {
    let report = second_moment(spec, x, None, PsiKind::AbsFromOne)?;
    Ok(nondiagonal_from_report(&report))
}

/// Extracts the non-diagonal term from an uncentred `AbsFromOne` report.
pub fn nondiagonal_from_report(report: &MomentReport) -> NondiagonalTerm {
    let x = report.params.x;
    let table = sieve_primes(REFERENCE_CUTOFF as u64);
    let c = reference_product(
        TruncationPoint::new(REFERENCE_CUTOFF).expect("cutoff above 1"),
        &table,
    )
    .expect("table covers the cutoff");
    NondiagonalTerm {
        value: report.nondiag,
        mc_stderr: report.nondiag_stderr,
        predicted_product: (x * x) as f64 * c,
        predicted_phi: 2.0 * nondiagonal_phi_sum(x),
    }
}
