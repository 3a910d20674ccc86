//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any failure.

mod common;

use std::time::{Duration, Instant};

use bhlab_core::arith::{sieve_primes, LogSum};
use bhlab_core::euler::{
    nondiagonal_phi_sum, reference_product, totient_ratio_sums, TruncationPoint,
};
use bhlab_core::identities::{
    multiplicative_average, omega_moment, omega_over_prime, squared_factor_sum,
    squared_local_factor, squarefree_up_to, Rational, DEFAULT_RESIDUE_BUDGET,
};
use bhlab_core::moments::{
    bv_average, diagonal_term, negative_terms, nondiagonal_term, psi_terms, second_moment, PsiKind,
    DEFAULT_BV_WORK_BUDGET,
};
use bhlab_core::poly::{FamilySpec, IntPolynomial};
use bhlab_core::sieve::{
    build_brun_weights, neutralised_bounds, sandwich_check, sieve_product, sieve_sum,
    NeutraliserVariant, Parity,
};
use common::{rel_close, Kind};
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    o.detail = format!("{} [{:.2?}]", o.detail, took);
    if let Some(limit) = limit {
        if took > limit {
            o.passed = false;
            o.detail = format!("{} exceeds limit {:?}", o.detail, limit);
        }
    }
    o
}

fn omega_moments() -> Outcome {
    let mut bad = Vec::new();
    for l in [2, 3, 5, 7] {
        for d in 1..=3 {
            for j in 1..=2 {
                let c = omega_moment(l, d, j, DEFAULT_RESIDUE_BUDGET).unwrap();
                if !c.holds() {
                    bad.push((l, d, j));
                }
            }
        }
    }
    outcome(bad.is_empty(), format!("24 cases, mismatches {bad:?}"))
}

fn squared_factor() -> Outcome {
    let ks = squarefree_up_to(30);
    let bad: Vec<u64> = ks
        .iter()
        .copied()
        .filter(|&k| {
            !squared_factor_sum(k, 2, DEFAULT_RESIDUE_BUDGET)
                .unwrap()
                .holds()
        })
        .collect();
    outcome(
        bad.is_empty(),
        format!("{} squarefree k, mismatches {bad:?}", ks.len()),
    )
}

fn multiplicativity() -> Outcome {
    let first_power = |r: &[u64], p: u64| Rational::one() - omega_over_prime(r, p);
    let mut checked = 0;
    let mut bad = Vec::new();
    for k in squarefree_up_to(30) {
        for d in 0..=2 {
            let b = DEFAULT_RESIDUE_BUDGET;
            let g1 = multiplicative_average(k, d, omega_over_prime, b).unwrap();
            let g2 = multiplicative_average(k, d, squared_local_factor, b).unwrap();
            let g3 = multiplicative_average(k, d, first_power, b).unwrap();
            for (i, ok) in [
                g1.direct == g1.product,
                g2.direct == g2.product,
                g3.direct == g3.product,
            ]
            .into_iter()
            .enumerate()
            {
                checked += 1;
                if !ok {
                    bad.push((k, d, i));
                }
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("{checked} (k, d, g) cases, mismatches {bad:?}"),
    )
}

fn sandwich() -> Outcome {
    let n_max = 100_000;
    let mut failures = Vec::new();
    let mut literal_outside_smooth = 0u64;
    for w in [6.0, 12.0, 20.0] {
        for y in [50.0, 1e3, 1e5] {
            let up = build_brun_weights(w, y, Parity::Upper).unwrap();
            let lo = build_brun_weights(w, y, Parity::Lower).unwrap();
            let r = sandwich_check(&up, &lo, n_max).unwrap();
            if !r.passed() {
                failures.push((w, y, r.first_violation));
            }
            // the literal 𝟙_{n=1} on w-smooth n, plus an informational count elsewhere
            let primes = up.primes().to_vec();
            for n in 1..=n_max {
                let mut m = n;
                for &p in &primes {
                    while m % p == 0 {
                        m /= p;
                    }
                }
                let ind = if n == 1 { 1.0 } else { 0.0 };
                let (l, u) = (lo.divisor_sum(n), up.divisor_sum(n));
                let holds = l <= ind && ind <= u;
                if m == 1 && !holds {
                    failures.push((w, y, None));
                } else if m != 1 && !holds {
                    literal_outside_smooth += 1;
                }
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "9 (w, y) grid points, n <= {n_max}, violations {failures:?}; \
             literal n=1 form fails at {literal_outside_smooth} non-smooth n (info)"
        ),
    )
}

fn neutraliser() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut violations = 0;
    let mut weights = std::collections::HashMap::new();
    for _ in 0..1000 {
        let d = rng.random_range(1..=4usize);
        let mut c: Vec<i64> = (0..d).map(|_| rng.random_range(-50..=50)).collect();
        c.push(rng.random_range(1..=50));
        let p = IntPolynomial::new(c).unwrap();
        let z = rng.random_range(2..=20u32);
        let y = [50.0, 1e3, 1e5][rng.random_range(0..3)];
        let (up, lo) = weights.entry((z, y as u64)).or_insert_with(|| {
            (
                build_brun_weights(z as f64, y, Parity::Upper).unwrap(),
                build_brun_weights(z as f64, y, Parity::Lower).unwrap(),
            )
        });
        let z = TruncationPoint::new(z as f64).unwrap();
        for variant in [NeutraliserVariant::Squared, NeutraliserVariant::FirstPower] {
            if !neutralised_bounds(&p, z, up, lo, variant)
                .unwrap()
                .brackets(1e-12)
            {
                violations += 1;
            }
        }
    }
    outcome(
        violations == 0,
        format!("1000 pairs x 2 variants, violations {violations}"),
    )
}

fn telescoping() -> Outcome {
    let densities: [fn(u64) -> f64; 3] = [
        |l| 1.0 / l as f64,
        |l| (l as f64 - 1.0) / (l * l) as f64,
        |l| {
            let l = l as f64;
            (2.0 * l * l - 2.0 * l + 1.0) / (l * l * l)
        },
    ];
    let mut worst = 0.0f64;
    for w in 2..=20 {
        let count = sieve_primes(w).primes_below(w as f64).len() as i32;
        let y = 2.0 * (w as f64).powi(count) + 1.0;
        for parity in [Parity::Upper, Parity::Lower] {
            let weights = build_brun_weights(w as f64, y, parity).unwrap();
            assert!(weights.is_untruncated());
            for h in densities {
                let s = sieve_sum(&weights, h);
                let p = sieve_product(&weights, h);
                worst = worst.max((s - p).abs() / p.abs());
            }
        }
    }
    outcome(
        worst <= 1e-12,
        format!("w = 2..=20, 3 densities, worst rel err {worst:.3e}"),
    )
}

fn decomposition() -> Outcome {
    let spec = FamilySpec::exhaustive(2, 50);
    let z = TruncationPoint::new(10.0).unwrap();
    let r = second_moment(&spec, 10, Some(z), PsiKind::Abs).unwrap();
    let res = r.decomposition_residual();
    outcome(
        res <= 1e-9,
        format!(
            "direct {:.15} residual {res:.3e} over {} polys",
            r.direct, r.visited
        ),
    )
}

fn oracle_equivalence() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    let cases = [
        (30, 10, Some(10.0), PsiKind::Abs, Kind::Abs),
        (30, 5, None, PsiKind::AbsFromOne, Kind::AbsFromOne),
        (12, 10, Some(7.5), PsiKind::Plain, Kind::Plain),
        (1, 1, Some(2.0), PsiKind::AbsFromOne, Kind::AbsFromOne),
    ];
    for (h, x, z, kind, okind) in cases {
        let spec = FamilySpec::exhaustive(2, h);
        let r = second_moment(&spec, x, z.map(|z| TruncationPoint::new(z).unwrap()), kind).unwrap();
        let raw = common::moment(2, h as i64, x, z, okind);
        let n = r.normalizer;
        let got = [
            r.diag * n,
            r.nondiag * n,
            r.cross * n,
            r.ssq * n,
            r.direct_raw,
        ];
        let fam = common::family(2, h as i64).len() as u64;
        let exact_ok = r.visited == fam && r.family_size == fam as f64;
        let real_ok = got.iter().zip(&raw).all(|(&a, &b)| rel_close(a, b, 1e-9));
        ok &= exact_ok && real_ok;
        if !(exact_ok && real_ok) {
            notes.push(format!("moment H={h} x={x}: {got:?} vs {raw:?}"));
        }
    }
    for (h, x) in [(30, 5), (10, 10)] {
        let v = nondiagonal_term(&FamilySpec::exhaustive(2, h), x)
            .unwrap()
            .value;
        let raw = common::moment(2, h as i64, x, None, Kind::AbsFromOne)[1];
        let expect = raw / FamilySpec::exhaustive(2, h).moment_normalizer();
        if !rel_close(v, expect, 1e-9) {
            ok = false;
            notes.push(format!("nondiag H={h} x={x}: {v} vs {expect}"));
        }
    }
    for (x, q) in [(10, 1), (100, 3), (1000, 31), (1000, 10)] {
        let v = bv_average(x, q, DEFAULT_BV_WORK_BUDGET).unwrap();
        let expect = common::bv(x, q);
        if !rel_close(v, expect, 1e-9) {
            ok = false;
            notes.push(format!("bv X={x} Q={q}: {v} vs {expect}"));
        }
    }
    outcome(ok, format!("4 moment, 2 nondiag, 4 bv cases {notes:?}"))
}

fn totients() -> Outcome {
    let table = sieve_primes(100_000);
    let c = reference_product(TruncationPoint::new(1e5).unwrap(), &table).unwrap();
    let x = 1000.0f64;
    let nd = nondiagonal_phi_sum(1000);
    let gap = (nd - x * x / 2.0 * c).abs();
    let s1 = totient_ratio_sums(1_000_000).unwrap().s1 / 1e6;
    let ok =
        gap <= 5.0 * x * x.ln() && (s1 / c - 1.0).abs() <= 0.02 && (c - 1.9435964).abs() < 1e-4;
    outcome(
        ok,
        format!(
            "nondiag gap {gap:.1} (bound {:.1}); S1(1e6)/1e6 = {s1:.6} vs C = {c:.7}",
            5.0 * x * x.ln()
        ),
    )
}

fn diagonal_trend() -> Outcome {
    let mut worst = 0.0f64;
    for h in [10_000u64, 100_000, 1_000_000] {
        for n in [0, h, 10 * h] {
            let d = diagonal_term(n as i64, h).unwrap();
            worst = worst.max(d.ratio.abs());
        }
    }
    outcome(
        worst <= 5.0,
        format!("9 (N, H) points, worst |ratio| {worst:.3}"),
    )
}

fn psi_transition() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut bad = 0;
    for _ in 0..1000 {
        let d = rng.random_range(1..=4usize);
        let mut c: Vec<i64> = (0..d).map(|_| rng.random_range(-10_000..=10_000)).collect();
        c.push(rng.random_range(1..=100) * if rng.random_bool(0.5) { 1 } else { -1 });
        let p = IntPolynomial::new(c).unwrap();
        let x = rng.random_range(1..=50);
        let lhs = psi_terms(&p, x, PsiKind::AbsFromOne).unwrap();
        let mut rhs: LogSum = psi_terms(&p, x, PsiKind::Plain).unwrap();
        rhs.extend(&negative_terms(&p, x).unwrap());
        if lhs != rhs {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("1000 random P, exact mismatches {bad}"))
}

fn monte_carlo() -> Outcome {
    let z = Some(TruncationPoint::new(10.0).unwrap());
    let ex = second_moment(&FamilySpec::exhaustive(2, 50), 10, z, PsiKind::Abs).unwrap();
    let mc = second_moment(
        &FamilySpec::monte_carlo(2, 50, 1_000_000, 2024),
        10,
        z,
        PsiKind::Abs,
    )
    .unwrap();
    let se = mc.mc_stderr.unwrap();
    let dev = (mc.direct - ex.direct).abs();
    outcome(
        dev <= 3.0 * se,
        format!(
            "exhaustive {:.6} mc {:.6} stderr {se:.6} ({:.2} se)",
            ex.direct,
            mc.direct,
            dev / se
        ),
    )
}

type Criterion<'a> = Box<dyn FnOnce() -> Outcome + 'a>;

fn main() {
    let secs = Duration::from_secs;
    let criteria: Vec<(&str, Criterion<'_>)> = vec![
        (
            "omega moments",
            Box::new(|| timed(Some(secs(10)), omega_moments)),
        ),
        (
            "squared factor sums",
            Box::new(|| timed(Some(secs(60)), squared_factor)),
        ),
        (
            "multiplicativity",
            Box::new(|| timed(None, multiplicativity)),
        ),
        ("exhaustive sandwich", Box::new(|| timed(None, sandwich))),
        ("neutraliser bracket", Box::new(|| timed(None, neutraliser))),
        ("mobius telescoping", Box::new(|| timed(None, telescoping))),
        (
            "decomposition identity",
            Box::new(|| timed(Some(secs(300)), decomposition)),
        ),
        (
            "oracle equivalence",
            Box::new(|| timed(None, oracle_equivalence)),
        ),
        ("totient sums", Box::new(|| timed(None, totients))),
        (
            "diagonal trend",
            Box::new(|| timed(Some(secs(120)), diagonal_trend)),
        ),
        ("psi transition", Box::new(|| timed(None, psi_transition))),
        (
            "monte carlo calibration",
            Box::new(|| timed(None, monte_carlo)),
        ),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.into_iter().enumerate() {
        let o = run();
        if !o.passed {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {}",
            if o.passed { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    println!("acceptance: {} of 12 passed", 12 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
