use bhlab_core::arith::sieve_primes;
use bhlab_core::euler::{truncated_bh_constant, TruncationPoint};
use bhlab_core::identities::{
    multiplicative_average, omega_moment, omega_over_prime, squared_factor_sum,
    squared_local_factor, squarefree_up_to, Rational, DEFAULT_RESIDUE_BUDGET,
};
use bhlab_core::moments::{
    negative_part, psi, psi_abs, theta, MomentParams, MomentReport, MomentVisitor,
    ProgressionTable, PsiKind, DEFAULT_BV_WORK_BUDGET,
};
use bhlab_core::poly::{FamilySpec, IntPolynomial, Mode, DEFAULT_EXHAUSTIVE_BUDGET};
use bhlab_core::sieve::{
    build_brun_weights, mertens_ratio, neutralised_bounds, sandwich_check, sieve_product,
    sieve_sum, NeutraliserVariant, Parity,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::ThreadPool;

use crate::format::{sig15, Cell, Table};
use crate::parallel::traverse_parallel;
use crate::{
    BvArgs, CenterArg, Cli, CliError, Command, IdentitiesArgs, ModeArg, MomentArgs, PsiArg,
    PsiArgs, SieveArgs, SingularArgs,
};

/// Largest truncation point or progression length accepted from the command line.
const MAX_TABLE: u64 = 100_000_000;

pub(crate) fn dispatch(
    cli: &Cli,
    pool: &ThreadPool,
    budget: Option<u128>,
) -> Result<Table, CliError> {
    match &cli.command {
        Command::Identities(a) => identities(a, budget),
        Command::SieveCheck(a) => sieve_check(a),
        Command::SingularSeries(a) => singular_series(a),
        Command::Psi(a) => psi_command(a),
        Command::Moment(a) => moment(a, pool, budget),
        Command::Bv(a) => bv(a, budget),
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn join_reals(v: &[f64]) -> String {
    v.iter().map(|&z| sig15(z)).collect::<Vec<_>>().join(",")
}

fn polynomial(coeffs: &[i64]) -> Result<IntPolynomial, CliError> {
    IntPolynomial::new(coeffs.to_vec())
        .map_err(|_| CliError::Usage("--poly needs a non-zero leading coefficient".into()))
}

fn identities(a: &IdentitiesArgs, budget: Option<u128>) -> Result<Table, CliError> {
    let b = budget.unwrap_or(DEFAULT_RESIDUE_BUDGET);
    let mut t = Table::new(
        "identities",
        &[
            "check",
            "modulus",
            "degree",
            "order",
            "enumerated",
            "closed_form",
            "passed",
        ],
    );
    t.set("max_k", a.max_k);
    t.set("max_degree", a.max_degree);
    for l in [2u64, 3, 5, 7] {
        for d in 1..=3 {
            for j in 1..=2 {
                let c = omega_moment(l, d, j, b)?;
                t.push(vec![
                    "omega_moment".into(),
                    l.into(),
                    (d as u64).into(),
                    (j as u64).into(),
                    c.enumerated.into(),
                    c.closed_form.into(),
                    c.holds().into(),
                ]);
            }
        }
    }
    let ks = squarefree_up_to(a.max_k);
    for &k in &ks {
        for d in 1..=a.max_degree.max(1) {
            let c = squared_factor_sum(k, d, b)?;
            t.push(vec![
                "squared_factor_sum".into(),
                k.into(),
                (d as u64).into(),
                Cell::Missing,
                c.enumerated.to_string().into(),
                c.closed_form.to_string().into(),
                c.holds().into(),
            ]);
        }
    }
    let first_power = |r: &[u64], p: u64| Rational::from_integer(1) - omega_over_prime(r, p);
    for &k in &ks {
        for d in 0..=a.max_degree {
            let cases = [
                (
                    "omega_over_prime",
                    multiplicative_average(k, d, omega_over_prime, b)?,
                ),
                (
                    "squared_local_factor",
                    multiplicative_average(k, d, squared_local_factor, b)?,
                ),
                (
                    "one_minus_omega_over_prime",
                    multiplicative_average(k, d, first_power, b)?,
                ),
            ];
            for (name, g) in cases {
                t.push(vec![
                    format!("multiplicative_average:{name}").into(),
                    k.into(),
                    (d as u64).into(),
                    Cell::Missing,
                    g.direct.to_string().into(),
                    g.product.to_string().into(),
                    (g.direct == g.product).into(),
                ]);
            }
        }
    }
    Ok(t)
}

fn sieve_check(a: &SieveArgs) -> Result<Table, CliError> {
    let mut t = Table::new(
        "sieve-check",
        &[
            "check",
            "w",
            "y",
            "upper_level",
            "lower_level",
            "cases",
            "violations",
            "worst",
            "passed",
        ],
    );
    t.set("w", join_reals(&a.w));
    t.set("y", join_reals(&a.y));
    t.set("n_max", a.n_max);
    t.set("pairs", a.pairs);
    t.set("seed", a.seed);
    if a.w.iter().any(|&w| !(2.0..=53.0).contains(&w)) {
        return Err(CliError::Usage("--w values must lie in [2, 53]".into()));
    }
    let mut stream = 0u64;
    for &w in &a.w {
        for &y in &a.y {
            let up = build_brun_weights(w, y, Parity::Upper)?;
            let lo = build_brun_weights(w, y, Parity::Lower)?;
            let r = sandwich_check(&up, &lo, a.n_max)?;
            t.push(vec![
                "sandwich".into(),
                w.into(),
                y.into(),
                (up.level() as u64).into(),
                (lo.level() as u64).into(),
                r.checked.into(),
                r.violations.into(),
                Cell::Missing,
                r.passed().into(),
            ]);

            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            rng.set_stream(stream);
            stream += 1;
            let z = TruncationPoint::new(w)?;
            let mut violations = 0u64;
            for _ in 0..a.pairs {
                let d = rng.random_range(1..=4usize);
                let mut c: Vec<i64> = (0..d).map(|_| rng.random_range(-50..=50)).collect();
                c.push(rng.random_range(1..=50));
                let p = IntPolynomial::new(c)?;
                for variant in [NeutraliserVariant::Squared, NeutraliserVariant::FirstPower] {
                    if !neutralised_bounds(&p, z, &up, &lo, variant)?.brackets(1e-12) {
                        violations += 1;
                    }
                }
            }
            t.push(vec![
                "neutraliser".into(),
                w.into(),
                y.into(),
                (up.level() as u64).into(),
                (lo.level() as u64).into(),
                (2 * a.pairs).into(),
                violations.into(),
                Cell::Missing,
                (violations == 0).into(),
            ]);
        }
    }

    let densities: [fn(u64) -> f64; 3] = [
        |l| 1.0 / l as f64,
        |l| (l as f64 - 1.0) / (l * l) as f64,
        |l| {
            let l = l as f64;
            (2.0 * l * l - 2.0 * l + 1.0) / (l * l * l)
        },
    ];
    for &w in &a.w {
        let count = sieve_primes(w as u64 + 1).primes_below(w).len() as i32;
        let y = 2.0 * w.powi(count) + 1.0;
        let mut worst = 0.0f64;
        let mut level = 0;
        for parity in [Parity::Upper, Parity::Lower] {
            let weights = build_brun_weights(w, y, parity)?;
            level = weights.level();
            for h in densities {
                let p = sieve_product(&weights, h);
                worst = worst.max((sieve_sum(&weights, h) - p).abs() / p.abs());
            }
        }
        t.push(vec![
            "telescoping".into(),
            w.into(),
            y.into(),
            (level as u64).into(),
            (level as u64).into(),
            6u64.into(),
            ((worst > 1e-12) as u64).into(),
            worst.into(),
            (worst <= 1e-12).into(),
        ]);
    }

    let h = |l: u64| {
        let l = l as f64;
        (2.0 * l * l - 2.0 * l + 1.0) / (l * l * l)
    };
    let grid = [2.0, 3.0, 10.0, 100.0, 1000.0, 10000.0];
    let mut worst = (f64::NEG_INFINITY, 0.0, 0.0);
    let mut violations = 0u64;
    let mut cases = 0u64;
    for (i, &y1) in grid.iter().enumerate() {
        for &y2 in &grid[i + 1..] {
            let excess = mertens_ratio(h, 2.0, y1, y2)? - (1.0 + 10.0 / y1.ln());
            cases += 1;
            if excess > 0.0 {
                violations += 1;
            }
            if excess > worst.0 {
                worst = (excess, y1, y2);
            }
        }
    }
    t.push(vec![
        "mertens".into(),
        worst.1.into(),
        worst.2.into(),
        Cell::Missing,
        Cell::Missing,
        cases.into(),
        violations.into(),
        worst.0.into(),
        (violations == 0).into(),
    ]);
    Ok(t)
}

fn singular_series(a: &SingularArgs) -> Result<Table, CliError> {
    let p = polynomial(&a.poly)?;
    let z = TruncationPoint::new(a.z)?;
    if a.z > MAX_TABLE as f64 {
        return Err(CliError::Usage(format!("--z must not exceed {MAX_TABLE}")));
    }
    let table = sieve_primes(a.z as u64 + 1);
    let value = truncated_bh_constant(&p, z, &table)?;
    let mut t = Table::new("singular-series", &["poly", "z", "primes", "value"]);
    t.set("poly", join(&a.poly));
    t.set("z", sig15(a.z));
    t.push(vec![
        join(&a.poly).into(),
        a.z.into(),
        (table.primes_below(a.z).len() as u64).into(),
        value.into(),
    ]);
    Ok(t)
}

fn psi_command(a: &PsiArgs) -> Result<Table, CliError> {
    let p = polynomial(&a.poly)?;
    let (kind, value) = if a.abs {
        let kind = if a.from_one { "abs_from_one" } else { "abs" };
        (kind, psi_abs(&p, a.x, a.from_one)?)
    } else if a.theta {
        ("theta", theta(&p, a.x)?)
    } else if a.neg {
        ("negative_part", negative_part(&p, a.x)?)
    } else {
        ("psi", psi(&p, a.x)?)
    };
    let mut t = Table::new("psi", &["poly", "x", "kind", "value"]);
    t.set("poly", join(&a.poly));
    t.set("x", a.x);
    t.set("kind", kind);
    t.push(vec![
        join(&a.poly).into(),
        a.x.into(),
        kind.into(),
        value.into(),
    ]);
    Ok(t)
}

/// Exponent `A - 5` of the `X / (log X)^{A-5}` trend scale, with `A = 10`.
const BV_TREND_EXPONENT: i32 = 5;

fn bv(a: &BvArgs, budget: Option<u128>) -> Result<Table, CliError> {
    if a.x > MAX_TABLE {
        return Err(CliError::Usage(format!("--X must not exceed {MAX_TABLE}")));
    }
    let value = ProgressionTable::new(a.x).bv_average(
        a.x,
        a.q,
        budget.unwrap_or(DEFAULT_BV_WORK_BUDGET),
    )?;
    let xf = a.x as f64;
    let scale = xf / xf.ln().powi(BV_TREND_EXPONENT);
    let mut t = Table::new("bv", &["X", "Q", "value", "trend_ratio"]);
    t.set("X", a.x);
    t.set("Q", a.q);
    t.set("trend_exponent", BV_TREND_EXPONENT);
    t.push(vec![
        a.x.into(),
        a.q.into(),
        value.into(),
        (value / scale).into(),
    ]);
    Ok(t)
}

const MOMENT_COLUMNS: &[&str] = &[
    "d",
    "H",
    "x",
    "z",
    "mode",
    "samples",
    "seed",
    "psi",
    "center",
    "diag",
    "nondiag",
    "cross",
    "ssq",
    "direct",
    "direct_raw",
    "direct_mean",
    "mc_stderr",
    "nondiag_stderr",
    "decomposition_residual",
    "visited",
    "family_size",
    "normalizer",
    "in_asymptotic_range",
];

fn kind_name(kind: PsiKind) -> &'static str {
    match kind {
        PsiKind::Plain => "plain",
        PsiKind::Abs => "abs",
        PsiKind::AbsFromOne => "abs_from_one",
    }
}

fn moment_row(r: &MomentReport) -> Vec<Cell> {
    let p = &r.params;
    let (mode, samples, seed) = match p.mode {
        Mode::Exhaustive => ("exhaustive", None, None),
        Mode::MonteCarlo { samples, seed } => ("mc", Some(samples), Some(seed)),
    };
    vec![
        (p.degree as u64).into(),
        p.height.into(),
        p.x.into(),
        p.z.into(),
        mode.into(),
        samples.into(),
        seed.into(),
        kind_name(p.kind).into(),
        (if p.z.is_some() { "bh" } else { "none" }).into(),
        r.diag.into(),
        r.nondiag.into(),
        r.cross.into(),
        r.ssq.into(),
        r.direct.into(),
        r.direct_raw.into(),
        r.direct_mean.into(),
        r.mc_stderr.into(),
        r.nondiag_stderr.into(),
        r.decomposition_residual().into(),
        r.visited.into(),
        r.family_size.into(),
        r.normalizer.into(),
        r.in_asymptotic_range.into(),
    ]
}

fn moment(a: &MomentArgs, pool: &ThreadPool, budget: Option<u128>) -> Result<Table, CliError> {
    let kind = match (a.psi, a.from_one) {
        (PsiArg::Plain, true) => {
            return Err(CliError::Usage(
                "--from-one applies to --psi abs only".into(),
            ))
        }
        (PsiArg::Plain, false) => PsiKind::Plain,
        (PsiArg::Abs, false) => PsiKind::Abs,
        (PsiArg::Abs, true) => PsiKind::AbsFromOne,
    };
    let spec = match a.mode {
        ModeArg::Exhaustive => FamilySpec::exhaustive(a.degree, a.height),
        ModeArg::Mc => {
            let samples = a
                .samples
                .ok_or_else(|| CliError::Usage("--mode mc needs --samples".into()))?;
            FamilySpec::monte_carlo(a.degree, a.height, samples, a.seed)
        }
    }
    .with_budget(budget.unwrap_or(DEFAULT_EXHAUSTIVE_BUDGET));
    if !(a.gamma.is_finite() && a.gamma >= 1.0) {
        return Err(CliError::Usage("--gamma must be a real >= 1".into()));
    }

    let mut t = Table::new("moment", MOMENT_COLUMNS);
    t.set("d", a.degree);
    t.set("H", a.height);
    t.set("x", join(&a.x));
    t.set(
        "z",
        if a.z.is_empty() {
            "x^gamma".to_string()
        } else {
            join_reals(&a.z)
        },
    );
    t.set("gamma", sig15(a.gamma));
    t.set(
        "mode",
        if a.mode == ModeArg::Mc {
            "mc"
        } else {
            "exhaustive"
        },
    );
    t.set(
        "samples",
        a.samples.map_or("none".to_string(), |s| s.to_string()),
    );
    t.set("seed", a.seed);
    t.set(
        "center",
        if a.center == CenterArg::Bh {
            "bh"
        } else {
            "none"
        },
    );
    t.set("psi", kind_name(kind));

    for &x in &a.x {
        let zs: Vec<Option<f64>> = match a.center {
            CenterArg::None => vec![None],
            CenterArg::Bh if a.z.is_empty() => vec![Some((x as f64).powf(a.gamma))],
            CenterArg::Bh => a.z.iter().copied().map(Some).collect(),
        };
        for z in zs {
            let center = z.map(TruncationPoint::new).transpose()?;
            if z.is_some_and(|z| z > MAX_TABLE as f64) {
                return Err(CliError::Usage(format!("z must not exceed {MAX_TABLE}")));
            }
            let visitor = MomentVisitor::new(&spec, x, center, kind)?;
            let acc = traverse_parallel(&spec, &visitor, pool)?;
            let params = MomentParams {
                degree: a.degree,
                height: a.height,
                x,
                z,
                mode: spec.mode,
                kind,
            };
            t.push(moment_row(&MomentReport::from_acc(&spec, params, &acc)));
        }
    }
    Ok(t)
}
