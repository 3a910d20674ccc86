//! Independent straightforward-loop oracles. Nothing here calls into the
//! library's arithmetic.
#![allow(dead_code)]

pub fn is_prime(n: u64) -> bool {
    n >= 2
        && (2..)
            .take_while(|d| d * d <= n)
            .all(|d| !n.is_multiple_of(d))
}

/// `Λ(n)` by trial division.
pub fn lambda(n: u64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let p = (2..)
        .take_while(|d| d * d <= n)
        .find(|d| n.is_multiple_of(*d))
        .unwrap_or(n);
    let mut m = n;
    while m.is_multiple_of(p) {
        m /= p;
    }
    if m == 1 {
        (p as f64).ln()
    } else {
        0.0
    }
}

pub fn phi(n: u64) -> u64 {
    (1..=n).filter(|&k| gcd(k, n) == 1).count() as u64
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn eval(coeffs: &[i64], m: i64) -> i64 {
    let mut v: i128 = 0;
    let mut pow: i128 = 1;
    for &c in coeffs {
        v += c as i128 * pow;
        pow *= m as i128;
    }
    v as i64
}

pub fn roots_mod(coeffs: &[i64], p: u64) -> u64 {
    (0..p as i64)
        .filter(|&r| {
            let mut v: i128 = 0;
            let mut pow: i128 = 1;
            for &c in coeffs {
                v = (v + c as i128 * pow).rem_euclid(p as i128);
                pow = pow * r as i128 % p as i128;
            }
            v == 0
        })
        .count() as u64
}

pub fn singular_series(coeffs: &[i64], z: f64) -> f64 {
    (2..)
        .take_while(|&p| (p as f64) < z)
        .filter(|&p| is_prime(p))
        .map(|p| (p - roots_mod(coeffs, p)) as f64 / (p - 1) as f64)
        .product()
}

/// All `(c_0, …, c_d)` with `|c_i| <= H` and `1 <= c_d <= H`.
pub fn family(d: usize, h: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for i in 0..=d {
        let range: Vec<i64> = if i == d {
            (1..=h).collect()
        } else {
            (-h..=h).collect()
        };
        out = out
            .into_iter()
            .flat_map(|p| {
                range.iter().map(move |&c| {
                    let mut q = p.clone();
                    q.push(c);
                    q
                })
            })
            .collect();
    }
    out
}

#[derive(Debug, Clone, Copy)]
pub enum Kind {
    Plain,
    Abs,
    AbsFromOne,
}

/// `Λ` values of the chosen ψ-sum at `m = 1..=x`, zero where a term is excluded.
pub fn psi_terms(coeffs: &[i64], x: u64, kind: Kind) -> Vec<f64> {
    (1..=x as i64)
        .map(|m| {
            let v = eval(coeffs, m);
            match kind {
                Kind::Plain if v > 0 => lambda(v as u64),
                Kind::Abs if m > 1 && v != 0 => lambda(v.unsigned_abs()),
                Kind::AbsFromOne if v != 0 => lambda(v.unsigned_abs()),
                _ => 0.0,
            }
        })
        .collect()
}

/// Raw family sums `(diag, nondiag, cross, ssq, direct)`.
pub fn moment(d: usize, h: i64, x: u64, z: Option<f64>, kind: Kind) -> [f64; 5] {
    let mut out = [0.0; 5];
    for p in family(d, h) {
        let t = psi_terms(&p, x, kind);
        let s: f64 = t.iter().sum();
        let sing = z.map_or(0.0, |z| singular_series(&p, z));
        out[0] += t.iter().map(|v| v * v).sum::<f64>();
        for i in 0..t.len() {
            for j in 0..t.len() {
                if i != j {
                    out[1] += t[i] * t[j];
                }
            }
        }
        out[2] += s * sing;
        out[3] += sing * sing;
        out[4] += (s - x as f64 * sing).powi(2);
    }
    out
}

/// `E(Y; q, b)` by direct summation.
pub fn ap_error(y: u64, q: u64, b: u64) -> f64 {
    let s: f64 = (1..=y).filter(|n| n % q == b % q).map(lambda).sum();
    let main = if gcd(q, b % q) == 1 {
        y as f64 / phi(q) as f64
    } else {
        0.0
    };
    s - main
}

/// `Σ_{q<=Q} max_{1<=Y<=X} max_b |E(Y; q, b)|` scanning every `Y`.
pub fn bv(x: u64, big_q: u64) -> f64 {
    let lam: Vec<f64> = (0..=x).map(lambda).collect();
    let mut total = 0.0;
    for q in 1..=big_q {
        let ph = phi(q) as f64;
        let mut best: f64 = 0.0;
        for b in 0..q {
            if gcd(q, b) != 1 {
                continue;
            }
            let mut s = 0.0;
            for y in 1..=x {
                if y % q == b {
                    s += lam[y as usize];
                }
                best = best.max((s - y as f64 / ph).abs());
            }
        }
        total += best;
    }
    total
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300) || a == b
}
