//! Compensated accumulation for sums and products of `f64`.

use core::ops::{Add, AddAssign};

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NeumaierSum {
    s: f64,
    c: f64,
}

impl NeumaierSum {
    pub const fn new() -> Self {
        Self { s: 0.0, c: 0.0 }
    }

    pub fn value(&self) -> f64 {
        self.s + self.c
    }
}

impl AddAssign<f64> for NeumaierSum {
    fn add_assign(&mut self, rhs: f64) {
        let (s, c) = two_sum(self.s, rhs);
        self.s = s;
        self.c += c;
    }
}

impl Add for NeumaierSum {
    type Output = NeumaierSum;

    fn add(self, rhs: Self) -> Self {
        let (s, c) = two_sum(self.s, rhs.s);
        Self {
            s,
            c: self.c + rhs.c + c,
        }
    }
}

impl core::iter::Sum<f64> for NeumaierSum {
    fn sum<I: Iterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::new();
        for v in iter {
            acc += v;
        }
        acc
    }
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let c = if a.abs() >= b.abs() {
        (a - s) + b
    } else {
        (b - s) + a
    };
    (s, c)
}

/// Compensated product: tracks the rounding error of every multiplication
/// with an FMA and folds it back at the end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompensatedProduct {
    p: f64,
    e: f64,
}

impl Default for CompensatedProduct {
    fn default() -> Self {
        Self::new()
    }
}

impl CompensatedProduct {
    pub const fn new() -> Self {
        Self { p: 1.0, e: 0.0 }
    }

    pub fn mul(&mut self, factor: f64) {
        let p = self.p * factor;
        let err = libm::fma(self.p, factor, -p);
        self.e = self.e * factor + err;
        self.p = p;
    }

    pub fn value(&self) -> f64 {
        self.p + self.e
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_cancelled_terms() {
        let mut s = NeumaierSum::new();
        for v in [1.0, 1e100, 1.0, -1e100] {
            s += v;
        }
        assert_eq!(s.value(), 2.0);
    }

    #[test]
    fn merge_matches_sequential() {
        let xs: std::vec::Vec<f64> = (1..1000).map(|i| 1.0 / i as f64).collect();
        let all: NeumaierSum = xs.iter().copied().sum();
        let a: NeumaierSum = xs[..400].iter().copied().sum();
        let b: NeumaierSum = xs[400..].iter().copied().sum();
        assert!(((a + b).value() - all.value()).abs() <= 1e-15 * all.value());
    }

    #[test]
    fn product_of_thirds() {
        let mut p = CompensatedProduct::new();
        for _ in 0..30 {
            p.mul(1.0 / 3.0);
        }
        // 1/3 rounds to (1 - 2^-54)/3, so the exact product of the rounded
        // factors is 3^-30 (1 - 2^-54)^30
        let exact = (1.0 - 30.0 * libm::pow(2.0, -54.0)) / 205891132094649.0;
        assert!((p.value() - exact).abs() / exact < 2e-16);
    }
}
