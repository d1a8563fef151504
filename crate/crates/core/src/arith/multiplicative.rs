//! Integer-valued multiplicative functions given on prime powers, and the
//! convolution `g = tau * h`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{factorize, Factorization};

/// A multiplicative `h` described by its values on prime powers.
///
/// `h(p^k)` is `overrides[p][k-1]` when present, otherwise `generic[k-1]`,
/// and 0 beyond either list or above `cutoff`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct MultiplicativeFn {
    #[serde(default)]
    pub generic: Vec<i64>,
    #[serde(default)]
    pub overrides: BTreeMap<u64, Vec<i64>>,
    #[serde(default = "default_cutoff")]
    pub cutoff: u32,
}

fn default_cutoff() -> u32 {
    64
}

impl MultiplicativeFn {
    /// The convolution identity: `h(1) = 1`, `h(p^k) = 0`.
    pub fn unit() -> Self {
        MultiplicativeFn {
            generic: Vec::new(),
            overrides: BTreeMap::new(),
            cutoff: default_cutoff(),
        }
    }

    pub fn is_unit(&self) -> bool {
        self.generic.iter().all(|&v| v == 0)
            && self.overrides.values().all(|v| v.iter().all(|&x| x == 0))
    }

    pub fn at_prime_power(&self, p: u64, k: u32) -> i64 {
        if k == 0 {
            return 1;
        }
        if k > self.cutoff {
            return 0;
        }
        let list = self.overrides.get(&p).unwrap_or(&self.generic);
        list.get(k as usize - 1).copied().unwrap_or(0)
    }

    pub fn eval_factored(&self, f: &Factorization) -> i64 {
        f.pairs()
            .iter()
            .map(|&(p, e)| self.at_prime_power(p, e))
            .product()
    }

    pub fn eval(&self, n: u64) -> i64 {
        self.eval_factored(&factorize(n).expect("n >= 1"))
    }

    /// `g(p^k) = sum_{j <= k} (k - j + 1) h(p^j)`.
    pub fn g_at_prime_power(&self, p: u64, k: u32) -> i64 {
        (0..=k)
            .map(|j| (k - j + 1) as i64 * self.at_prime_power(p, j))
            .sum()
    }

    /// `(1 * h)(p^k) = sum_{j <= k} h(p^j)`.
    pub fn one_star_h_at_prime_power(&self, p: u64, k: u32) -> i64 {
        (0..=k).map(|j| self.at_prime_power(p, j)).sum()
    }

    /// The divisor weight `(1 * h)(d)` for a factored `d`.
    pub fn one_star_h(&self, f: &[(u64, u32)]) -> i64 {
        f.iter()
            .map(|&(p, e)| self.one_star_h_at_prime_power(p, e))
            .product()
    }

    pub fn g_factored(&self, f: &Factorization) -> i64 {
        f.pairs()
            .iter()
            .map(|&(p, e)| self.g_at_prime_power(p, e))
            .product()
    }

    /// Partial sums `sum_{d <= N} |h(d)| / d^{1/2 - eta0}` at powers of two up to `n_max`.
    pub fn prefix_report(&self, n_max: u64, eta0: f64) -> PrefixReport {
        let expo = 0.5 - eta0;
        let mut checkpoints = Vec::new();
        let mut acc = 0.0f64;
        let mut next = 2u64;
        for d in 1..=n_max.max(1) {
            let h = self.eval(d);
            if h != 0 {
                acc += h.unsigned_abs() as f64 / (d as f64).powf(expo);
            }
            if d == next || d == n_max {
                checkpoints.push((d, acc));
                next = next.saturating_mul(2);
            }
        }
        // bounded-looking: the last doubling adds at most 5% of the total
        let bounded = match checkpoints.len() {
            0 | 1 => true,
            k => {
                let (a, b) = (checkpoints[k - 2].1, checkpoints[k - 1].1);
                b - a <= 0.05 * b.max(f64::MIN_POSITIVE)
            }
        };
        PrefixReport {
            eta0,
            n_max,
            checkpoints,
            looks_bounded: bounded,
        }
    }
}

/// Observed growth of the weighted `|h|` prefix sums; reported, never enforced.
#[derive(Debug, Clone, Serialize)]
pub struct PrefixReport {
    pub eta0: f64,
    pub n_max: u64,
    pub checkpoints: Vec<(u64, f64)>,
    pub looks_bounded: bool,
}

/// `g(n) = sum_{d | n} tau(n/d) h(d)`.
pub fn g_from_h(h: &MultiplicativeFn, n: u64) -> i64 {
    h.g_factored(&factorize(n).expect("n >= 1"))
}
