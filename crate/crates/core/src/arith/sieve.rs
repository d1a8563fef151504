//! Smallest-prime-factor sieve and the process-wide sieve cache.

use std::sync::{Arc, Mutex, OnceLock};

use super::primes;
use super::Factorization;

/// Default sieve bound when `QUARTDIV_SIEVE_BOUND` is unset.
pub const DEFAULT_SIEVE_BOUND: u64 = 100_000;

/// Largest table the cache will build on demand (about 100 MB of `u16`).
pub const MAX_SIEVE_BOUND: u64 = 50_000_000;

/// Smallest-prime-factor table over `[0, bound]`.
///
/// Composite entries store their smallest prime factor, which is below
/// `sqrt(bound) < 2^16`; primes (and 0, 1) store 0.
#[derive(Debug)]
pub struct Sieve {
    spf: Vec<u16>,
    primes: Vec<u32>,
    bound: u64,
}

impl Sieve {
    pub fn new(bound: u64) -> Self {
        let bound = bound.clamp(16, (u16::MAX as u64).pow(2));
        let n = bound as usize;
        let mut spf = vec![0u16; n + 1];
        let mut primes = Vec::new();
        for i in 2..=n {
            if spf[i] == 0 {
                primes.push(i as u32);
                if i <= u16::MAX as usize {
                    let mut j = i * i;
                    while j <= n {
                        if spf[j] == 0 {
                            spf[j] = i as u16;
                        }
                        j += i;
                    }
                }
            }
        }
        Sieve { spf, primes, bound }
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    /// All primes up to the bound, ascending.
    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    pub fn is_prime(&self, n: u64) -> bool {
        if n <= self.bound {
            n >= 2 && self.spf[n as usize] == 0
        } else {
            primes::is_prime(n as u128)
        }
    }

    /// Pushes the `(prime, exponent)` pairs of `n >= 1` in increasing order.
    pub fn factor_into(&self, mut n: u64, out: &mut Vec<(u64, u32)>) {
        debug_assert!(n >= 1);
        if n > self.bound {
            for &p in &self.primes {
                let p = p as u64;
                if p * p > n {
                    break;
                }
                if n % p == 0 {
                    let mut e = 0;
                    while n % p == 0 {
                        n /= p;
                        e += 1;
                    }
                    out.push((p, e));
                    if n <= self.bound {
                        break;
                    }
                }
            }
            if n > self.bound {
                let mut big = Vec::new();
                primes::split_into_primes(n as u128, &mut big);
                big.sort_unstable();
                push_sorted(&big, out);
                return;
            }
        }
        while n > 1 {
            let s = self.spf[n as usize];
            let p = if s == 0 { n } else { s as u64 };
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
    }

    pub fn factorize(&self, n: u64) -> Factorization {
        let mut v = Vec::new();
        if n >= 1 {
            self.factor_into(n, &mut v);
        }
        Factorization::from_sorted(v)
    }
}

fn push_sorted(sorted: &[u128], out: &mut Vec<(u64, u32)>) {
    for &p in sorted {
        match out.last_mut() {
            Some((q, e)) if *q as u128 == p => *e += 1,
            _ => out.push((p as u64, 1)),
        }
    }
}

fn env_bound() -> u64 {
    std::env::var("QUARTDIV_SIEVE_BOUND")
        .ok()
        .and_then(|s| s.trim().parse::<u64>().ok())
        .filter(|&b| b >= 16)
        .unwrap_or(DEFAULT_SIEVE_BOUND)
}

/// The process-wide default sieve (bound from `QUARTDIV_SIEVE_BOUND`).
pub fn default_sieve() -> Arc<Sieve> {
    covering(0)
}

static CACHE: OnceLock<Mutex<Arc<Sieve>>> = OnceLock::new();

/// A sieve whose bound is at least `min(n, MAX_SIEVE_BOUND)` and at least the
/// default bound. Larger tables replace smaller ones in the cache.
pub fn covering(n: u64) -> Arc<Sieve> {
    let cell = CACHE.get_or_init(|| Mutex::new(Arc::new(Sieve::new(env_bound()))));
    let want = n.min(MAX_SIEVE_BOUND);
    let mut guard = cell.lock().unwrap_or_else(|e| e.into_inner());
    if guard.bound() < want {
        *guard = Arc::new(Sieve::new(want));
    }
    guard.clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_matches_trial_division() {
        let s = Sieve::new(10_000);
        for n in 1..=10_000u64 {
            let f = s.factorize(n);
            assert_eq!(f.value(), n as u128);
            for &(p, _) in f.pairs() {
                assert!(primes::is_prime(p as u128));
            }
        }
        assert_eq!(s.primes().len(), 1229);
    }

    #[test]
    fn beyond_bound_uses_trial_division_and_splitting() {
        let s = Sieve::new(1000);
        let n = 999_999_937u64 * 7 * 7;
        assert_eq!(s.factorize(n).pairs(), &[(7, 2), (999_999_937, 1)]);
        let n = 1_000_003u64 * 1_000_033;
        assert_eq!(s.factorize(n).pairs(), &[(1_000_003, 1), (1_000_033, 1)]);
    }

    #[test]
    fn cache_grows() {
        let a = covering(200_000);
        assert!(a.bound() >= 200_000);
        let b = covering(10);
        assert!(b.bound() >= a.bound());
    }
}
