//! Multiplicative arithmetic: factorization, classical functions, the
//! Kronecker character and `L(1, chi)`, and divisor-function identities.

pub mod kronecker;
pub mod lfunc;
pub mod multiplicative;
pub mod primes;
pub mod sieve;

use num_integer::Integer;
use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};

pub use kronecker::{kronecker, r_disc, CharacterData};
pub use lfunc::{l_one_chi, LValue};
pub use multiplicative::{g_from_h, MultiplicativeFn, PrefixReport};
pub use sieve::Sieve;

/// Prime factorization with strictly increasing primes and positive exponents.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Factorization(Vec<(u64, u32)>);

impl Factorization {
    pub(crate) fn from_sorted(v: Vec<(u64, u32)>) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0].0 < w[1].0));
        Factorization(v)
    }

    /// Builds from arbitrary `(prime, exponent)` pairs, merging repeats.
    pub fn from_pairs(mut v: Vec<(u64, u32)>) -> Self {
        v.retain(|&(_, e)| e > 0);
        v.sort_unstable();
        let mut out: Vec<(u64, u32)> = Vec::with_capacity(v.len());
        for (p, e) in v {
            match out.last_mut() {
                Some((q, f)) if *q == p => *f += e,
                _ => out.push((p, e)),
            }
        }
        Factorization(out)
    }

    pub fn pairs(&self) -> &[(u64, u32)] {
        &self.0
    }

    pub fn value(&self) -> u128 {
        self.0
            .iter()
            .map(|&(p, e)| (p as u128).pow(e))
            .product()
    }

    pub fn exponent_of(&self, p: u64) -> u32 {
        self.0
            .iter()
            .find(|&&(q, _)| q == p)
            .map_or(0, |&(_, e)| e)
    }

    pub fn tau(&self) -> u64 {
        self.0.iter().map(|&(_, e)| e as u64 + 1).product()
    }

    pub fn phi(&self) -> u64 {
        self.0
            .iter()
            .map(|&(p, e)| (p - 1) * p.pow(e - 1))
            .product()
    }

    pub fn mu(&self) -> i8 {
        if self.0.iter().any(|&(_, e)| e > 1) {
            0
        } else if self.0.len() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn omega(&self) -> u32 {
        self.0.len() as u32
    }

    pub fn is_squarefree(&self) -> bool {
        self.0.iter().all(|&(_, e)| e == 1)
    }

    /// All positive divisors in increasing order.
    pub fn divisors(&self) -> Vec<u64> {
        let mut ds = vec![1u64];
        for &(p, e) in &self.0 {
            let len = ds.len();
            let mut pk = 1u64;
            for _ in 0..e {
                pk *= p;
                for i in 0..len {
                    ds.push(ds[i] * pk);
                }
            }
        }
        ds.sort_unstable();
        ds
    }
}

/// Complete factorization of `n >= 1` using the shared sieve.
pub fn factorize(n: u64) -> Result<Factorization> {
    if n == 0 {
        return Err(Error::invalid("cannot factorize 0"));
    }
    Ok(sieve::default_sieve().factorize(n))
}

/// Factorization of a 128-bit value; `0` and `1` give an empty list.
pub fn factorize_u128(mut n: u128) -> Vec<(u128, u32)> {
    let mut out: Vec<(u128, u32)> = Vec::new();
    if n <= 1 {
        return out;
    }
    if n <= u64::MAX as u128 {
        return sieve::default_sieve()
            .factorize(n as u64)
            .pairs()
            .iter()
            .map(|&(p, e)| (p as u128, e))
            .collect();
    }
    let s = sieve::default_sieve();
    for &p in s.primes() {
        let p = p as u128;
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
        }
    }
    let mut rest = Vec::new();
    primes::split_into_primes(n, &mut rest);
    rest.sort_unstable();
    for p in rest {
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    out
}

/// Number of divisors. Panics on 0.
pub fn tau(n: u64) -> u64 {
    factorize(n).expect("tau(0) is undefined").tau()
}

/// Euler's totient. Panics on 0.
pub fn phi(n: u64) -> u64 {
    factorize(n).expect("phi(0) is undefined").phi()
}

/// Moebius function. Panics on 0.
pub fn mu(n: u64) -> i8 {
    factorize(n).expect("mu(0) is undefined").mu()
}

/// Number of distinct prime factors. Panics on 0.
pub fn omega(n: u64) -> u32 {
    factorize(n).expect("omega(0) is undefined").omega()
}

/// Evaluates the splitting formula
///
/// `sum mu(d1 d2) mu(d3) / 2^{omega((d1,n1)) + omega((d2,n2))}
///  * tau(n1/(d2 d3)) tau(n2/(d1 d3)) tau(n3/(d1 d2))`
///
/// over `d2 d3 | n1`, `d1 d3 | n2`, `d1 d2 | n3`, which equals `tau(n1 n2 n3)`.
pub fn split_tau_triple(n1: u64, n2: u64, n3: u64) -> Result<u64> {
    if n1 == 0 || n2 == 0 || n3 == 0 {
        return Err(Error::invalid("split_tau_triple needs positive arguments"));
    }
    let squarefree_divisors = |n: u64| -> Vec<u64> {
        factorize(n)
            .expect("n >= 1")
            .divisors()
            .into_iter()
            .filter(|&d| mu(d) != 0)
            .collect()
    };
    let mut total = Ratio::<i128>::from_integer(0);
    for d3 in squarefree_divisors(n1.gcd(&n2)) {
        for d1 in squarefree_divisors(n2 / d3) {
            if n3 % d1 != 0 {
                continue;
            }
            for d2 in squarefree_divisors(n1 / d3) {
                if n3 % (d1 * d2) != 0 {
                    continue;
                }
                let m12 = mu(d1 * d2) as i128;
                if m12 == 0 {
                    continue;
                }
                let sign = m12 * mu(d3) as i128;
                let w = omega(d1.gcd(&n1)) + omega(d2.gcd(&n2));
                let t = tau(n1 / (d2 * d3)) as i128
                    * tau(n2 / (d1 * d3)) as i128
                    * tau(n3 / (d1 * d2)) as i128;
                total += Ratio::new(sign * t, 1i128 << w);
            }
        }
    }
    if !total.is_integer() || *total.numer() < 0 {
        return Err(Error::invalid(format!(
            "splitting sum is not a nonnegative integer: {total}"
        )));
    }
    Ok(total.to_integer() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn documented_values() {
        assert_eq!(factorize(12).unwrap().pairs(), &[(2, 2), (3, 1)]);
        assert!(factorize(1).unwrap().pairs().is_empty());
        assert_eq!(factorize(999_999_937).unwrap().pairs(), &[(999_999_937, 1)]);
        assert!(factorize(0).is_err());
        assert_eq!(tau(12), 6);
        assert_eq!(phi(9), 6);
        assert_eq!(mu(30), -1);
        assert_eq!(mu(12), 0);
        assert_eq!(mu(1), 1);
    }

    #[test]
    fn round_trip_up_to_a_million() {
        let s = sieve::default_sieve();
        let mut buf = Vec::new();
        for n in 1..=1_000_000u64 {
            buf.clear();
            s.factor_into(n, &mut buf);
            let v: u64 = buf.iter().map(|&(p, e)| p.pow(e)).product();
            assert_eq!(v, n);
            assert!(buf.windows(2).all(|w| w[0].0 < w[1].0));
        }
    }

    #[test]
    fn large_values() {
        let n = (1u64 << 63) - 1;
        let f = factorize(n).unwrap();
        assert_eq!(f.value(), n as u128);
        assert!(f.pairs().iter().all(|&(p, _)| primes::is_prime(p as u128)));
        let big: u128 = 18_446_744_073_709_551_557u128 * 9 * 1_000_003;
        assert_eq!(
            factorize_u128(big),
            vec![(3, 2), (1_000_003, 1), (18_446_744_073_709_551_557, 1)]
        );
    }

    #[test]
    fn divisors_listed() {
        assert_eq!(factorize(12).unwrap().divisors(), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(factorize(1).unwrap().divisors(), vec![1]);
    }

    #[test]
    fn split_documented_values() {
        assert_eq!(split_tau_triple(1, 1, 1).unwrap(), 1);
        assert_eq!(split_tau_triple(2, 1, 1).unwrap(), 2);
        assert_eq!(split_tau_triple(2, 2, 1).unwrap(), 3);
    }

    #[test]
    fn split_matches_tau_on_small_products() {
        for n1 in 1..=60u64 {
            for n2 in 1..=60u64 {
                for n3 in 1..=(4000 / (n1 * n2)).min(60) {
                    assert_eq!(
                        split_tau_triple(n1, n2, n3).unwrap(),
                        tau(n1 * n2 * n3),
                        "({n1},{n2},{n3})"
                    );
                }
            }
        }
    }

    proptest! {
        #[test]
        fn multiplicative_functions_agree_with_definitions(n in 1u64..5000) {
            let divs: Vec<u64> = (1..=n).filter(|d| n % d == 0).collect();
            prop_assert_eq!(tau(n), divs.len() as u64);
            prop_assert_eq!(phi(n), (1..=n).filter(|k| k.gcd(&n) == 1).count() as u64);
            let mu_sum: i64 = divs.iter().map(|&d| mu(d) as i64).sum();
            prop_assert_eq!(mu_sum, i64::from(n == 1));
        }
    }
}
