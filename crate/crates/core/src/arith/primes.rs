//! Deterministic primality and Pollard-Brent splitting for the cofactors left
//! after trial division.

use num_integer::Integer;

#[inline]
fn mul_mod(a: u128, b: u128, m: u128) -> u128 {
    if m <= u64::MAX as u128 {
        return (a * b) % m;
    }
    // 256-bit product unavailable: double-and-add
    let (mut a, mut b) = (a % m, b % m);
    let mut acc = 0u128;
    while b > 0 {
        if b & 1 == 1 {
            acc = add_mod(acc, a, m);
        }
        a = add_mod(a, a, m);
        b >>= 1;
    }
    acc
}

#[inline]
fn add_mod(a: u128, b: u128, m: u128) -> u128 {
    let (s, overflow) = a.overflowing_add(b);
    if overflow || s >= m {
        s.wrapping_sub(m)
    } else {
        s
    }
}

fn pow_mod(mut base: u128, mut exp: u128, m: u128) -> u128 {
    let mut acc = 1u128 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

const SMALL_PRIMES: [u128; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Miller-Rabin with the first twelve primes as bases: deterministic below
/// 3.18 * 10^23, which covers every u64 and the u128 values met in practice.
pub fn is_prime(n: u128) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &SMALL_PRIMES {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &SMALL_PRIMES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// A nontrivial factor of the odd composite `n`.
fn pollard_brent(n: u128) -> u128 {
    if n % 2 == 0 {
        return 2;
    }
    let mut c = 1u128;
    loop {
        let f = |x: u128| add_mod(mul_mod(x, x, n), c, n);
        let (mut x, mut y, mut g) = (2u128, 2u128, 1u128);
        let mut q = 1u128;
        let mut ys = y;
        let mut r = 1u64;
        let m = 64u64;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..m.min(r - k) {
                    y = f(y);
                    let diff = if x > y { x - y } else { y - x };
                    q = mul_mod(q, diff, n);
                }
                g = q.gcd(&n);
                k += m;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                let diff = if x > ys { x - ys } else { ys - x };
                g = diff.gcd(&n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
        c += 1;
    }
}

/// Prime factors (with multiplicity, unsorted) of `n > 1` with no small
/// factors left.
pub(crate) fn split_into_primes(n: u128, out: &mut Vec<u128>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let d = pollard_brent(n);
    split_into_primes(d, out);
    split_into_primes(n / d, out);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_is_prime(n: u128) -> bool {
        if n < 2 {
            return false;
        }
        let mut d = 2;
        while d * d <= n {
            if n % d == 0 {
                return false;
            }
            d += 1;
        }
        true
    }

    #[test]
    fn agrees_with_trial_division() {
        for n in 0..20_000u128 {
            assert_eq!(is_prime(n), trial_is_prime(n), "n = {n}");
        }
        assert!(is_prime(999_999_937));
        assert!(trial_is_prime(999_999_937));
    }

    #[test]
    fn strong_pseudoprimes_rejected() {
        // strong pseudoprimes to several small bases
        for n in [2047u128, 1_373_653, 25_326_001, 3_215_031_751, 3_825_123_056_546_413_051] {
            assert!(!is_prime(n), "{n}");
        }
        assert!(is_prime(18_446_744_073_709_551_557)); // largest prime below 2^64
    }

    #[test]
    fn splits_semiprimes() {
        let n = 999_999_937u128 * 1_000_000_007u128;
        let mut v = Vec::new();
        split_into_primes(n, &mut v);
        v.sort();
        assert_eq!(v, vec![999_999_937, 1_000_000_007]);
        let n = 18_446_744_073_709_551_557u128 * 3_000_000_019;
        let mut v = Vec::new();
        split_into_primes(n, &mut v);
        v.sort();
        assert_eq!(v, vec![3_000_000_019, 18_446_744_073_709_551_557]);
    }
}
