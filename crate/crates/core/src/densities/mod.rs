//! Local densities, the finite-level p-adic count `N_{lambda,mu}(p^n)`, and
//! the Euler-product constants `C` and `C*`.
//!
//! Every sum over exponent triples is truncated at `nu1 + nu2 + nu3 <= nu_max`
//! and reported together with an empirical tail: the last two shells
//! calibrate an envelope `c (s + 1)^3 q^s` which is then summed past the cutoff.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use crate::arith::{l_one_chi, sieve, CharacterData, MultiplicativeFn};
use crate::error::{Error, Result};
use crate::forms::FormTriple;
use crate::lattice::{PrimeLocal, TripleIndex};

/// Default number of primes swept by the constants.
pub const DEFAULT_PRIME_CUTOFF: u64 = 10_000;
/// Default truncation of the exponent sums.
pub const DEFAULT_NU_MAX: u32 = 12;
/// Largest `p^n` the `N_{lambda,mu}` oracle sweeps.
pub const ORACLE_POINTS: u64 = 1_000_000;

/// `(lambda_i, mu_i) = (v_p(d_i), v_p(D_i))` at one prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LocalIndex {
    pub lambda: [u32; 3],
    pub mu: [u32; 3],
}

impl LocalIndex {
    pub fn new(lambda: [u32; 3], mu: [u32; 3]) -> Result<Self> {
        if (0..3).any(|i| lambda[i] > mu[i]) {
            return Err(Error::invalid(format!("lambda {lambda:?} exceeds mu {mu:?}")));
        }
        Ok(LocalIndex { lambda, mu })
    }

    pub fn from_divisors(p: u64, d: &TripleIndex, big_d: &TripleIndex) -> Result<Self> {
        if !d.divides(big_d) {
            return Err(Error::invalid(format!("{d} does not divide {big_d} componentwise")));
        }
        LocalIndex::new(d.valuations(p), big_d.valuations(p))
    }

    /// `N_i = max(mu_i, nu_i + lambda_i)`.
    pub fn exponents(&self, nu: [u32; 3]) -> [u32; 3] {
        [0, 1, 2].map(|i| self.mu[i].max(nu[i] + self.lambda[i]))
    }

    pub fn is_trivial(&self) -> bool {
        self.mu == [0, 0, 0]
    }
}

/// A truncated local density with its tail estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalDensity {
    pub p: u64,
    pub value: f64,
    pub nu_cutoff: u32,
    pub tail_estimate: f64,
}

/// An Euler-product constant with its truncation metadata.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityReport {
    pub value: f64,
    pub nu_cutoff: u32,
    pub prime_cutoff: u64,
    pub tail_estimate: f64,
    pub accelerated: bool,
    /// `L(1, chi_disc)` when the product was accelerated.
    pub l_value: Option<f64>,
    /// Primes above the cutoff included because they are bad.
    pub extra_primes: Vec<u64>,
    pub primes_used: usize,
}

/// Exponent triples with `nu1 + nu2 + nu3 = s`.
fn shell(s: u32) -> impl Iterator<Item = [u32; 3]> {
    (0..=s).flat_map(move |a| (0..=s - a).map(move |b| [a, b, s - a - b]))
}

/// `sum_{s > s0} c (s + 1)^3 q^s` with `c` fitted to the shells `s0 - 1`, `s0`.
fn envelope_tail(shells: &[f64], q: f64) -> f64 {
    let s0 = shells.len() - 1;
    let fit = |s: usize| shells[s].abs() / ((s as f64 + 1.0).powi(3) * q.powi(s as i32));
    let c = if s0 == 0 { fit(0) } else { fit(s0).max(fit(s0 - 1)) };
    let mut tail = 0.0;
    let mut s = s0 + 1;
    loop {
        let t = c * (s as f64 + 1.0).powi(3) * q.powi(s as i32);
        tail += t;
        if t <= 1e-18 * tail.max(1e-300) || s > s0 + 4000 {
            break;
        }
        s += 1;
    }
    tail
}

/// Truncated sum over `nu1 + nu2 + nu3 <= nu_max`, with shells kept for the tail.
fn shell_sum(
    nu_max: u32,
    q: f64,
    mut term: impl FnMut([u32; 3]) -> Result<f64>,
) -> Result<(f64, f64)> {
    let mut shells = Vec::with_capacity(nu_max as usize + 1);
    for s in 0..=nu_max {
        let mut acc = 0.0;
        for nu in shell(s) {
            acc += term(nu)?;
        }
        shells.push(acc);
    }
    Ok((shells.iter().sum(), envelope_tail(&shells, q)))
}

fn euler_weight(p: u64) -> f64 {
    (1.0 - 1.0 / p as f64).powi(3)
}

/// Decay rate for sums of `rho`: the classes `x = 0 mod p^a` at
/// `nu = (a, a, 2a)` decay like `p^{-s/2}`.
fn rho_rate(p: u64) -> f64 {
    (p as f64).powf(-0.5)
}

fn rho_star_rate(p: u64) -> f64 {
    1.0 / p as f64
}

/// `sigma_p = (1 - 1/p)^3 sum_nu rho(p^nu) / p^{2 |nu|}`.
pub fn sigma_p(p: u64, t: &FormTriple, nu_max: u32) -> Result<LocalDensity> {
    sigma_p_local(p, &LocalIndex::new([0; 3], [0; 3])?, t, nu_max)
}

/// `sigma_p(d, D)`: the same sum at the exponents `N_i = max(mu_i, nu_i + lambda_i)`.
pub fn sigma_p_dd(
    p: u64,
    d: &TripleIndex,
    big_d: &TripleIndex,
    t: &FormTriple,
    nu_max: u32,
) -> Result<LocalDensity> {
    sigma_p_local(p, &LocalIndex::from_divisors(p, d, big_d)?, t, nu_max)
}

pub fn sigma_p_local(p: u64, idx: &LocalIndex, t: &FormTriple, nu_max: u32) -> Result<LocalDensity> {
    let mut local = PrimeLocal::new(t, p);
    let (sum, tail) = shell_sum(nu_max, rho_rate(p), |nu| local.rho_f64(idx.exponents(nu)))?;
    let w = euler_weight(p);
    Ok(LocalDensity {
        p,
        value: w * sum,
        nu_cutoff: nu_max,
        tail_estimate: w * tail,
    })
}

/// `sigma*_p(d, D)`: `rho*` at the exponents `N_i`, with the `nu = 0` term
/// replaced by `1 - 1/p^2` when `p` does not divide `D1 D2 D3`.
pub fn sigma_star_p_dd(
    p: u64,
    d: &TripleIndex,
    big_d: &TripleIndex,
    t: &FormTriple,
    nu_max: u32,
) -> Result<LocalDensity> {
    sigma_star_p_local(p, &LocalIndex::from_divisors(p, d, big_d)?, t, nu_max)
}

pub fn sigma_star_p_local(
    p: u64,
    idx: &LocalIndex,
    t: &FormTriple,
    nu_max: u32,
) -> Result<LocalDensity> {
    let mut local = PrimeLocal::new(t, p);
    let trivial = idx.is_trivial();
    let pf = p as f64;
    let (sum, tail) = shell_sum(nu_max, rho_star_rate(p), |nu| {
        if trivial && nu == [0, 0, 0] {
            Ok(1.0 - 1.0 / (pf * pf))
        } else {
            local.rho_star_f64(idx.exponents(nu))
        }
    })?;
    let w = euler_weight(p);
    Ok(LocalDensity {
        p,
        value: w * sum,
        nu_cutoff: nu_max,
        tail_estimate: w * tail,
    })
}

fn valuation_capped(a: i128, p: u64, n: u32) -> u32 {
    let mut a = a.rem_euclid((p as i128).pow(n));
    if a == 0 {
        return n;
    }
    let mut k = 0;
    while a % p as i128 == 0 {
        a /= p as i128;
        k += 1;
    }
    k
}

/// `S_lambda(A; p^n) = #{(x, y) mod p^n : p^lambda x y = A mod p^n}`.
///
/// With `alpha = v_p(A)` capped at `n`: zero when `alpha < min(lambda, n)`;
/// `p^{2n}` when `lambda >= n` and `A = 0 mod p^n`; `p^{n+lambda}(1 - 1/p)(1 + alpha - lambda)` when
/// `lambda <= alpha < n`; and `p^{n+lambda}(1 + (n - lambda)(1 - 1/p))` when
/// `A = 0 mod p^n`.
pub fn count_s_lambda(a: i128, p: u64, n: u32, lambda: u32) -> u128 {
    let pp = p as u128;
    let alpha = valuation_capped(a, p, n);
    if alpha < lambda.min(n) {
        return 0;
    }
    if lambda >= n {
        return pp.pow(2 * n);
    }
    let base = pp.pow(n + lambda - 1);
    if alpha < n {
        base * (pp - 1) * (1 + alpha - lambda) as u128
    } else {
        base * (pp + (n - lambda) as u128 * (pp - 1))
    }
}

/// `S_lambda(A; p^n)` by enumerating all pairs.
pub fn count_s_lambda_bruteforce(a: i128, p: u64, n: u32, lambda: u32) -> u128 {
    let m = (p as i128).pow(n);
    let a = a.rem_euclid(m);
    let pl = (p as i128).pow(lambda) % m;
    let mut c = 0;
    for x in 0..m {
        for y in 0..m {
            if (pl * x % m * y) % m == a {
                c += 1;
            }
        }
    }
    c
}

/// `S_lambda` as a function of `alpha = v_p(A)`, capped at `n`.
fn s_lambda_at(alpha: u32, p: u64, n: u32, lambda: u32) -> u128 {
    let a = if alpha >= n { 0 } else { (p as i128).pow(alpha) };
    count_s_lambda(a, p, n, lambda)
}

fn oracle_modulus(p: u64, n: u32, bound: u64) -> Result<u64> {
    p.checked_pow(n)
        .filter(|&m| m <= bound)
        .ok_or_else(|| Error::BudgetExceeded(format!("p^n exceeds {bound} at p = {p}, n = {n}")))
}

/// Summand of `N_{lambda,mu}` at the capped valuations of `L1(x), L2(x), Q(x)`.
fn n_weight(alpha: [u32; 3], p: u64, n: u32, idx: &LocalIndex) -> u128 {
    if (0..3).any(|i| alpha[i] < idx.mu[i].min(n)) {
        return 0;
    }
    (0..3).map(|i| s_lambda_at(alpha[i], p, n, idx.lambda[i])).product()
}

fn n_normalize(total: BigInt, p: u64, n: u32, idx: &LocalIndex) -> BigRational {
    let expo = 5 * n + idx.lambda.iter().sum::<u32>();
    BigRational::new(total, num_traits::pow(BigInt::from(p), expo as usize))
}

/// `N_{lambda,mu}(p^n) / p^{5n + |lambda|}` exactly.
///
/// The `(s_i, t_i)` are counted with the closed form for `S_lambda`, whose
/// value depends on `x` only through `v_p(L_i(x))` capped at `n`. Writing
/// `x = p^k u (1, t)` or `x = p^k u (p s, 1)` with `u` a unit, those
/// valuations are `k + v_p(L_i(1, t))` and `2k + v_p(Q(1, t))`, so the `p^{2n}`
/// residues collapse to `O(p^n)` classes. Needs `p^n <= ORACLE_POINTS`.
pub fn n_lambda_mu_oracle(p: u64, n: u32, idx: &LocalIndex, t: &FormTriple) -> Result<BigRational> {
    oracle_modulus(p, n, ORACLE_POINTS)?;
    let (l1, l2, q) = (t.l1(), t.l2(), t.q());
    let pi = p as i128;
    // capped valuation triple -> number of x mod p^n
    let mut hist: std::collections::HashMap<[u32; 3], u128> = std::collections::HashMap::new();
    *hist.entry([n; 3]).or_default() += 1;
    for k in 0..n {
        let m = n - k;
        let pm = pi.pow(m);
        let units = (pm - pm / pi) as u128;
        let mut add = |y1: i128, y2: i128| {
            let v = [
                l1.a as i128 * y1 + l1.b as i128 * y2,
                l2.a as i128 * y1 + l2.b as i128 * y2,
                (q.a3 as i128 * y1 + q.c3 as i128 * y2) * y1 + q.b3 as i128 * y2 * y2,
            ];
            let shift = [k, k, 2 * k];
            let alpha = [0, 1, 2].map(|i| (shift[i] + valuation_capped(v[i], p, m)).min(n));
            *hist.entry(alpha).or_default() += units;
        };
        for s in 0..pm {
            add(1, s);
        }
        for s in 0..pm / pi {
            add(pi * s, 1);
        }
    }
    let mut total = BigInt::from(0);
    for (alpha, count) in hist {
        let w = n_weight(alpha, p, n, idx);
        if w != 0 {
            total += BigInt::from(w) * BigInt::from(count);
        }
    }
    Ok(n_normalize(total, p, n, idx))
}

/// The same quantity by enumerating all `x mod p^n`; needs `p^{2n} <= ORACLE_POINTS`.
pub fn n_lambda_mu_bruteforce(p: u64, n: u32, idx: &LocalIndex, t: &FormTriple) -> Result<BigRational> {
    let m = oracle_modulus(p, n, ORACLE_POINTS.isqrt())?;
    let mut total = BigInt::from(0);
    for x1 in 0..m as i64 {
        for x2 in 0..m as i64 {
            let (a, b, c) = t.values_fast(x1, x2);
            let alpha = [a, b, c].map(|v| valuation_capped(v, p, n));
            let w = n_weight(alpha, p, n, idx);
            if w != 0 {
                total += BigInt::from(w);
            }
        }
    }
    Ok(n_normalize(total, p, n, idx))
}

/// One Euler factor of `C`:
/// `(1 - 1/p)^3 (1 + sum_{nu >= 1} (rho(p^nu,1,1) + rho(1,p^nu,1) + rho(1,1,p^nu)) / p^{2 nu})`.
pub fn c_factor(p: u64, t: &FormTriple, nu_max: u32) -> Result<LocalDensity> {
    let mut local = PrimeLocal::new(t, p);
    let mut shells = vec![1.0];
    for nu in 1..=nu_max.max(1) {
        shells.push(
            local.rho_f64([nu, 0, 0])? + local.rho_f64([0, nu, 0])? + local.rho_f64([0, 0, nu])?,
        );
    }
    let w = euler_weight(p);
    Ok(LocalDensity {
        p,
        value: w * shells.iter().sum::<f64>(),
        nu_cutoff: nu_max,
        tail_estimate: w * envelope_tail(&shells, 1.0 / p as f64),
    })
}

/// One Euler factor of `C*`: `(1 - 1/p)^3 sum_nu g(p^{|nu|}) rho_dagger_p(nu)`
/// with `g = tau * h`.
pub fn c_star_factor(p: u64, t: &FormTriple, h: &MultiplicativeFn, nu_max: u32) -> Result<LocalDensity> {
    let mut local = PrimeLocal::new(t, p);
    let (sum, tail) = shell_sum(nu_max, rho_star_rate(p), |nu| {
        let g = h.g_at_prime_power(p, nu.iter().sum());
        if g == 0 {
            return Ok(0.0);
        }
        Ok(g as f64 * local.rho_dagger_f64(nu)?)
    })?;
    let w = euler_weight(p);
    Ok(LocalDensity {
        p,
        value: w * sum,
        nu_cutoff: nu_max,
        tail_estimate: w * tail,
    })
}

/// Primes up to the cutoff together with the bad primes above it.
fn prime_set(t: &FormTriple, prime_cutoff: u64) -> (Vec<u64>, Vec<u64>) {
    if prime_cutoff < 2 {
        return (Vec::new(), Vec::new());
    }
    let s = sieve::covering(prime_cutoff);
    let mut ps: Vec<u64> = s
        .primes()
        .iter()
        .map(|&p| p as u64)
        .take_while(|&p| p <= prime_cutoff)
        .collect();
    let extra: Vec<u64> = t.bad_primes().into_iter().filter(|&p| p > prime_cutoff).collect();
    ps.extend(&extra);
    (ps, extra)
}

fn euler_constant(
    t: &FormTriple,
    prime_cutoff: u64,
    nu_max: u32,
    accelerate: bool,
    factor: impl Fn(u64) -> Result<LocalDensity>,
) -> Result<DensityReport> {
    let disc = t.resultants().delta;
    let chi = CharacterData::new(disc);
    let (primes, extra) = prime_set(t, prime_cutoff);
    let mut log_value = 0.0f64;
    let mut nu_tail_rel = 0.0f64;
    let mut log_euler = 0.0f64; // log of prod (1 - chi(p)/p)^{-1} over primes <= cutoff
    let mut edge = 0.0f64; // largest p^2 |f_p - 1| over the top half of the primes
    for &p in &primes {
        let f = factor(p)?;
        if !(f.value > 0.0) {
            return Err(Error::invalid(format!("Euler factor at p = {p} is {}", f.value)));
        }
        let c = chi.chi(p) as f64 / p as f64;
        let v = if accelerate { f.value * (1.0 - c) } else { f.value };
        log_value += v.ln();
        nu_tail_rel += f.tail_estimate / f.value;
        if p <= prime_cutoff {
            log_euler -= (1.0 - c).ln();
            if 2 * p > prime_cutoff {
                let dev = if accelerate { v - 1.0 } else { f.value * (1.0 - c) - 1.0 };
                edge = edge.max(dev.abs() * (p * p) as f64);
            }
        }
    }
    let l = if accelerate || prime_cutoff >= 2 {
        Some(l_one_chi(&chi, 1e-9)?.value)
    } else {
        None
    };
    let mut value = log_value.exp();
    // sum_{p > P} 1/p^2 ~ 1 / (P log P)
    let pc = (prime_cutoff.max(2)) as f64;
    let square_tail = edge / (pc * pc.ln());
    let prime_tail_rel = if accelerate {
        value *= l.expect("computed when accelerating");
        square_tail
    } else {
        match l {
            Some(l) => (l.ln() - log_euler).abs() + square_tail,
            None => 0.0,
        }
    };
    Ok(DensityReport {
        value,
        nu_cutoff: nu_max,
        prime_cutoff,
        tail_estimate: value.abs() * (nu_tail_rel + prime_tail_rel),
        accelerated: accelerate,
        l_value: if accelerate { l } else { None },
        extra_primes: extra,
        primes_used: primes.len(),
    })
}

/// `C = prod_p (1 - 1/p)^3 (1 + sum_nu (rho(p^nu,1,1) + rho(1,p^nu,1) + rho(1,1,p^nu)) / p^{2nu})`.
///
/// In accelerated mode each factor is multiplied by `1 - chi(p)/p` and the
/// product by `L(1, chi)`, which turns a conditionally convergent product
/// into an absolutely convergent one.
pub fn constant_c(t: &FormTriple, prime_cutoff: u64, nu_max: u32, accelerate: bool) -> Result<DensityReport> {
    euler_constant(t, prime_cutoff, nu_max, accelerate, |p| c_factor(p, t, nu_max))
}

/// `C* = prod_p (1 - 1/p)^3 sum_nu g(p^{|nu|}) rho_dagger_p(nu)` with
/// `g = tau * h`; acceleration as for `C`.
pub fn constant_c_star(
    t: &FormTriple,
    h: &MultiplicativeFn,
    prime_cutoff: u64,
    nu_max: u32,
    accelerate: bool,
) -> Result<DensityReport> {
    euler_constant(t, prime_cutoff, nu_max, accelerate, |p| c_star_factor(p, t, h, nu_max))
}

/// `prod_p sigma_p(d, D)` over the same prime set as the constants, with
/// the acceleration by `L(1, chi)`; `star` selects `sigma*_p`.
pub fn sigma_product(
    t: &FormTriple,
    d: &TripleIndex,
    big_d: &TripleIndex,
    prime_cutoff: u64,
    nu_max: u32,
    star: bool,
) -> Result<DensityReport> {
    let mut r = euler_constant(t, prime_cutoff, nu_max, true, |p| {
        let idx = LocalIndex::from_divisors(p, d, big_d)?;
        if star {
            sigma_star_p_local(p, &idx, t, nu_max)
        } else {
            sigma_p_local(p, &idx, t, nu_max)
        }
    })?;
    // primes dividing D above the cutoff carry the conditions and are kept
    let mut extra: Vec<u64> = Vec::new();
    for p in big_d.primes() {
        if p > prime_cutoff && !r.extra_primes.contains(&p) {
            extra.push(p);
        }
    }
    for p in extra {
        let idx = LocalIndex::from_divisors(p, d, big_d)?;
        let f = if star {
            sigma_star_p_local(p, &idx, t, nu_max)?
        } else {
            sigma_p_local(p, &idx, t, nu_max)?
        };
        let plain = if star {
            sigma_star_p_local(p, &LocalIndex::new([0; 3], [0; 3])?, t, nu_max)?
        } else {
            sigma_p_local(p, &LocalIndex::new([0; 3], [0; 3])?, t, nu_max)?
        };
        // the factor of a prime above the cutoff is taken as 1 in the
        // truncated product; a conditioned prime contributes its ratio
        r.value *= f.value / plain.value;
        r.tail_estimate += r.value.abs() * f.tail_estimate / f.value;
        r.extra_primes.push(p);
    }
    Ok(r)
}

#[cfg(test)]
mod tests;
