//! The congruence sets `Lambda(d) = {x : d1 | L1(x), d2 | L2(x), d3 | Q(x)}`
//! and the counting functions built on them.
//!
//! `rho(d)` counts `Lambda(d)` in `[0, d1 d2 d3)^2` and `rho*(d)` adds the
//! condition `gcd(x1, x2, d1 d2 d3) = 1`. Both are multiplicative in `d`.
//! At a prime `p` everything is reduced to the projective count
//! `T(nu) = #{[x] in P^1(Z/p^M) : p^nu_i | L_i(x), p^nu_3 | Q(x)}`, `M = max nu`,
//! through `rho*(p^nu) = p^{2(S - M)} phi(p^M) T(nu)` with `S = sum nu`.

mod brute;

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{factorize, kronecker};
use crate::error::{Error, Result};
use crate::forms::FormTriple;
use crate::rational::serde_rational;

pub use brute::MAX_PAIRS as BRUTE_FORCE_PAIRS;

/// Nodes the digit tree may visit for one projective count.
const TREE_BUDGET: u64 = 200_000_000;

/// A triple of positive moduli `(d1, d2, d3)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "[u64; 3]", try_from = "[u64; 3]")]
pub struct TripleIndex {
    pub d1: u64,
    pub d2: u64,
    pub d3: u64,
}

impl TripleIndex {
    pub fn new(d1: u64, d2: u64, d3: u64) -> Result<Self> {
        if d1 == 0 || d2 == 0 || d3 == 0 {
            return Err(Error::invalid("triple index entries must be >= 1"));
        }
        Ok(TripleIndex { d1, d2, d3 })
    }

    pub fn unit() -> Self {
        TripleIndex { d1: 1, d2: 1, d3: 1 }
    }

    pub fn as_array(&self) -> [u64; 3] {
        [self.d1, self.d2, self.d3]
    }

    pub fn product(&self) -> u128 {
        self.d1 as u128 * self.d2 as u128 * self.d3 as u128
    }

    pub fn lcm(&self) -> u64 {
        self.d1.lcm(&self.d2).lcm(&self.d3)
    }

    /// Componentwise product.
    pub fn mul(&self, o: &TripleIndex) -> Result<TripleIndex> {
        let m = |a: u64, b: u64| a.checked_mul(b).ok_or(Error::Overflow("triple index product"));
        TripleIndex::new(m(self.d1, o.d1)?, m(self.d2, o.d2)?, m(self.d3, o.d3)?)
    }

    /// Componentwise divisibility `self | o`.
    pub fn divides(&self, o: &TripleIndex) -> bool {
        o.d1 % self.d1 == 0 && o.d2 % self.d2 == 0 && o.d3 % self.d3 == 0
    }

    /// Exponents `(v_p(d1), v_p(d2), v_p(d3))`.
    pub fn valuations(&self, p: u64) -> [u32; 3] {
        self.as_array().map(|d| valuation(d as u128, p))
    }

    /// Primes dividing `d1 d2 d3`, increasing.
    pub fn primes(&self) -> Vec<u64> {
        let mut ps: Vec<u64> = self
            .as_array()
            .iter()
            .flat_map(|&d| factorize(d).expect("d >= 1").pairs().to_vec())
            .map(|(p, _)| p)
            .collect();
        ps.sort_unstable();
        ps.dedup();
        ps
    }
}

impl From<TripleIndex> for [u64; 3] {
    fn from(d: TripleIndex) -> Self {
        d.as_array()
    }
}

impl TryFrom<[u64; 3]> for TripleIndex {
    type Error = Error;
    fn try_from(a: [u64; 3]) -> Result<Self> {
        TripleIndex::new(a[0], a[1], a[2])
    }
}

impl std::fmt::Display for TripleIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {})", self.d1, self.d2, self.d3)
    }
}

/// A count over the box `[0, d1 d2 d3)^2` together with its density.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RhoValue {
    pub count: u128,
    pub modulus: u128,
    #[serde(with = "serde_rational")]
    pub normalized: BigRational,
}

impl RhoValue {
    fn new(count: u128, modulus: u128) -> Self {
        let m2 = BigInt::from(modulus) * BigInt::from(modulus);
        RhoValue {
            count,
            modulus,
            normalized: BigRational::new(BigInt::from(count), m2),
        }
    }

    fn from_density(normalized: BigRational, modulus: u128) -> Result<Self> {
        let m = BigInt::from(modulus);
        let c = &normalized * BigRational::from_integer(&m * &m);
        if !c.is_integer() {
            return Err(Error::invalid("density does not give an integral count"));
        }
        let count = c
            .to_integer()
            .to_u128()
            .ok_or(Error::Overflow("rho count"))?;
        Ok(RhoValue {
            count,
            modulus,
            normalized,
        })
    }
}

pub(crate) fn valuation(mut n: u128, p: u64) -> u32 {
    if n == 0 {
        return u32::MAX;
    }
    let p = p as u128;
    let mut k = 0;
    while n % p == 0 {
        n /= p;
        k += 1;
    }
    k
}

fn valuation_i128(n: i128, p: u64) -> u32 {
    valuation(n.unsigned_abs(), p)
}

/// `d1 | L1(x)`, `d2 | L2(x)` and `d3 | Q(x)`.
pub fn in_lambda(x: (i64, i64), d: &TripleIndex, t: &FormTriple) -> bool {
    let (a, b, c) = t.values_fast(x.0, x.1);
    a % d.d1 as i128 == 0 && b % d.d2 as i128 == 0 && c % d.d3 as i128 == 0
}

/// `rho(d)` by enumeration of one period of `Lambda(d)`.
pub fn rho_bruteforce(d: &TripleIndex, t: &FormTriple) -> Result<RhoValue> {
    Ok(RhoValue::new(brute::count(t, d, false)?, d.product()))
}

/// `rho*(d)` by enumeration of one period of `Lambda(d)`.
pub fn rho_star_bruteforce(d: &TripleIndex, t: &FormTriple) -> Result<RhoValue> {
    Ok(RhoValue::new(brute::count(t, d, true)?, d.product()))
}

/// Local counts at one prime, memoized over exponent triples.
#[derive(Debug, Clone)]
pub struct PrimeLocal {
    p: u64,
    forms: FormTriple,
    good: bool,
    chi: i8,
    /// `(v_p(ell1), v_p(ell2), v_p(q))`.
    shifts: [u32; 3],
    reduced: Option<Box<PrimeLocal>>,
    memo: HashMap<[u32; 3], u64>,
}

impl PrimeLocal {
    pub fn new(t: &FormTriple, p: u64) -> Self {
        let r = t.resultants();
        let dec = t.primitive_decomposition();
        let divides = |v: i128| v % p as i128 == 0;
        let good = p != 2
            && ![r.delta, r.delta12, r.delta13, r.delta23]
                .into_iter()
                .chain([dec.ell1, dec.ell2, dec.q].map(i128::from))
                .any(divides);
        let shifts = [dec.ell1, dec.ell2, dec.q].map(|c| valuation_i128(c as i128, p));
        let reduced = (shifts != [0, 0, 0]).then(|| Box::new(PrimeLocal::new(&t.primitive(), p)));
        PrimeLocal {
            p,
            forms: t.clone(),
            good,
            chi: if good { kronecker(r.delta, p as i128) } else { 0 },
            shifts,
            reduced,
            memo: HashMap::new(),
        }
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    /// Whether `p` avoids `2 delta delta12 delta13 delta23 ell1 ell2 q`.
    pub fn is_good(&self) -> bool {
        self.good
    }

    /// The projective count `T(nu)`; needs `sum nu > 0`.
    pub fn projective_count(&mut self, nu: [u32; 3]) -> Result<u64> {
        debug_assert!(nu.iter().any(|&v| v > 0));
        if let Some(&c) = self.memo.get(&nu) {
            return Ok(c);
        }
        let c = if self.good {
            match nu {
                [_, 0, 0] | [0, _, 0] => 1,
                [0, 0, _] => (1 + self.chi as i64) as u64,
                _ => 0,
            }
        } else {
            self.tree_count(nu)?
        };
        self.memo.insert(nu, c);
        Ok(c)
    }

    fn tree_count(&self, nu: [u32; 3]) -> Result<u64> {
        let m = *nu.iter().max().expect("three entries");
        let p = self.p as i128;
        let mut pows = vec![1i128];
        for _ in 0..m {
            let next = pows.last().unwrap() * p;
            if next >= 1i128 << 125 {
                return Err(Error::Overflow("p^M in the projective count"));
            }
            pows.push(next);
        }
        let (l1, l2, q) = (self.forms.l1(), self.forms.l2(), self.forms.q());
        // coefficients of f(t) = c0 + c1 t + c2 t^2 on (1, t) and on (s, 1)
        let on_t = [
            [l1.a, l1.b, 0],
            [l2.a, l2.b, 0],
            [q.a3, q.c3, q.b3],
        ];
        let on_s = [
            [l1.b, l1.a, 0],
            [l2.b, l2.a, 0],
            [q.b3, q.c3, q.a3],
        ];
        let mut nodes = 0u64;
        let a = self.walk(&on_t, nu, &pows, false, &mut nodes)?;
        let b = self.walk(&on_s, nu, &pows, true, &mut nodes)?;
        Ok(a + b)
    }

    /// Counts `t mod p^M` with `p^min(nu_f, j) | f(t)` at every level `j`,
    /// optionally forcing `p | t`.
    fn walk(
        &self,
        polys: &[[i64; 3]; 3],
        nu: [u32; 3],
        pows: &[i128],
        force_p: bool,
        nodes: &mut u64,
    ) -> Result<u64> {
        let m = pows.len() - 1;
        let p = self.p as i128;
        let eval = |f: &[i64; 3], t: i128, q: i128| -> i128 {
            let c = f.map(|c| (c as i128).rem_euclid(q));
            let t = t.rem_euclid(q);
            (mul_mod(mul_mod(c[2], t, q) + c[1], t, q) + c[0]) % q
        };
        let mut count = 0u64;
        let mut stack: Vec<(i128, usize)> = vec![(0, 0)];
        while let Some((t, j)) = stack.pop() {
            if j == m {
                count += 1;
                continue;
            }
            let digits = if force_p && j == 0 { 1 } else { p };
            for dgt in 0..digits {
                *nodes += 1;
                if *nodes > TREE_BUDGET {
                    return Err(Error::BudgetExceeded(format!(
                        "projective count at p = {} exceeds {TREE_BUDGET} nodes",
                        self.p
                    )));
                }
                let t2 = t + dgt * pows[j];
                let ok = polys.iter().zip(nu).all(|(f, v)| {
                    let e = (v as usize).min(j + 1);
                    e == 0 || eval(f, t2, pows[e]) == 0
                });
                if ok {
                    stack.push((t2, j + 1));
                }
            }
        }
        Ok(count)
    }

    /// `rho*(p^nu)` as an exact count over `[0, p^S)^2`.
    pub fn rho_star(&mut self, nu: [u32; 3]) -> Result<u128> {
        let s: u32 = nu.iter().sum();
        if s == 0 {
            return Ok(1);
        }
        let m = *nu.iter().max().unwrap();
        let t = self.projective_count(nu)? as u128;
        let p = self.p as u128;
        let pw = |e: u32| p.checked_pow(e).ok_or(Error::Overflow("rho* count"));
        let phi = pw(m)? - pw(m - 1)?;
        let side = pw(s - m)?;
        side.checked_mul(side)
            .and_then(|v| v.checked_mul(phi))
            .and_then(|v| v.checked_mul(t))
            .ok_or(Error::Overflow("rho* count"))
    }

    /// `rho*(p^nu) / p^{2S}` exactly; `1` at `nu = 0`.
    pub fn rho_star_ratio(&mut self, nu: [u32; 3]) -> Result<BigRational> {
        if nu == [0, 0, 0] {
            return Ok(BigRational::one());
        }
        let m = *nu.iter().max().unwrap();
        let t = self.projective_count(nu)?;
        let p = BigInt::from(self.p);
        Ok(BigRational::new(
            (&p - 1u32) * BigInt::from(t),
            num_traits::pow(p, m as usize + 1),
        ))
    }

    /// `rho*(p^nu) / p^{2S}` in floating point; `1` at `nu = 0`.
    pub fn rho_star_f64(&mut self, nu: [u32; 3]) -> Result<f64> {
        if nu == [0, 0, 0] {
            return Ok(1.0);
        }
        let m = *nu.iter().max().unwrap();
        let t = self.projective_count(nu)?;
        let p = self.p as f64;
        Ok((1.0 - 1.0 / p) * t as f64 * p.powi(-(m as i32)))
    }

    /// Exponents after the content reduction: `nu_i - v_p(content_i)`, floored at 0.
    fn reduce_nu(&self, nu: [u32; 3]) -> [u32; 3] {
        [0, 1, 2].map(|i| nu[i].saturating_sub(self.shifts[i]))
    }

    /// The exponent triples `nu'(k)` of the k-sum, with `k` from 0 to
    /// `max(nu1, nu2, ceil(nu3 / 2))`.
    fn k_terms(nu: [u32; 3]) -> impl Iterator<Item = (u32, [u32; 3])> {
        let kmax = nu[0].max(nu[1]).max(nu[2].div_ceil(2));
        (0..=kmax).map(move |k| {
            (
                k,
                [
                    nu[0].saturating_sub(k),
                    nu[1].saturating_sub(k),
                    nu[2].saturating_sub(2 * k),
                ],
            )
        })
    }

    /// `rho(p^nu) / p^{2S}` exactly, for any forms (content removed first).
    pub fn rho_ratio(&mut self, nu: [u32; 3]) -> Result<BigRational> {
        if let Some(r) = self.reduced.as_mut() {
            let nu = [0, 1, 2].map(|i| nu[i].saturating_sub(self.shifts[i]));
            return r.rho_ratio(nu);
        }
        let p2 = BigInt::from(self.p) * BigInt::from(self.p);
        let mut acc = BigRational::zero();
        for (k, nk) in Self::k_terms(nu) {
            let w = BigRational::new(BigInt::one(), num_traits::pow(p2.clone(), k as usize));
            acc += self.rho_star_ratio(nk)? * w;
        }
        Ok(acc)
    }

    /// `rho(p^nu) / p^{2S}` in floating point.
    pub fn rho_f64(&mut self, nu: [u32; 3]) -> Result<f64> {
        if self.reduced.is_some() {
            let nu = self.reduce_nu(nu);
            return self.reduced.as_mut().unwrap().rho_f64(nu);
        }
        let p2 = (self.p as f64).powi(-2);
        let mut acc = 0.0;
        for (k, nk) in Self::k_terms(nu) {
            acc += self.rho_star_f64(nk)? * p2.powi(k as i32);
        }
        Ok(acc)
    }

    /// `rho*` density with `nu = 0` read as the density `1 - 1/p^2` of
    /// points with `p` not dividing both coordinates.
    fn rho_star_primitive_f64(&mut self, nu: [u32; 3]) -> Result<f64> {
        if nu == [0, 0, 0] {
            let p = self.p as f64;
            return Ok(1.0 - 1.0 / (p * p));
        }
        self.rho_star_f64(nu)
    }

    fn rho_star_primitive_ratio(&mut self, nu: [u32; 3]) -> Result<BigRational> {
        if nu == [0, 0, 0] {
            let p2 = BigInt::from(self.p) * BigInt::from(self.p);
            return Ok(BigRational::new(&p2 - 1u32, p2));
        }
        self.rho_star_ratio(nu)
    }

    /// Density of points with `p` not dividing both coordinates and exact
    /// valuations `v_p(L_i(x)) = nu_i`, `v_p(Q(x)) = nu3`.
    pub fn rho_dagger_ratio(&mut self, nu: [u32; 3]) -> Result<BigRational> {
        let mut acc = BigRational::zero();
        for e in 0..8u32 {
            let bump = [e & 1, (e >> 1) & 1, (e >> 2) & 1];
            let v = self.rho_star_primitive_ratio([0, 1, 2].map(|i| nu[i] + bump[i]))?;
            if e.count_ones() % 2 == 0 {
                acc += v;
            } else {
                acc -= v;
            }
        }
        Ok(acc)
    }

    pub fn rho_dagger_f64(&mut self, nu: [u32; 3]) -> Result<f64> {
        let mut acc = 0.0;
        for e in 0..8u32 {
            let bump = [e & 1, (e >> 1) & 1, (e >> 2) & 1];
            let v = self.rho_star_primitive_f64([0, 1, 2].map(|i| nu[i] + bump[i]))?;
            acc += if e.count_ones() % 2 == 0 { v } else { -v };
        }
        Ok(acc)
    }
}

/// `a b mod q` for `0 <= a, b < 2q`, `q < 2^125`, without overflow.
fn mul_mod(a: i128, b: i128, q: i128) -> i128 {
    if q < 1 << 62 {
        return a * b % q;
    }
    let (mut a, mut b, q) = (a as u128 % q as u128, b as u128 % q as u128, q as u128);
    let mut r = 0u128;
    while b > 0 {
        if b & 1 == 1 {
            r = (r + a) % q;
        }
        a = (a << 1) % q;
        b >>= 1;
    }
    r as i128
}

fn prime_power_index(p: u64, nu: [u32; 3]) -> Result<TripleIndex> {
    let pw = |e: u32| p.checked_pow(e).ok_or(Error::Overflow("prime power index"));
    TripleIndex::new(pw(nu[0])?, pw(nu[1])?, pw(nu[2])?)
}

/// `rho*(p^nu1, p^nu2, p^nu3)`: closed forms at good primes, the exact
/// projective count elsewhere.
pub fn rho_star_prime_power(p: u64, nu: [u32; 3], t: &FormTriple) -> Result<RhoValue> {
    let d = prime_power_index(p, nu)?;
    let count = PrimeLocal::new(t, p).rho_star(nu)?;
    Ok(RhoValue::new(count, d.product()))
}

/// `rho(p^nu1, p^nu2, p^nu3)` through the sum over `k = v_p(gcd(x1, x2))`.
pub fn rho_prime_power(p: u64, nu: [u32; 3], t: &FormTriple) -> Result<RhoValue> {
    if !t.is_primitive() {
        return Err(Error::NonPrimitive);
    }
    let d = prime_power_index(p, nu)?;
    RhoValue::from_density(PrimeLocal::new(t, p).rho_ratio(nu)?, d.product())
}

fn multiplicative(
    d: &TripleIndex,
    t: &FormTriple,
    local: impl Fn(&mut PrimeLocal, [u32; 3]) -> Result<BigRational>,
) -> Result<RhoValue> {
    let mut acc = BigRational::one();
    for p in d.primes() {
        acc *= local(&mut PrimeLocal::new(t, p), d.valuations(p))?;
    }
    RhoValue::from_density(acc, d.product())
}

/// `rho(d)` as a product of prime-power densities; forms with content are
/// handled by the content reduction.
pub fn rho_multiplicative(d: &TripleIndex, t: &FormTriple) -> Result<RhoValue> {
    multiplicative(d, t, |l, nu| l.rho_ratio(nu))
}

/// `rho*(d)` as a product of prime-power densities.
pub fn rho_star_multiplicative(d: &TripleIndex, t: &FormTriple) -> Result<RhoValue> {
    multiplicative(d, t, |l, nu| l.rho_star_ratio(nu))
}

/// Both sides of the content reduction `rho(d; L) / P^2 = rho(d'; L*) / P'^2`.
#[derive(Debug, Clone, Serialize)]
pub struct ContentReduction {
    pub d: TripleIndex,
    pub d_prime: TripleIndex,
    #[serde(with = "serde_rational")]
    pub lhs: BigRational,
    #[serde(with = "serde_rational")]
    pub rhs: BigRational,
}

impl ContentReduction {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

/// `d' = (d1 / (d1, ell1), d2 / (d2, ell2), d3 / (d3, q))`, with the
/// enumerated density for the original forms and the one for the primitive
/// parts at `d'`.
pub fn rho_nonprimitive_reduce(d: &TripleIndex, t: &FormTriple) -> Result<ContentReduction> {
    let dec = t.primitive_decomposition();
    let red = |di: u64, c: i64| di / di.gcd(&c.unsigned_abs());
    let d_prime = TripleIndex::new(red(d.d1, dec.ell1), red(d.d2, dec.ell2), red(d.d3, dec.q))?;
    Ok(ContentReduction {
        d: *d,
        d_prime,
        lhs: rho_bruteforce(d, t)?.normalized,
        rhs: rho_bruteforce(&d_prime, &t.primitive())?.normalized,
    })
}

/// The exact-valuation density at `p` by inclusion and exclusion over `rho*`.
pub fn rho_dagger(p: u64, nu: [u32; 3], t: &FormTriple) -> Result<BigRational> {
    PrimeLocal::new(t, p).rho_dagger_ratio(nu)
}

/// The same density straight from its definition: points of
/// `[0, p^{S+1})^2` with `p` not dividing both coordinates and exact
/// valuations `nu`.
pub fn rho_dagger_direct(p: u64, nu: [u32; 3], t: &FormTriple) -> Result<BigRational> {
    let s: u32 = nu.iter().sum();
    let side = p
        .checked_pow(s + 1)
        .filter(|&m| (m as u128).pow(2) <= BRUTE_FORCE_PAIRS as u128)
        .ok_or_else(|| Error::BudgetExceeded(format!("direct count at p = {p}, nu = {nu:?}")))?;
    let d = prime_power_index(p, nu)?;
    let pn = [d.d1 as i128 * p as i128, d.d2 as i128 * p as i128, d.d3 as i128 * p as i128];
    let mut count = 0u128;
    for x1 in 0..side as i64 {
        for x2 in 0..side as i64 {
            if x1 as u64 % p == 0 && x2 as u64 % p == 0 {
                continue;
            }
            let (a, b, c) = t.values_fast(x1, x2);
            let exact = |v: i128, di: u64, next: i128| v % di as i128 == 0 && v % next != 0;
            if exact(a, d.d1, pn[0]) && exact(b, d.d2, pn[1]) && exact(c, d.d3, pn[2]) {
                count += 1;
            }
        }
    }
    let side = BigInt::from(side);
    Ok(BigRational::new(BigInt::from(count), &side * &side))
}

/// `delta(D)`: the largest `delta` with `delta | gcd(x1, x2)` on `Lambda(D)`.
pub fn delta_d(big_d: &TripleIndex, t: &FormTriple) -> Result<u64> {
    brute::gcd_over_lambda(t, big_d)
}

fn gcd_u(a: u64, b: i128) -> u64 {
    (a as u128).gcd(&b.unsigned_abs()) as u64
}

/// `lcm` of `(Di, Dj) / (Di, Dj, delta_ij)` over the three pairs, a divisor
/// of `delta(D)` when `(D1, D3)` and `(D2, D3)` are squarefree.
pub fn delta_lower_bound(big_d: &TripleIndex, t: &FormTriple) -> Result<u64> {
    let [d1, d2, d3] = big_d.as_array();
    for (a, b) in [(d1, d3), (d2, d3)] {
        if !factorize(a.gcd(&b))?.is_squarefree() {
            return Err(Error::invalid(format!(
                "({a}, {b}) must be squarefree for the lower bound on delta(D)"
            )));
        }
    }
    let r = t.resultants();
    let part = |a: u64, b: u64, res: i128| {
        let g = a.gcd(&b);
        g / gcd_u(g, res)
    };
    Ok(part(d1, d3, r.delta13)
        .lcm(&part(d2, d3, r.delta23))
        .lcm(&part(d1, d2, r.delta12)))
}

fn per_prime(n: &TripleIndex, f: impl Fn(u64, [u32; 3]) -> u32) -> Result<u64> {
    let mut acc = 1u64;
    for p in n.primes() {
        let e = f(p, n.valuations(p));
        let pe = p.checked_pow(e).ok_or(Error::Overflow("prime power"))?;
        acc = acc.checked_mul(pe).ok_or(Error::Overflow("product"))?;
    }
    Ok(acc)
}

/// `prod_p p^{max(v_p(D1), v_p(D2), ceil(v_p(D3) / 2))}`.
pub fn psi(dp: &TripleIndex) -> Result<u64> {
    per_prime(dp, |_, v| v[0].max(v[1]).max(v[2].div_ceil(2)))
}

/// `prod_p p^e` with `e` the maximum over `0 <= b <= max(v1, v2, ceil(v3 / 2))`
/// of `min(b, v1) + min(b, v2) + min(2b, v3) - 2b`.
pub fn psi0(big_d: &TripleIndex) -> Result<u64> {
    per_prime(big_d, |_, v| psi0_exponent(v))
}

pub(crate) fn psi0_exponent(v: [u32; 3]) -> u32 {
    let top = v[0].max(v[1]).max(v[2].div_ceil(2));
    (0..=top)
        .map(|b| (b.min(v[0]) + b.min(v[1]) + (2 * b).min(v[2])) as i64 - 2 * b as i64)
        .max()
        .unwrap_or(0)
        .max(0) as u32
}

/// `(D1, delta12) (D2, delta12) (D3, delta (delta13, delta23))`.
pub fn a_factor(big_d: &TripleIndex, t: &FormTriple) -> u64 {
    a_with(big_d.d1, big_d.d2, big_d.d3, t)
}

fn a_with(d1: u64, d2: u64, d3: u64, t: &FormTriple) -> u64 {
    let r = t.resultants();
    let g = (r.delta13.unsigned_abs()).gcd(&r.delta23.unsigned_abs());
    let m = d3 as u128;
    // (D3, delta g) = (D3, (delta mod D3)(g mod D3) mod D3)
    let prod = (r.delta.unsigned_abs() % m) * (g % m) % m;
    gcd_u(d1, r.delta12) * gcd_u(d2, r.delta12) * (m.gcd(&prod) as u64)
}

/// `a` for the primitive parts: `D1, D2` replaced by `Di / (Di, ell_i)`, the
/// resultants by those of `(L1*, L2*, Q*)`, and `D3` kept.
pub fn a_prime_factor(big_d: &TripleIndex, t: &FormTriple) -> u64 {
    let dec = t.primitive_decomposition();
    let red = |di: u64, c: i64| di / di.gcd(&c.unsigned_abs());
    a_with(
        red(big_d.d1, dec.ell1),
        red(big_d.d2, dec.ell2),
        big_d.d3,
        &t.primitive(),
    )
}

/// `rho*(1, 1, p^nu)` for odd `p | disc Q` with `Q` primitive at `p`, from
/// `disc Q = p^k delta`: `phi(p^nu) p^{floor(nu/2)}` when `nu <= k`, zero
/// when `nu > k` with `k` odd, and `phi(p^nu) p^{k/2} (1 + (delta/p))` when
/// `nu > k` with `k` even.
pub fn rho_star_q_ramified(p: u64, nu: u32, t: &FormTriple) -> Option<u128> {
    let disc = t.q().discriminant();
    let q = t.q();
    if p == 2 || disc % p as i128 != 0 || [q.a3, q.b3, q.c3].iter().all(|c| c % p as i64 == 0) {
        return None;
    }
    let k = valuation_i128(disc, p);
    let pp = p as u128;
    let phi = if nu == 0 { 1 } else { pp.checked_pow(nu)? - pp.checked_pow(nu - 1)? };
    if nu <= k {
        return phi.checked_mul(pp.checked_pow(nu / 2)?);
    }
    if k % 2 == 1 {
        return Some(0);
    }
    let delta = disc / (p as i128).pow(k);
    let chi = kronecker(delta, p as i128) as i128;
    phi.checked_mul(pp.pow(k / 2))?.checked_mul((1 + chi) as u128)
}

/// Whether `rho*(p^nu)` is forced to vanish: `v_p(delta_ij) < min(nu_i, nu_j)`
/// for some pair.
pub fn rho_star_vanishes(p: u64, nu: [u32; 3], t: &FormTriple) -> bool {
    let r = t.resultants();
    [(0, 1, r.delta12), (0, 2, r.delta13), (1, 2, r.delta23)]
        .into_iter()
        .any(|(i, j, res)| valuation_i128(res, p) < nu[i].min(nu[j]))
}

/// Density `rho(p^nu) / p^{2S}` as `f64`, used where exact rationals would be
/// too slow.
pub fn rho_density_f64(p: u64, nu: [u32; 3], t: &FormTriple) -> Result<f64> {
    PrimeLocal::new(t, p).rho_f64(nu)
}
