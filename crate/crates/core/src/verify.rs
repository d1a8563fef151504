//! The invariant suite behind `quartdiv verify`.
//!
//! Every check runs at a fixed size, records a one-line summary, and stops at
//! the first counterexample. `Scale::Quick` shrinks the grids for smoke runs.

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith::{self, kronecker, mu, primes::is_prime, r_disc, split_tau_triple, tau, CharacterData};
use crate::densities::{
    constant_c, n_lambda_mu_oracle, sigma_p, sigma_p_dd, sigma_p_local, sigma_star_p_dd, LocalIndex,
    ORACLE_POINTS,
};
use crate::fixtures::{self, Fixture};
use crate::forms::{is_perfect_square, FormTriple};
use crate::geometry::polytope::{half_slab, v0_prime, Polytope};
use crate::geometry::{region_deficit_volume, ConvexPolygonRegion, RegionMetrics};
use crate::lattice::{
    delta_d, delta_lower_bound, rho_bruteforce, rho_dagger, rho_dagger_direct, rho_multiplicative,
    rho_nonprimitive_reduce, rho_prime_power, rho_star_bruteforce, rho_star_prime_power, rho_star_vanishes,
    TripleIndex,
};
use crate::rational::{int, rat, to_f64};
use crate::sums::{log_r_prime_x, sum_s, sum_s_dd, sum_s_star, sum_t, sum_tg_prime, sum_tg_star, SumRequest};

/// Grid sizes for the suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Full,
    Quick,
}

impl Scale {
    fn pick<T>(self, full: T, quick: T) -> T {
        match self {
            Scale::Full => full,
            Scale::Quick => quick,
        }
    }
}

/// A form triple and region the suite runs on.
#[derive(Debug, Clone)]
pub struct Case {
    pub name: String,
    pub forms: FormTriple,
    pub region: ConvexPolygonRegion,
}

impl From<Fixture> for Case {
    fn from(f: Fixture) -> Self {
        Case {
            name: f.name.to_string(),
            forms: f.forms,
            region: f.region,
        }
    }
}

/// The bundled fixtures as cases.
pub fn bundled_cases() -> Vec<Case> {
    fixtures::all().into_iter().map(Case::from).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub module: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub scale: Scale,
    pub cases: Vec<String>,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// `Ok(summary)` when the property held, `Err(counterexample)` otherwise.
type Outcome = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s(e: crate::Error) -> String {
    e.to_string()
}

type CheckFn = fn(&[Case], Scale) -> Outcome;

const CHECKS: &[(&str, &str, CheckFn)] = &[
    ("forms", "nondegenerate", forms_nondegenerate),
    ("forms", "content_homomorphism", forms_content),
    ("forms", "homogeneity", forms_homogeneity),
    ("arith", "split_tau_identity", arith_split_tau),
    ("arith", "r_disc_multiplicative", arith_r_disc),
    ("arith", "kronecker_periodicity_and_reciprocity", arith_kronecker),
    ("arith", "factorize_round_trip", arith_factorize),
    ("geometry", "scaling", geometry_scaling),
    ("geometry", "r_prime_sandwich", geometry_sandwich),
    ("geometry", "polytope_volume_monte_carlo", geometry_monte_carlo),
    ("geometry", "deficit_bound", geometry_deficit),
    ("lattice", "multiplicativity", lattice_multiplicative),
    ("lattice", "prime_power_vs_enumeration", lattice_closed_forms),
    ("lattice", "vanishing", lattice_vanishing),
    ("lattice", "explicit_bounds", lattice_bounds),
    ("lattice", "dagger_inclusion_exclusion", lattice_dagger),
    ("lattice", "delta_lower_bound_divides", lattice_delta),
    ("lattice", "content_reduction", lattice_content),
    ("densities", "monotone_truncation", densities_monotone),
    ("densities", "local_count_oracle", densities_oracle),
    ("densities", "star_below_plain", densities_star),
    ("densities", "raw_vs_accelerated", densities_acceleration),
    ("densities", "coprime_branch_at_zero", densities_branch),
    ("sums", "consistency_web", sums_consistency),
    ("sums", "mobius_identity", sums_mobius),
    ("sums", "homogeneity", sums_homogeneity),
    ("sums", "parallel_determinism", sums_determinism),
];

/// Runs every check on `cases`, in a fixed order.
pub fn run(cases: &[Case], scale: Scale) -> VerifyReport {
    let checks = CHECKS
        .iter()
        .map(|&(module, name, f)| {
            let (passed, detail) = match f(cases, scale) {
                Ok(s) => (true, s),
                Err(s) => (false, s),
            };
            CheckResult {
                module,
                name,
                passed,
                detail,
            }
        })
        .collect();
    VerifyReport {
        scale,
        cases: cases.iter().map(|c| c.name.clone()).collect(),
        checks,
    }
}

/// Exponent triples with entries summing to at most `s`.
fn exponents(s: u32) -> Vec<[u32; 3]> {
    let mut v = Vec::new();
    for a in 0..=s {
        for b in 0..=s - a {
            for c in 0..=s - a - b {
                v.push([a, b, c]);
            }
        }
    }
    v
}

fn pp(p: u64, nu: [u32; 3]) -> std::result::Result<TripleIndex, String> {
    TripleIndex::new(p.pow(nu[0]), p.pow(nu[1]), p.pow(nu[2])).map_err(e2s)
}

fn ti(a: u64, b: u64, c: u64) -> TripleIndex {
    TripleIndex::new(a, b, c).expect("positive moduli")
}

// forms

fn forms_nondegenerate(cases: &[Case], _: Scale) -> Outcome {
    for c in cases {
        let r = c.forms.resultants();
        ensure(r.delta12 != 0 && r.delta13 != 0 && r.delta23 != 0 && r.delta != 0, || {
            format!("{}: a resultant vanishes {r:?}", c.name)
        })?;
        ensure(!is_perfect_square(r.delta), || format!("{}: disc {} is a square", c.name, r.delta))?;
    }
    Ok(format!("{} triples", cases.len()))
}

fn forms_content(cases: &[Case], _: Scale) -> Outcome {
    let mut n = 0;
    for c in cases {
        let d = c.forms.primitive_decomposition();
        for x1 in -6..=6i64 {
            for x2 in -6..=6i64 {
                let (a, b, q) = c.forms.values(x1, x2).map_err(e2s)?;
                let a0 = d.l1_star.eval(x1, x2).map_err(e2s)?;
                let b0 = d.l2_star.eval(x1, x2).map_err(e2s)?;
                let q0 = d.q_star.eval(x1, x2).map_err(e2s)?;
                ensure(
                    a == d.ell1 as i128 * a0 && b == d.ell2 as i128 * b0 && q == d.q as i128 * q0,
                    || format!("{} at ({x1}, {x2})", c.name),
                )?;
                n += 1;
            }
        }
    }
    Ok(format!("{n} points"))
}

fn forms_homogeneity(cases: &[Case], _: Scale) -> Outcome {
    for c in cases {
        for x1 in -5..=5i64 {
            for x2 in -5..=5i64 {
                let (a, b, q) = c.forms.values(x1, x2).map_err(e2s)?;
                for k in -3..=3i64 {
                    let (ak, bk, qk) = c.forms.values(k * x1, k * x2).map_err(e2s)?;
                    let k = k as i128;
                    ensure(ak == k * a && bk == k * b && qk == k * k * q, || {
                        format!("{} at k = {k}, ({x1}, {x2})", c.name)
                    })?;
                }
            }
        }
    }
    Ok("k in -3..3 on an 11 x 11 grid".into())
}

// arith

fn arith_split_tau(_: &[Case], scale: Scale) -> Outcome {
    let bound = scale.pick(10_000u64, 600);
    let mut n = 0u64;
    for a in 1..=bound {
        for b in 1..=bound / a {
            for c in 1..=bound / (a * b) {
                let s = split_tau_triple(a, b, c).map_err(e2s)?;
                ensure(s == tau(a * b * c), || format!("({a}, {b}, {c}): {s}"))?;
                n += 1;
            }
        }
    }
    Ok(format!("{n} triples with product <= {bound}"))
}

fn arith_r_disc(cases: &[Case], scale: Scale) -> Outcome {
    let bound = scale.pick(1000u64, 120);
    let mut discs: Vec<i128> = cases.iter().map(|c| c.forms.resultants().delta).collect();
    discs.sort_unstable();
    discs.dedup();
    for &disc in &discs {
        let chi = CharacterData::new(disc);
        let table: Vec<i64> = (0..=bound).map(|d| if d == 0 { 0 } else { r_disc(d, &chi) }).collect();
        for m in 1..=bound {
            for n in m..=bound {
                if m.gcd(&n) != 1 {
                    continue;
                }
                let lhs = r_disc(m * n, &chi);
                ensure(lhs == table[m as usize] * table[n as usize], || {
                    format!("disc {disc}: r({m} * {n}) = {lhs}")
                })?;
            }
        }
    }
    Ok(format!("{} discriminants, coprime pairs <= {bound}", discs.len()))
}

fn arith_kronecker(cases: &[Case], scale: Scale) -> Outcome {
    let span = scale.pick(5000i128, 500);
    for c in cases {
        let disc = c.forms.resultants().delta;
        let q = disc.abs();
        for n in 1..=span {
            ensure(kronecker(disc, n) == kronecker(disc, n + q), || format!("disc {disc}, n = {n}"))?;
        }
    }
    let odd: Vec<i128> = (3..200i128).filter(|&p| is_prime(p as u128)).collect();
    for &p in &odd {
        for &q in &odd {
            if p == q {
                continue;
            }
            let sign = if (p - 1) / 2 * ((q - 1) / 2) % 2 == 0 { 1 } else { -1 };
            ensure(kronecker(p, q) * kronecker(q, p) == sign, || format!("reciprocity at ({p}, {q})"))?;
        }
    }
    Ok(format!("period on n <= {span}, reciprocity on odd primes < 200"))
}

fn arith_factorize(_: &[Case], scale: Scale) -> Outcome {
    let bound = scale.pick(1_000_000u64, 50_000);
    for n in 1..=bound {
        let f = arith::factorize(n).map_err(e2s)?;
        ensure(f.value() == n as u128, || format!("{n} factors to {}", f.value()))?;
        ensure(f.pairs().windows(2).all(|w| w[0].0 < w[1].0), || format!("{n}: primes out of order"))?;
        ensure(f.pairs().iter().all(|&(p, e)| e >= 1 && is_prime(p as u128)), || format!("{n}: bad factor"))?;
    }
    Ok(format!("n <= {bound}"))
}

// geometry

fn geometry_scaling(cases: &[Case], _: Scale) -> Outcome {
    for c in cases {
        for k in [rat(1, 2), int(3), rat(7, 3)] {
            let s = c.region.scaled(&k).map_err(e2s)?;
            ensure(s.volume() == &k * &k * c.region.volume(), || format!("{}: volume at k = {k}", c.name))?;
            ensure(s.r_inf() == &k * c.region.r_inf(), || format!("{}: r_inf at k = {k}", c.name))?;
        }
    }
    Ok("k in {1/2, 3, 7/3}".into())
}

fn geometry_sandwich(cases: &[Case], _: Scale) -> Outcome {
    for c in cases {
        ensure(RegionMetrics::compute(&c.region, &c.forms).bounds_hold(), || c.name.clone())?;
    }
    Ok(format!("{} regions", cases.len()))
}

fn geometry_monte_carlo(_: &[Case], scale: Scale) -> Outcome {
    let samples = scale.pick(200_000u64, 20_000);
    let slab = half_slab(3).map_err(e2s)?;
    let simplex = Polytope::simplex(3).map_err(e2s)?;
    let polys = [
        ("cube", Polytope::unit_cube(3).map_err(e2s)?),
        ("simplex", simplex.clone()),
        ("half_slab", slab.clone()),
        ("simplex_and_slab", simplex.intersect(&slab).map_err(e2s)?),
        ("v0_prime_half", v0_prime(&rat(1, 2)).map_err(e2s)?),
        ("v0_prime_third", v0_prime(&rat(1, 3)).map_err(e2s)?),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0f_0b);
    let mut worst = 0.0f64;
    for (name, v) in &polys {
        let mut pt = vec![0.0; v.dim()];
        let mut hits = 0u64;
        for _ in 0..samples {
            for t in pt.iter_mut() {
                *t = rng.gen::<f64>();
            }
            hits += v.contains(&pt) as u64;
        }
        let est = hits as f64 / samples as f64;
        let se = (est * (1.0 - est) / samples as f64).sqrt();
        let exact = to_f64(&v.volume());
        let dev = (est - exact).abs();
        ensure(dev <= 3.0 * se + 1e-12, || format!("{name}: estimate {est} vs {exact} (se {se})"))?;
        if se > 0.0 {
            worst = worst.max(dev / se);
        }
    }
    Ok(format!("{samples} samples per polytope, worst deviation {worst:.2} se"))
}

fn geometry_deficit(cases: &[Case], _: Scale) -> Outcome {
    for c in cases {
        let ri = to_f64(&c.region.r_inf());
        for alpha in [rat(1, 1000), rat(1, 100), rat(1, 10), int(1), int(10), int(100)] {
            let d = region_deficit_volume(&c.region, &c.forms, &alpha);
            let bound = 8.0 * ri * to_f64(&alpha).sqrt();
            ensure(d <= bound, || format!("{}: alpha = {alpha}, {d} > {bound}", c.name))?;
        }
    }
    Ok("alpha from 1/1000 to 100".into())
}

// lattice

fn lattice_multiplicative(cases: &[Case], _: Scale) -> Outcome {
    let ds = [ti(2, 1, 1), ti(1, 3, 2), ti(4, 2, 3), ti(3, 1, 9)];
    let es = [ti(5, 1, 1), ti(1, 7, 5), ti(1, 1, 25), ti(7, 5, 1)];
    for c in cases {
        for d in &ds {
            for e in &es {
                let de = d.mul(e).map_err(e2s)?;
                let (a, b, ab) = (
                    rho_bruteforce(d, &c.forms).map_err(e2s)?,
                    rho_bruteforce(e, &c.forms).map_err(e2s)?,
                    rho_bruteforce(&de, &c.forms).map_err(e2s)?,
                );
                ensure(ab.count == a.count * b.count, || format!("{}: rho at {d} * {e}", c.name))?;
                let (a, b, ab) = (
                    rho_star_bruteforce(d, &c.forms).map_err(e2s)?,
                    rho_star_bruteforce(e, &c.forms).map_err(e2s)?,
                    rho_star_bruteforce(&de, &c.forms).map_err(e2s)?,
                );
                ensure(ab.count == a.count * b.count, || format!("{}: rho* at {d} * {e}", c.name))?;
            }
        }
    }
    Ok(format!("{} coprime pairs per triple", ds.len() * es.len()))
}

fn lattice_closed_forms(cases: &[Case], scale: Scale) -> Outcome {
    let (primes, s): (&[u64], u32) = scale.pick((&[2, 3, 5, 7, 11, 13], 4), (&[2, 3, 5, 7], 3));
    let mut n = 0;
    for c in cases {
        let t = &c.forms;
        for &p in primes {
            for nu in exponents(s) {
                let d = pp(p, nu)?;
                let rs = rho_star_bruteforce(&d, t).map_err(e2s)?;
                ensure(rho_star_prime_power(p, nu, t).map_err(e2s)? == rs, || {
                    format!("{}: rho* at p = {p}, {nu:?}", c.name)
                })?;
                let r = rho_bruteforce(&d, t).map_err(e2s)?;
                if t.is_primitive() {
                    ensure(rho_prime_power(p, nu, t).map_err(e2s)? == r, || {
                        format!("{}: rho at p = {p}, {nu:?}", c.name)
                    })?;
                }
                ensure(rho_multiplicative(&d, t).map_err(e2s)? == r, || {
                    format!("{}: multiplicative rho at p = {p}, {nu:?}", c.name)
                })?;
                n += 1;
            }
        }
    }
    Ok(format!("{n} prime-power indices, p <= {}, exponent sum <= {s}", primes[primes.len() - 1]))
}

fn lattice_vanishing(cases: &[Case], scale: Scale) -> Outcome {
    let s = scale.pick(4, 3);
    let mut hits = 0;
    for c in cases {
        for p in [2u64, 3, 5, 7] {
            for nu in exponents(s) {
                if rho_star_vanishes(p, nu, &c.forms) {
                    let r = rho_star_bruteforce(&pp(p, nu)?, &c.forms).map_err(e2s)?;
                    ensure(r.count == 0, || format!("{}: p = {p}, {nu:?} gives {}", c.name, r.count))?;
                    hits += 1;
                }
            }
        }
    }
    Ok(format!("{hits} forced zeros confirmed"))
}

fn lattice_bounds(cases: &[Case], scale: Scale) -> Outcome {
    let top = scale.pick(8u32, 5);
    for c in cases {
        let t = &c.forms;
        for nu in 0..=top {
            let r = rho_star_bruteforce(&ti(1, 1, 1 << nu), t).map_err(e2s)?.count;
            ensure(r <= 1u128 << (nu + 2), || format!("{}: rho*(1, 1, 2^{nu}) = {r}", c.name))?;
        }
        let disc = t.resultants().delta;
        for p in [3u64, 5, 7] {
            if disc % p as i128 != 0 || t.q().content() % p as i64 == 0 {
                continue;
            }
            let k = valuation(disc, p);
            for nu in 1..=top.min(5) {
                let r = rho_star_bruteforce(&ti(1, 1, p.pow(nu)), t).map_err(e2s)?.count;
                let phi = (p.pow(nu) - p.pow(nu - 1)) as u128;
                let bound = 2 * phi * (p as u128).pow((k / 2).min(nu / 2));
                ensure(r <= bound, || format!("{}: rho*(1, 1, {p}^{nu}) = {r} > {bound}", c.name))?;
            }
        }
    }
    Ok(format!("exponents up to {top}"))
}

fn valuation(n: i128, p: u64) -> u32 {
    let (mut n, p) = (n.unsigned_abs(), p as u128);
    let mut k = 0;
    while n != 0 && n % p == 0 {
        n /= p;
        k += 1;
    }
    k
}

fn lattice_dagger(cases: &[Case], _: Scale) -> Outcome {
    for c in cases {
        for p in [2u64, 3, 5, 7] {
            for nu in exponents(2) {
                let a = rho_dagger(p, nu, &c.forms).map_err(e2s)?;
                let b = rho_dagger_direct(p, nu, &c.forms).map_err(e2s)?;
                ensure(a == b, || format!("{}: p = {p}, {nu:?}: {a} vs {b}", c.name))?;
            }
        }
    }
    Ok("p <= 7, exponent sum <= 2".into())
}

fn lattice_delta(cases: &[Case], scale: Scale) -> Outcome {
    let ds: &[u64] = scale.pick(&[1, 2, 3, 5, 6, 10, 15], &[1, 2, 3, 6]);
    let mut n = 0;
    for c in cases {
        for &a in ds {
            for &b in ds {
                for &d3 in ds {
                    let d = ti(a, b, d3);
                    let lb = delta_lower_bound(&d, &c.forms).map_err(e2s)?;
                    let dd = delta_d(&d, &c.forms).map_err(e2s)?;
                    ensure(dd % lb == 0, || format!("{}: {d}: {lb} does not divide {dd}", c.name))?;
                    n += 1;
                }
            }
        }
    }
    Ok(format!("{n} pairs"))
}

fn lattice_content(cases: &[Case], scale: Scale) -> Outcome {
    let ks: &[i64] = scale.pick(&[1, 2, 3, 6], &[1, 2]);
    let ds = [1u64, 2, 3, 4, 6];
    let mut n = 0;
    for c in cases {
        for &k in ks {
            let t = c.forms.rescaled(k).map_err(e2s)?;
            for &a in &ds {
                for &b in &ds {
                    for &d3 in &ds {
                        let d = ti(a, b, d3);
                        let r = rho_nonprimitive_reduce(&d, &t).map_err(e2s)?;
                        ensure(r.holds(), || format!("{} rescaled by {k}: {d}", c.name))?;
                        n += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{n} indices"))
}

// densities

fn densities_monotone(cases: &[Case], _: Scale) -> Outcome {
    for c in cases {
        for p in [2u64, 3, 5] {
            let mut prev = sigma_p(p, &c.forms, 4).map_err(e2s)?;
            for n in 5..=10 {
                let cur = sigma_p(p, &c.forms, n).map_err(e2s)?;
                ensure(cur.value >= prev.value, || format!("{}: p = {p} drops at {n}", c.name))?;
                ensure(cur.value - prev.value <= prev.tail_estimate, || {
                    format!("{}: p = {p}, step to {n} exceeds the tail", c.name)
                })?;
                prev = cur;
            }
        }
    }
    Ok("p in {2, 3, 5}, cutoffs 4 to 10".into())
}

/// Largest `n` with `p^n <= limit`.
fn feasible_level(p: u64, limit: u64) -> u32 {
    let mut n = 0;
    while p.pow(n + 1) <= limit {
        n += 1;
    }
    n
}

fn densities_oracle(cases: &[Case], scale: Scale) -> Outcome {
    let limit = scale.pick(ORACLE_POINTS, 20_000);
    let mut pairs = Vec::new();
    for m in exponents(4).into_iter().filter(|m| m[0] <= 1 && m[1] <= 1 && m[2] <= 2) {
        for l in exponents(4).into_iter().filter(|l| (0..3).all(|i| l[i] <= m[i])) {
            pairs.push(LocalIndex::new(l, m).map_err(e2s)?);
        }
    }
    if scale == Scale::Quick {
        pairs.retain(|i| i.lambda == i.mu);
    }
    let mut worst = 0.0f64;
    for c in cases {
        for p in [2u64, 3, 5] {
            let n = feasible_level(p, limit);
            for idx in &pairs {
                let o = n_lambda_mu_oracle(p, n, idx, &c.forms).map_err(e2s)?;
                let o = o.to_f64().unwrap_or(f64::NAN);
                let s = sigma_p_local(p, idx, &c.forms, 12).map_err(e2s)?;
                let diff = (o - s.value).abs();
                ensure(diff <= s.tail_estimate + 1e-3, || {
                    format!("{}: p = {p}, n = {n}, {idx:?}: {o} vs {} (tail {})", c.name, s.value, s.tail_estimate)
                })?;
                worst = worst.max(diff);
            }
        }
    }
    Ok(format!("{} index pairs, worst gap {worst:.2e}", pairs.len()))
}

fn densities_star(cases: &[Case], _: Scale) -> Outcome {
    for c in cases {
        for p in [2u64, 3, 5, 7] {
            for (d, dd) in [(ti(1, 1, 1), ti(1, 1, 1)), (ti(1, 1, 1), ti(p, 1, 1)), (ti(p, 1, p), ti(p, p, p))] {
                let a = sigma_star_p_dd(p, &d, &dd, &c.forms, 10).map_err(e2s)?;
                let b = sigma_p_dd(p, &d, &dd, &c.forms, 10).map_err(e2s)?;
                ensure(a.value <= b.value + 1e-15, || format!("{}: p = {p}, {d} | {dd}", c.name))?;
            }
        }
    }
    Ok("p <= 7, cutoff 10".into())
}

fn densities_acceleration(cases: &[Case], scale: Scale) -> Outcome {
    let cutoff = scale.pick(3000, 300);
    for c in cases {
        let raw = constant_c(&c.forms, cutoff, 12, false).map_err(e2s)?;
        let acc = constant_c(&c.forms, cutoff, 12, true).map_err(e2s)?;
        ensure((raw.value - acc.value).abs() <= raw.tail_estimate + acc.tail_estimate, || {
            format!("{}: raw {} vs accelerated {}", c.name, raw.value, acc.value)
        })?;
    }
    Ok(format!("prime cutoff {cutoff}"))
}

fn densities_branch(cases: &[Case], _: Scale) -> Outcome {
    let one = ti(1, 1, 1);
    for c in cases {
        for p in [2u64, 3, 5, 7, 11] {
            let s = sigma_star_p_dd(p, &one, &one, &c.forms, 0).map_err(e2s)?;
            let pf = p as f64;
            let want = (1.0 - 1.0 / pf).powi(3) * (1.0 - 1.0 / (pf * pf));
            ensure((s.value - want).abs() < 1e-15, || format!("{}: p = {p}: {}", c.name, s.value))?;
        }
    }
    Ok("p <= 11".into())
}

// sums

fn request(c: &Case, x: BigRational) -> SumRequest {
    let mut q = SumRequest::new(c.forms, c.region.clone(), 1);
    q.x = x;
    q
}

fn exact_int(r: &crate::sums::SumReport) -> std::result::Result<i128, String> {
    r.exact_sum
        .to_integer()
        .to_i128()
        .filter(|_| r.exact_sum.is_integer())
        .ok_or_else(|| format!("{}: sum {} is not a small integer", r.kind, r.exact_sum))
}

fn sums_consistency(cases: &[Case], scale: Scale) -> Outcome {
    let xs: Vec<u64> = scale.pick((2..=200).collect(), vec![10, 30]);
    let mut points = 0u64;
    for c in cases {
        for &x in &xs {
            let xr = int(x as i64);
            if log_r_prime_x(&c.forms, &c.region, &xr).is_err() {
                continue;
            }
            let q = request(c, xr);
            let s = sum_s(&q).map_err(e2s)?;
            let rows = c.region.interior_rows(&q.x).map_err(e2s)?;
            let mut oracle = 0i128;
            for (x1, lo, hi) in rows.rows() {
                for x2 in lo..=hi {
                    let (a, b, v) = c.forms.values(x1, x2).map_err(e2s)?;
                    let n = [a, b, v].map(|z| z.unsigned_abs() as u64);
                    oracle += (tau(n[0]) * tau(n[1]) * tau(n[2])) as i128;
                    let split = split_tau_triple(n[0], n[1], n[2]).map_err(e2s)?;
                    let direct = arith::factorize_u128(n[0] as u128 * n[1] as u128 * n[2] as u128)
                        .iter()
                        .map(|&(_, e)| e as u64 + 1)
                        .product::<u64>();
                    ensure(split == direct, || format!("{}: split at ({x1}, {x2})", c.name))?;
                }
            }
            ensure(exact_int(&s)? == oracle, || format!("{}: S at X = {x}", c.name))?;
            ensure(sum_s_dd(&q).map_err(e2s)?.exact_sum == s.exact_sum, || {
                format!("{}: S_dD at X = {x}", c.name)
            })?;
            let mut cq = q.clone();
            cq.coprime = true;
            let t = sum_t(&cq).map_err(e2s)?;
            let tg = sum_tg_star(&q).map_err(e2s)?;
            ensure(tg.exact_sum == t.exact_sum, || format!("{}: Tg* at X = {x}", c.name))?;
            points += s.point_count;
        }
    }
    Ok(format!("{} values of X, {points} points", xs.len()))
}

fn sums_mobius(cases: &[Case], scale: Scale) -> Outcome {
    let xs: &[u64] = scale.pick(&[10, 50], &[10]);
    let slab = half_slab(3).map_err(e2s)?;
    for c in cases {
        for &x in xs {
            for v in [None, Some(slab.clone())] {
                let mut q = request(c, int(x as i64));
                q.v = v.clone();
                let star = exact_int(&sum_s_star(&q).map_err(e2s)?)?;
                let mut acc = 0i128;
                for k in 1..=x {
                    let m = mu(k);
                    if m == 0 {
                        continue;
                    }
                    let mut qk = SumRequest::new(c.forms.rescaled(k as i64).map_err(e2s)?, c.region.clone(), 1);
                    qk.x = rat(x as i64, k as i64);
                    qk.v = v.clone();
                    acc += m as i128 * exact_int(&sum_s(&qk).map_err(e2s)?)?;
                }
                ensure(star == acc, || format!("{}: X = {x}: {star} vs {acc}", c.name))?;
            }
        }
    }
    Ok(format!("X in {xs:?}, cube and half slab"))
}

fn sums_homogeneity(cases: &[Case], scale: Scale) -> Outcome {
    let xs: &[u64] = scale.pick(&[8, 20, 50, 100], &[8, 20]);
    for c in cases {
        for &x in xs {
            let a = sum_t(&request(c, int(x as i64))).map_err(e2s)?.point_count;
            let b = sum_t(&request(c, int(2 * x as i64))).map_err(e2s)?.point_count;
            ensure(b >= 4 * a, || format!("{}: {a} points at {x}, {b} at {}", c.name, 2 * x))?;
        }
    }
    Ok(format!("X in {xs:?}"))
}

fn sums_determinism(cases: &[Case], scale: Scale) -> Outcome {
    let x = scale.pick(120i64, 40);
    for c in cases {
        let mut a = request(c, int(x));
        a.y = Some(int(4 * x));
        let mut b = a.clone();
        b.workers = 3;
        for (name, f) in [
            ("T", sum_t as fn(&SumRequest) -> crate::Result<_>),
            ("S", sum_s),
            ("Tg_prime", sum_tg_prime),
        ] {
            let (ra, rb) = (f(&a).map_err(e2s)?, f(&b).map_err(e2s)?);
            ensure(ra.exact_sum == rb.exact_sum && ra.point_count == rb.point_count, || {
                format!("{}: {name} differs across worker counts", c.name)
            })?;
        }
    }
    Ok(format!("X = {x}, 1 vs 3 workers"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suite_passes_on_bundled_fixtures() {
        let r = run(&bundled_cases(), Scale::Quick);
        let bad: Vec<_> = r.failures().collect();
        assert!(bad.is_empty(), "{bad:#?}");
        assert_eq!(r.checks.len(), CHECKS.len());
    }

    #[test]
    fn failures_are_reported() {
        let c = bundled_cases().remove(0);
        assert!(sums_homogeneity(&[c.clone()], Scale::Quick).is_ok());
        assert!(ensure(false, || "boom".into()).is_err());
        let r = VerifyReport {
            scale: Scale::Quick,
            cases: vec![c.name],
            checks: vec![CheckResult {
                module: "m",
                name: "n",
                passed: false,
                detail: "x".into(),
            }],
        };
        assert!(!r.passed());
    }
}
