//! Exact enumeration of the divisor sums over `Z^2 ∩ XR` and their main terms.
//!
//! Points are visited row by row over the strict interior of `XR`; rows are
//! cut into contiguous strips that may run on several workers. Every partial
//! sum is an exact integer or rational, so the result does not depend on the
//! number of workers.

use std::sync::Arc;
use std::time::Instant;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{sieve, MultiplicativeFn, Sieve};
use crate::densities::{self, DensityReport};
use crate::error::{Error, Result};
use crate::forms::FormTriple;
use crate::geometry::{r_inf, r_prime_squared, v0_prime, ConvexPolygonRegion, InteriorRows, Polytope};
use crate::lattice::{rho_multiplicative, TripleIndex};
use crate::rational::{int, serde_rational, to_f64};

/// Largest `X` the enumeration accepts by default.
pub const DEFAULT_X_BUDGET: u64 = 4000;
/// Largest number of terms in the `M(X;V)` triple sum.
pub const M_TERM_BUDGET: u64 = 10_000_000;
/// Largest number of classes `d` in the discrepancy sum.
pub const LOD_TERM_BUDGET: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SumKind {
    T,
    S,
    #[serde(rename = "S_dD")]
    SdD,
    #[serde(rename = "S_star")]
    SStar,
    #[serde(rename = "Tg_star")]
    TgStar,
    #[serde(rename = "Tg_prime")]
    TgPrime,
}

impl SumKind {
    pub const ALL: [SumKind; 6] = [
        SumKind::T,
        SumKind::S,
        SumKind::SdD,
        SumKind::SStar,
        SumKind::TgStar,
        SumKind::TgPrime,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SumKind::T => "T",
            SumKind::S => "S",
            SumKind::SdD => "S_dD",
            SumKind::SStar => "S_star",
            SumKind::TgStar => "Tg_star",
            SumKind::TgPrime => "Tg_prime",
        }
    }
}

impl std::fmt::Display for SumKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SumKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SumKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown sum kind {s:?}")))
    }
}

/// Where the constant of the main term comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum MainTerm {
    /// Report the exact sum only.
    Skip,
    /// Compute the Euler product with these truncations.
    Compute { prime_cutoff: u64, nu_max: u32 },
    /// Use a constant computed earlier (e.g. shared across an `X` sweep).
    Given(DensityReport),
}

#[derive(Debug, Clone)]
pub struct SumRequest {
    pub forms: FormTriple,
    pub region: ConvexPolygonRegion,
    /// The dilation `X`; rational so that `X/k` can be used directly.
    pub x: BigRational,
    /// `Y` for `T_g'`.
    pub y: Option<BigRational>,
    /// `V` (dimension 3) or `V'` (dimension 4); `None` is the unit cube.
    pub v: Option<Polytope>,
    pub d: TripleIndex,
    pub big_d: TripleIndex,
    /// `g = tau * h`.
    pub h: MultiplicativeFn,
    /// Restrict `T` and `S` to `gcd(x1, x2) = 1`.
    pub coprime: bool,
    /// Worker threads; 0 uses the global pool.
    pub workers: usize,
    pub x_budget: u64,
    pub main: MainTerm,
}

impl SumRequest {
    pub fn new(forms: FormTriple, region: ConvexPolygonRegion, x: u64) -> Self {
        SumRequest {
            forms,
            region,
            x: int(x as i64),
            y: None,
            v: None,
            d: TripleIndex::unit(),
            big_d: TripleIndex::unit(),
            h: MultiplicativeFn::unit(),
            coprime: false,
            workers: 1,
            x_budget: DEFAULT_X_BUDGET,
            main: MainTerm::Skip,
        }
    }

    fn polytope(&self, dim: usize) -> Result<Polytope> {
        match &self.v {
            None => Polytope::unit_cube(dim),
            Some(v) if v.dim() == dim => Ok(v.clone()),
            Some(v) => Err(Error::invalid(format!("V has dimension {}, expected {dim}", v.dim()))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SumReport {
    pub kind: SumKind,
    #[serde(with = "serde_rational")]
    pub x: BigRational,
    pub y: Option<String>,
    /// An integer for every kind except `Tg_prime`.
    #[serde(with = "serde_rational")]
    pub exact_sum: BigRational,
    pub point_count: u64,
    pub predicted_main: Option<f64>,
    pub ratio: Option<f64>,
    pub constant: Option<DensityReport>,
    pub wall_time_ms: u64,
}

impl SumReport {
    pub fn exact_sum_f64(&self) -> f64 {
        to_f64(&self.exact_sum)
    }
}

/// Inputs of a main-term display.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MainInputs {
    /// `C`, `C*`, `prod sigma_p`, ...
    pub constant: f64,
    pub vol_r: f64,
    /// `vol(V)`, or `vol(V' ∩ V0'(log X / log Y))` for `T_g'`.
    pub vol_v: f64,
    pub x: f64,
    /// `log X`, `log r'X` or `log Y` depending on the kind.
    pub log_base: f64,
}

/// `4 C* vol(R) vol(V' ∩ V0') (log Y)^4` for `T_g'`, otherwise
/// `2 c vol(R) vol(V) X^2 (log B)^3`.
pub fn predicted_main(kind: SumKind, m: &MainInputs) -> f64 {
    match kind {
        SumKind::TgPrime => 4.0 * m.constant * m.vol_r * m.vol_v * m.log_base.powi(4),
        _ => 2.0 * m.constant * m.vol_r * m.vol_v * m.x * m.x * m.log_base.powi(3),
    }
}

/// `log(r'X)`, from the exact value of `(r'X)^2`; errors when `r'X <= 1`.
pub fn log_r_prime_x(t: &FormTriple, region: &ConvexPolygonRegion, x: &BigRational) -> Result<f64> {
    let b2 = r_prime_squared(region, t) * x * x;
    if b2 <= int(1) {
        return Err(Error::invalid("r'X <= 1: the log normalization is undefined"));
    }
    Ok(0.5 * to_f64(&b2).ln())
}

/// `(log d1 / B, log d2 / B, log d3 / 2B)` in `V`, closed.
fn in_v(v: &Polytope, logs: [f64; 3], base: f64) -> bool {
    v.contains(&[logs[0] / base, logs[1] / base, logs[2] / (2.0 * base)])
}

/// Logs of all divisors of a factored number.
fn divisor_logs(f: &[(u64, u32)], out: &mut Vec<f64>) {
    out.clear();
    out.push(0.0);
    for &(p, e) in f {
        let lp = (p as f64).ln();
        let n = out.len();
        for k in 1..=e {
            for i in 0..n {
                out.push(out[i] + k as f64 * lp);
            }
        }
    }
}

fn tau_of(f: &[(u64, u32)]) -> u64 {
    f.iter().map(|&(_, e)| e as u64 + 1).product()
}

/// `tau(n1, n2, n3; V)` with the normalization `log B`, `B = r'X`: the number
/// of divisor triples `d_i | n_i` with `(log d1/log B, log d2/log B,
/// log d3/(2 log B))` in `V`, boundary included.
pub fn tau_v(n: [u64; 3], log_base: f64, v: &Polytope) -> Result<u64> {
    if n.contains(&0) {
        return Err(Error::invalid("tau_v needs positive arguments"));
    }
    if !(log_base > 0.0) {
        return Err(Error::invalid("r'X <= 1: the log normalization is undefined"));
    }
    let s = sieve::covering(n.iter().copied().max().unwrap_or(1).isqrt() + 1);
    let f = n.map(|k| s.factorize(k));
    let mut logs = Default::default();
    Ok(tau_v_factored([f[0].pairs(), f[1].pairs(), f[2].pairs()], log_base, v, &mut logs))
}

#[derive(Default)]
struct Scratch {
    logs: [Vec<f64>; 3],
    merged: Vec<(u64, u32)>,
    fac: Vec<(u64, u32)>,
    ends: [usize; 3],
}

impl Scratch {
    fn factor3(&mut self, s: &Sieve, n: [u64; 3]) {
        self.fac.clear();
        for (i, &k) in n.iter().enumerate() {
            s.factor_into(k, &mut self.fac);
            self.ends[i] = self.fac.len();
        }
    }

    fn part(&self, i: usize) -> &[(u64, u32)] {
        split(&self.fac, &self.ends)[i]
    }

    /// Factorization of `n1 n2 n3` from the three parts.
    fn merge(&mut self) {
        self.merged.clear();
        self.merged.extend_from_slice(&self.fac);
        self.merged.sort_unstable_by_key(|&(p, _)| p);
        let mut w = 0;
        for r in 0..self.merged.len() {
            if w > 0 && self.merged[w - 1].0 == self.merged[r].0 {
                self.merged[w - 1].1 += self.merged[r].1;
            } else {
                self.merged[w] = self.merged[r];
                w += 1;
            }
        }
        self.merged.truncate(w);
    }
}

fn split<'a>(fac: &'a [(u64, u32)], ends: &[usize; 3]) -> [&'a [(u64, u32)]; 3] {
    [&fac[..ends[0]], &fac[ends[0]..ends[1]], &fac[ends[1]..ends[2]]]
}

fn tau_v_factored(f: [&[(u64, u32)]; 3], base: f64, v: &Polytope, logs: &mut [Vec<f64>; 3]) -> u64 {
    let full = [0, 1, 2].map(|i| f[i].iter().map(|&(p, e)| e as f64 * (p as f64).ln()).sum::<f64>());
    if v.is_cube() && in_v(v, full, base) {
        return tau_of(f[0]) * tau_of(f[1]) * tau_of(f[2]);
    }
    for i in 0..3 {
        divisor_logs(f[i], &mut logs[i]);
    }
    let mut c = 0;
    for &a in &logs[0] {
        for &b in &logs[1] {
            for &q in &logs[2] {
                if in_v(v, [a, b, q], base) {
                    c += 1;
                }
            }
        }
    }
    c
}

/// `g(L1, L2, Q; V)`: the sum of `(1 * h)(d)` over `d | n1 n2 n3` whose
/// vector `((d, n1), (d, n2), (d, n3))`, extended by `extra` when present,
/// lies in `V` after normalization.
fn g_v(
    parts: [&[(u64, u32)]; 3],
    merged: &[(u64, u32)],
    h: &MultiplicativeFn,
    base: f64,
    extra: Option<f64>,
    v: &Polytope,
) -> i128 {
    let point = |logs: [f64; 3]| -> Vec<f64> {
        let mut t = vec![logs[0] / base, logs[1] / base, logs[2] / (2.0 * base)];
        t.extend(extra);
        t
    };
    let full = [0, 1, 2].map(|i| parts[i].iter().map(|&(p, e)| e as f64 * (p as f64).ln()).sum::<f64>());
    if v.is_cube() && v.contains(&point(full)) {
        return merged.iter().map(|&(p, e)| h.g_at_prime_power(p, e) as i128).product();
    }
    // per prime: exponents in each part
    let expo = |i: usize, p: u64| parts[i].iter().find(|&&(q, _)| q == p).map_or(0, |&(_, e)| e);
    let primes: Vec<(f64, [u32; 3], Vec<i128>)> = merged
        .iter()
        .map(|&(p, e)| {
            let w = (0..=e).map(|k| h.one_star_h_at_prime_power(p, k) as i128).collect();
            ((p as f64).ln(), [expo(0, p), expo(1, p), expo(2, p)], w)
        })
        .collect();
    let mut total = 0i128;
    let mut stack: Vec<(usize, [f64; 3], i128)> = vec![(0, [0.0; 3], 1)];
    while let Some((j, logs, w)) = stack.pop() {
        if w == 0 {
            continue;
        }
        if j == primes.len() {
            if v.contains(&point(logs)) {
                total += w;
            }
            continue;
        }
        let (lp, e, ws) = &primes[j];
        for (k, &wk) in ws.iter().enumerate() {
            let k = k as u32;
            let l = [0, 1, 2].map(|i| logs[i] + k.min(e[i]) as f64 * lp);
            stack.push((j + 1, l, w * wk));
        }
    }
    total
}

/// Context shared by all strips.
struct Sweep<'a> {
    t: &'a FormTriple,
    sieve: Arc<Sieve>,
    rows: InteriorRows,
    workers: usize,
}

impl<'a> Sweep<'a> {
    fn new(req: &'a SumRequest) -> Result<Self> {
        let budget = int(req.x_budget as i64);
        if !req.x.is_positive() || req.x > budget {
            return Err(Error::BudgetExceeded(format!(
                "X = {} outside (0, {}]",
                req.x, req.x_budget
            )));
        }
        let rows = req.region.interior_rows(&req.x)?;
        let bound = to_f64(&(r_prime_squared(&req.region, &req.forms) * &req.x * &req.x)).ceil();
        // the sieve must reach sqrt of every value; a full table is used when affordable
        let want = if bound <= sieve::MAX_SIEVE_BOUND as f64 {
            bound as u64
        } else {
            bound.sqrt() as u64 + 1
        };
        Ok(Sweep {
            t: &req.forms,
            sieve: sieve::covering(want),
            rows,
            workers: req.workers,
        })
    }

    /// Runs `visit` over every interior point, strip by strip, and merges
    /// the strip results in row order.
    fn run<A: Send>(
        &self,
        init: impl Fn() -> A + Sync,
        visit: impl Fn(&mut A, &mut Scratch, i64, i64, [u64; 3]) -> Result<()> + Sync,
        merge: impl Fn(A, A) -> A,
    ) -> Result<(A, u64)> {
        let rows: Vec<(i64, i64, i64)> = self.rows.rows().collect();
        let n_strips = self.workers.max(1).min(rows.len().max(1));
        let total: u64 = rows.iter().map(|&(_, a, b)| (b - a + 1) as u64).sum();
        // contiguous strips with roughly equal point counts
        let mut strips: Vec<&[(i64, i64, i64)]> = Vec::with_capacity(n_strips);
        let mut start = 0;
        let mut acc = 0u64;
        for (i, &(_, a, b)) in rows.iter().enumerate() {
            acc += (b - a + 1) as u64;
            if acc * n_strips as u64 >= total * (strips.len() as u64 + 1) && strips.len() + 1 < n_strips {
                strips.push(&rows[start..=i]);
                start = i + 1;
            }
        }
        strips.push(&rows[start..]);
        let strip = |rows: &[(i64, i64, i64)]| -> Result<(A, u64)> {
            let mut a = init();
            let mut sc = Scratch::default();
            let mut count = 0;
            for &(x1, lo, hi) in rows {
                for x2 in lo..=hi {
                    let (v1, v2, v3) = self.t.values_fast(x1, x2);
                    if v1 == 0 || v2 == 0 || v3 == 0 {
                        return Err(Error::invalid(format!(
                            "a form vanishes at the interior point ({x1}, {x2})"
                        )));
                    }
                    let n = [v1, v2, v3].map(|v| v.unsigned_abs());
                    if n.iter().any(|&k| k > u64::MAX as u128) {
                        return Err(Error::Overflow("form value"));
                    }
                    count += 1;
                    visit(&mut a, &mut sc, x1, x2, n.map(|k| k as u64))?;
                }
            }
            Ok((a, count))
        };
        let parts: Vec<Result<(A, u64)>> = if self.workers == 1 || strips.len() == 1 {
            strips.iter().map(|s| strip(s)).collect()
        } else {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(self.workers)
                .build()
                .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
            pool.install(|| strips.par_iter().map(|s| strip(s)).collect())
        };
        let mut out: Option<(A, u64)> = None;
        for p in parts {
            let (a, c) = p?;
            out = Some(match out {
                None => (a, c),
                Some((b, d)) => (merge(b, a), c + d),
            });
        }
        Ok(out.unwrap_or_else(|| (init(), 0)))
    }
}

fn coprime(x1: i64, x2: i64) -> bool {
    x1.gcd(&x2) == 1
}

/// Constant of the main term for each kind, `None` under `MainTerm::Skip`.
pub fn main_constant(kind: SumKind, req: &SumRequest) -> Result<Option<DensityReport>> {
    let (prime_cutoff, nu_max) = match &req.main {
        MainTerm::Skip => return Ok(None),
        MainTerm::Given(r) => return Ok(Some(r.clone())),
        MainTerm::Compute { prime_cutoff, nu_max } => (*prime_cutoff, *nu_max),
    };
    let t = &req.forms;
    let unit = TripleIndex::unit();
    let r = match kind {
        SumKind::T => densities::constant_c(t, prime_cutoff, nu_max, true)?,
        SumKind::S => densities::sigma_product(t, &unit, &unit, prime_cutoff, nu_max, false)?,
        SumKind::SdD => densities::sigma_product(t, &req.d, &req.big_d, prime_cutoff, nu_max, false)?,
        SumKind::SStar => densities::sigma_product(t, &req.d, &req.big_d, prime_cutoff, nu_max, true)?,
        SumKind::TgStar | SumKind::TgPrime => {
            densities::constant_c_star(t, &req.h, prime_cutoff, nu_max, true)?
        }
    };
    Ok(Some(r))
}

fn finish(
    kind: SumKind,
    req: &SumRequest,
    exact_sum: BigRational,
    point_count: u64,
    vol_v: f64,
    log_base: f64,
    started: Instant,
) -> Result<SumReport> {
    let constant = main_constant(kind, req)?;
    let predicted = constant.as_ref().map(|c| {
        predicted_main(
            kind,
            &MainInputs {
                constant: c.value,
                vol_r: to_f64(&req.region.volume()),
                vol_v,
                x: to_f64(&req.x),
                log_base,
            },
        )
    });
    let ratio = predicted.map(|p| to_f64(&exact_sum) / p);
    Ok(SumReport {
        kind,
        x: req.x.clone(),
        y: req.y.as_ref().map(|y| y.to_string()),
        exact_sum,
        point_count,
        predicted_main: predicted,
        ratio,
        constant,
        wall_time_ms: started.elapsed().as_millis() as u64,
    })
}

fn big(n: u128) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `T(X) = sum tau(L1(x) L2(x) Q(x))` over the interior points of `XR`
/// (coprime points only when `req.coprime`).
pub fn sum_t(req: &SumRequest) -> Result<SumReport> {
    let started = Instant::now();
    let sw = Sweep::new(req)?;
    let (sum, _) = sw.run(
        || (0u128, 0u64),
        |acc, sc, x1, x2, n| {
            if req.coprime && !coprime(x1, x2) {
                return Ok(());
            }
            sc.factor3(&sw.sieve, n);
            sc.merge();
            acc.0 += tau_of(&sc.merged) as u128;
            acc.1 += 1;
            Ok(())
        },
        |a, b| (a.0 + b.0, a.1 + b.1),
    )?;
    finish(SumKind::T, req, big(sum.0), sum.1, 1.0, to_f64(&req.x).ln(), started)
}

/// Shared engine of `S`, `S(d, D)` and `S*`.
fn sum_s_family(kind: SumKind, req: &SumRequest, coprime_only: bool, divided: bool) -> Result<SumReport> {
    let started = Instant::now();
    if !req.d.divides(&req.big_d) {
        return Err(Error::invalid(format!("{} does not divide {} componentwise", req.d, req.big_d)));
    }
    let v = req.polytope(3)?;
    let base = log_r_prime_x(&req.forms, &req.region, &req.x)?;
    let sw = Sweep::new(req)?;
    let dd = req.big_d.as_array();
    let d = req.d.as_array();
    let (sum, _) = sw.run(
        || (0u128, 0u64),
        |acc, sc, x1, x2, n| {
            if coprime_only && !coprime(x1, x2) {
                return Ok(());
            }
            if divided && (0..3).any(|i| n[i] % dd[i] != 0) {
                return Ok(());
            }
            let m = if divided { [0, 1, 2].map(|i| n[i] / d[i]) } else { n };
            sc.factor3(&sw.sieve, m);
            acc.0 += tau_v_factored(split(&sc.fac, &sc.ends), base, &v, &mut sc.logs) as u128;
            acc.1 += 1;
            Ok(())
        },
        |a, b| (a.0 + b.0, a.1 + b.1),
    )?;
    finish(kind, req, big(sum.0), sum.1, to_f64(&v.volume()), base, started)
}

/// `S(X;V) = sum tau(L1, L2, Q; V)`.
pub fn sum_s(req: &SumRequest) -> Result<SumReport> {
    sum_s_family(SumKind::S, req, req.coprime, false)
}

/// `S(X, d, D; V)`: points of `Λ(D)`, arguments divided by `d`.
pub fn sum_s_dd(req: &SumRequest) -> Result<SumReport> {
    sum_s_family(SumKind::SdD, req, req.coprime, true)
}

/// `S*(X, d, D; V)`: as `S(X, d, D; V)` over coprime points.
pub fn sum_s_star(req: &SumRequest) -> Result<SumReport> {
    sum_s_family(SumKind::SStar, req, true, true)
}

/// `T_g*(X;V) = sum g(L1, L2, Q; V)` over coprime points, `g = tau * h`.
pub fn sum_tg_star(req: &SumRequest) -> Result<SumReport> {
    let started = Instant::now();
    let v = req.polytope(3)?;
    let base = log_r_prime_x(&req.forms, &req.region, &req.x)?;
    let sw = Sweep::new(req)?;
    let (sum, _) = sw.run(
        || (0i128, 0u64),
        |acc, sc, x1, x2, n| {
            if !coprime(x1, x2) {
                return Ok(());
            }
            sc.factor3(&sw.sieve, n);
            sc.merge();
            acc.0 += g_v([sc.part(0), sc.part(1), sc.part(2)], &sc.merged, &req.h, base, None, &v);
            acc.1 += 1;
            Ok(())
        },
        |a, b| (a.0 + b.0, a.1 + b.1),
    )?;
    let exact = BigRational::from_integer(BigInt::from(sum.0));
    finish(SumKind::TgStar, req, exact, sum.1, to_f64(&v.volume()), to_f64(&req.x).ln(), started)
}

/// `T_g'(X;V') = sum g'(L1, L2, Q; V') / max(|x1|, |x2|)^2` over coprime
/// points, with all logs normalized by `log Y`.
pub fn sum_tg_prime(req: &SumRequest) -> Result<SumReport> {
    let started = Instant::now();
    let y = req
        .y
        .clone()
        .ok_or_else(|| Error::invalid("T_g' needs Y"))?;
    if req.x < int(2) || y < req.x {
        return Err(Error::invalid("T_g' needs 2 <= X <= Y"));
    }
    let v = req.polytope(4)?;
    let log_y = to_f64(&y).ln();
    let sw = Sweep::new(req)?;
    let m_max = (to_f64(&(r_inf(&req.region) * &req.x)).ceil() as usize) + 1;
    // integer numerators per value of max(|x1|, |x2|)
    let (per_m, _) = sw.run(
        || (vec![0i128; m_max + 1], 0u64),
        |acc, sc, x1, x2, n| {
            if !coprime(x1, x2) {
                return Ok(());
            }
            let m = x1.unsigned_abs().max(x2.unsigned_abs()) as usize;
            sc.factor3(&sw.sieve, n);
            sc.merge();
            let extra = (m as f64).ln() / log_y;
            acc.0[m] += g_v([sc.part(0), sc.part(1), sc.part(2)], &sc.merged, &req.h, log_y, Some(extra), &v);
            acc.1 += 1;
            Ok(())
        },
        |mut a, b| {
            for (s, t) in a.0.iter_mut().zip(b.0) {
                *s += t;
            }
            (a.0, a.1 + b.1)
        },
    )?;
    let mut exact = BigRational::zero();
    for (m, &a) in per_m.0.iter().enumerate() {
        if a != 0 {
            exact += BigRational::new(BigInt::from(a), BigInt::from(m) * BigInt::from(m));
        }
    }
    let u = to_f64(&req.x).ln() / log_y;
    let u = BigRational::from_float(u.clamp(0.0, 1.0)).unwrap_or_else(|| int(1));
    let vol = to_f64(&v.intersect(&v0_prime(&u)?)?.volume());
    finish(SumKind::TgPrime, req, exact, per_m.1, vol, log_y, started)
}

/// Dispatch on the kind.
pub fn run_sum(kind: SumKind, req: &SumRequest) -> Result<SumReport> {
    match kind {
        SumKind::T => sum_t(req),
        SumKind::S => sum_s(req),
        SumKind::SdD => sum_s_dd(req),
        SumKind::SStar => sum_s_star(req),
        SumKind::TgStar => sum_tg_star(req),
        SumKind::TgPrime => sum_tg_prime(req),
    }
}

/// The truncated triple sum `M(X;V)`.
#[derive(Debug, Clone, Serialize)]
pub struct MReport {
    #[serde(with = "serde_rational")]
    pub exact: BigRational,
    pub value: f64,
    /// Upper limits for `d1`, `d2`, `d3`.
    pub limits: [u64; 3],
    pub terms: u64,
}

/// `sum_{d_i <= limits_i, delta in V} rho(d) / (d1 d2 d3)^2` with
/// `delta = (log d1 / B, log d2 / B, log d3 / 2B)`, `B = log_base`.
pub fn m_sum(
    limits: [u64; 3],
    log_base: f64,
    v: &Polytope,
    mut rho: impl FnMut(&TripleIndex) -> Result<BigRational>,
) -> Result<MReport> {
    let terms = limits.iter().try_fold(1u64, |a, &l| a.checked_mul(l.max(1)));
    if terms.is_none_or(|n| n > M_TERM_BUDGET) {
        return Err(Error::BudgetExceeded(format!("M(X;V) with limits {limits:?}")));
    }
    let mut exact = BigRational::zero();
    let mut n = 0;
    for d1 in 1..=limits[0] {
        for d2 in 1..=limits[1] {
            for d3 in 1..=limits[2] {
                let logs = [d1, d2, d3].map(|d| (d as f64).ln());
                if !(log_base > 0.0) || !in_v(v, logs, log_base) {
                    continue;
                }
                exact += rho(&TripleIndex::new(d1, d2, d3)?)?;
                n += 1;
            }
        }
    }
    Ok(MReport {
        value: to_f64(&exact),
        exact,
        limits,
        terms: n,
    })
}

/// `M(X;V)` with `X' = r'X`, `d1 <= X'^{1/2} / (log X)^c`, `d2 <= X'^{1/2}`,
/// `d3 <= X'`.
pub fn m_x_v(t: &FormTriple, region: &ConvexPolygonRegion, x: u64, v: &Polytope, c: f64) -> Result<MReport> {
    let base = log_r_prime_x(t, region, &int(x as i64))?;
    let xp = base.exp();
    let lx = (x as f64).ln();
    let limits = [
        (xp.sqrt() / lx.powf(c)).floor().max(0.0) as u64,
        xp.sqrt().floor() as u64,
        xp.floor() as u64,
    ];
    m_sum(limits, base, v, |d| Ok(rho_multiplicative(d, t)?.normalized))
}

/// The level-of-distribution discrepancy and its per-class envelope.
#[derive(Debug, Clone, Serialize)]
pub struct LodReport {
    #[serde(with = "serde_rational")]
    pub exact: BigRational,
    pub value: f64,
    /// `sum_d rho(d) (8 r_inf X / (d1 d2 d3) + 8)`.
    pub envelope: f64,
    pub classes: u64,
    pub point_count: u64,
}

/// `sum_{d_i <= V_i} |#(Λ(d) ∩ XR) - vol(R) X^2 rho(d) / (d1 d2 d3)^2|`.
pub fn lod_discrepancy(
    t: &FormTriple,
    region: &ConvexPolygonRegion,
    x: u64,
    v: [u64; 3],
    workers: usize,
) -> Result<LodReport> {
    let classes = v.iter().try_fold(1u64, |a, &l| a.checked_mul(l));
    if classes.is_none_or(|n| n > LOD_TERM_BUDGET) || v.contains(&0) {
        return Err(Error::BudgetExceeded(format!("discrepancy over d <= {v:?}")));
    }
    let mut req = SumRequest::new(t.clone(), region.clone(), x);
    req.workers = workers;
    let sw = Sweep::new(&req)?;
    let idx = |d: [u64; 3]| (((d[0] - 1) * v[1] + (d[1] - 1)) * v[2] + (d[2] - 1)) as usize;
    let n_classes = (v[0] * v[1] * v[2]) as usize;
    let (counts, points) = sw.run(
        || vec![0u64; n_classes],
        |acc, _sc, _x1, _x2, n| {
            let divs = |i: usize| (1..=v[i]).filter(move |&k| n[i] % k == 0);
            for a in divs(0) {
                for b in divs(1) {
                    for c in divs(2) {
                        acc[idx([a, b, c])] += 1;
                    }
                }
            }
            Ok(())
        },
        |mut a, b| {
            for (s, t) in a.iter_mut().zip(b) {
                *s += t;
            }
            a
        },
    )?;
    let vol_x2 = region.volume() * int(x as i64) * int(x as i64);
    let rinf_x = to_f64(&r_inf(region)) * x as f64;
    let mut exact = BigRational::zero();
    let mut envelope = 0.0;
    for a in 1..=v[0] {
        for b in 1..=v[1] {
            for c in 1..=v[2] {
                let d = TripleIndex::new(a, b, c)?;
                let rho = rho_multiplicative(&d, t)?;
                let main = &vol_x2 * &rho.normalized;
                exact += (big(counts[idx([a, b, c])] as u128) - main).abs();
                envelope += rho.count as f64 * (8.0 * rinf_x / (a * b * c) as f64 + 8.0);
            }
        }
    }
    Ok(LodReport {
        value: to_f64(&exact),
        exact,
        envelope,
        classes: n_classes as u64,
        point_count: points,
    })
}
