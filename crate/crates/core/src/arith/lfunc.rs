//! `L(1, chi)` for the quadratic character of a discriminant.

use serde::Serialize;

use super::kronecker::CharacterData;
use super::sieve;
use crate::error::{Error, Result};

/// Default absolute accuracy.
pub const DEFAULT_TOL: f64 = 1e-6;
/// Hard cap on summand evaluations.
pub const MAX_TERMS: u64 = 100_000_000;
/// Primes used by the Euler-product cross-check.
pub const EULER_CHECK_BOUND: u64 = 1_000_000;
/// Largest tolerated gap between the series and the Euler product.
pub const EULER_CHECK_GAP: f64 = 1e-2;

#[derive(Debug, Clone, Serialize)]
pub struct LValue {
    pub value: f64,
    /// Change between the last two refinements.
    pub error_estimate: f64,
    pub terms: u64,
    pub euler_value: f64,
    pub euler_gap: f64,
}

/// Partial sums of `chi(n)/n` averaged twice over one period, ending near `m`.
fn smoothed_partial_sum(chi: &CharacterData, q: u64, m: u64) -> f64 {
    let end = m + 2 * q;
    let mut s = 0.0f64;
    let mut window = 0.0f64; // running sum of S over the last q indices
    let mut second = 0.0f64; // sum of the q window averages
    let mut hist: Vec<f64> = Vec::with_capacity(2 * q as usize);
    for n in 1..end {
        let c = chi.chi(n);
        if c != 0 {
            s += c as f64 / n as f64;
        }
        if n >= m {
            hist.push(s);
            window += s;
            let k = hist.len();
            if k > q as usize {
                window -= hist[k - 1 - q as usize];
            }
            if k >= q as usize {
                second += window / q as f64;
                if k == 2 * q as usize - 1 {
                    break;
                }
            }
        }
    }
    second / q as f64
}

/// Truncated Euler product `prod_{p <= bound} (1 - chi(p)/p)^{-1}`.
pub fn euler_product(chi: &CharacterData, bound: u64) -> f64 {
    let s = sieve::covering(bound);
    let mut log = 0.0f64;
    for &p in s.primes() {
        let p = p as u64;
        if p > bound {
            break;
        }
        let c = chi.chi(p);
        if c != 0 {
            log -= (1.0 - c as f64 / p as f64).ln();
        }
    }
    log.exp()
}

/// `L(1, chi)` to absolute accuracy `tol`, with an Euler-product cross-check.
pub fn l_one_chi(chi: &CharacterData, tol: f64) -> Result<LValue> {
    if chi.is_principal() {
        return Err(Error::invalid(format!(
            "character of discriminant {} is principal",
            chi.disc()
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let q = u64::try_from(chi.period())
        .ok()
        .filter(|&q| q <= MAX_TERMS / 8)
        .ok_or_else(|| Error::BudgetExceeded(format!("character period {}", chi.period())))?;
    let mut m = (64 * q).max(1024);
    let mut prev = smoothed_partial_sum(chi, q, m);
    let mut terms = m + 2 * q;
    loop {
        let next_m = 2 * m;
        if terms + next_m + 2 * q > MAX_TERMS {
            return Err(Error::BudgetExceeded(format!(
                "L(1, chi) did not reach tolerance {tol} within {MAX_TERMS} terms"
            )));
        }
        let cur = smoothed_partial_sum(chi, q, next_m);
        terms += next_m + 2 * q;
        let err = (cur - prev).abs();
        if err < tol / 4.0 {
            let euler_value = euler_product(chi, EULER_CHECK_BOUND);
            return Ok(LValue {
                value: cur,
                error_estimate: err,
                terms,
                euler_value,
                euler_gap: (euler_value - cur).abs(),
            });
        }
        prev = cur;
        m = next_m;
    }
}
