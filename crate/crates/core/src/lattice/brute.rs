//! Definition-level enumeration of `Lambda(d)` modulo `m = lcm(d)`.
//!
//! Residues `x mod m` are built along a chain `1 = m_0 | m_1 | ... | m_k = m`
//! with prime steps. Whether `gcd(d_i, m_j)` divides the form values depends
//! only on `x mod m_j`, so a class failing at level `j` is dropped together
//! with all its lifts. Every surviving leaf is a point of `Lambda(d)`.

use super::TripleIndex;
use crate::arith::factorize;
use crate::error::{Error, Result};
use crate::forms::FormTriple;

/// Largest number of residue classes an enumeration may visit.
pub const MAX_PAIRS: u64 = 1_000_000_000;

fn rem(x: i64, m: u64) -> i128 {
    (x as i128).rem_euclid(m as i128)
}

struct Level {
    /// `m_j`.
    modulus: u64,
    /// Prime step `m_{j+1} / m_j`.
    step: u64,
    /// `gcd(d_i, m_{j+1})`.
    checks: [u64; 3],
}

/// Calls `visit(x1, x2)` on every `x in [0, m)^2` lying in `Lambda(d)`;
/// returns `m`.
pub(crate) fn for_each_point(
    t: &FormTriple,
    d: &TripleIndex,
    mut visit: impl FnMut(u64, u64),
) -> Result<u64> {
    let m = d.lcm();
    let mut levels = Vec::new();
    let mut cur = 1u64;
    for &(p, e) in factorize(m)?.pairs() {
        for _ in 0..e {
            let next = cur * p;
            levels.push(Level {
                modulus: cur,
                step: p,
                checks: d.as_array().map(|di| num_integer::gcd(di, next)),
            });
            cur = next;
        }
    }
    let (l1, l2, q) = (t.l1(), t.l2(), t.q());
    let ok = |x1: u64, x2: u64, c: &[u64; 3]| -> bool {
        let lin = |a: i64, b: i64, g: u64| {
            let g128 = g as i128;
            g == 1
                || (rem(a, g) * (x1 as i128 % g128) % g128 + rem(b, g) * (x2 as i128 % g128) % g128)
                    % g128
                    == 0
        };
        let quad = |g: u64| {
            if g == 1 {
                return true;
            }
            let g128 = g as i128;
            let (y1, y2) = (x1 as i128 % g128, x2 as i128 % g128);
            let v = (rem(q.a3, g) * y1 % g128 * y1 % g128
                + rem(q.b3, g) * y2 % g128 * y2 % g128
                + rem(q.c3, g) * y1 % g128 * y2 % g128)
                % g128;
            v == 0
        };
        lin(l1.a, l1.b, c[0]) && lin(l2.a, l2.b, c[1]) && quad(c[2])
    };
    let mut nodes = 0u64;
    let mut stack: Vec<(u64, u64, usize)> = vec![(0, 0, 0)];
    while let Some((x1, x2, j)) = stack.pop() {
        let Some(level) = levels.get(j) else {
            visit(x1, x2);
            continue;
        };
        nodes += level.step * level.step;
        if nodes > MAX_PAIRS {
            return Err(Error::BudgetExceeded(format!(
                "enumeration of Lambda{d} exceeds {MAX_PAIRS} residue classes; use rho_multiplicative"
            )));
        }
        for a in 0..level.step {
            let y1 = x1 + a * level.modulus;
            for b in 0..level.step {
                let y2 = x2 + b * level.modulus;
                if ok(y1, y2, &level.checks) {
                    stack.push((y1, y2, j + 1));
                }
            }
        }
    }
    Ok(m)
}

/// Number of points of `Lambda(d)` in `[0, P)^2`, `P = d1 d2 d3`, with an
/// optional coprimality constraint `gcd(x1, x2, P) = 1`.
pub(crate) fn count(t: &FormTriple, d: &TripleIndex, coprime: bool) -> Result<u128> {
    let primes: Vec<u64> = if coprime {
        factorize(d.lcm())?.pairs().iter().map(|&(p, _)| p).collect()
    } else {
        Vec::new()
    };
    let mut n = 0u128;
    let m = for_each_point(t, d, |x1, x2| {
        if !primes.iter().any(|&p| x1 % p == 0 && x2 % p == 0) {
            n += 1;
        }
    })?;
    let scale = d.product() / m as u128;
    Ok(n * scale * scale)
}

/// `gcd` over `Lambda(d)` of `gcd(x1, x2, m)`, `m = lcm(d)`.
pub(crate) fn gcd_over_lambda(t: &FormTriple, d: &TripleIndex) -> Result<u64> {
    let mut g = d.lcm();
    for_each_point(t, d, |x1, x2| {
        if g != 1 {
            g = num_integer::gcd(num_integer::gcd(g, x1), x2);
        }
    })?;
    Ok(g)
}
