//! Finite-`X` archimedean density.
//!
//! With `y = x / X`, the normalized volume is
//! `2 * integral over R'(X) of vol(V cut by t_i <= b_i(y)) dy`, where
//! `b_i = log(X L_i(y)) / log(r'X)` for the linear forms,
//! `b_3 = log(X^2 Q(y)) / (2 log(r'X))`, and
//! `R'(X) = {y in R : L_i(y) >= 1/X, Q(y) >= 1/X^2}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::polytope::Polytope;
use super::region::ConvexPolygonRegion;
use crate::error::{Error, Result};
use crate::forms::FormTriple;
use crate::rational::to_f64;

#[derive(Debug, Clone, Serialize)]
pub struct ArchimedeanReport {
    pub x: f64,
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
    /// `2 vol(R) vol(V)`, the limit as `X` grows.
    pub limit: f64,
}

/// Jittered-grid Monte Carlo estimate of the normalized density at `x`.
pub fn archimedean_density(
    r: &ConvexPolygonRegion,
    t: &FormTriple,
    v: &Polytope,
    x: f64,
    samples: u64,
    seed: u64,
) -> Result<ArchimedeanReport> {
    if v.dim() != 3 {
        return Err(Error::invalid("archimedean density needs a 3-dimensional V"));
    }
    if !(x >= 10.0) {
        return Err(Error::invalid("archimedean density needs X >= 10"));
    }
    let rp = super::r_prime(r, t);
    let lam = (rp * x).ln();
    if !(lam > 0.0) {
        return Err(Error::invalid("r' X must exceed 1"));
    }
    let limit = 2.0 * to_f64(&r.volume()) * to_f64(&v.volume());
    let side = ((samples.max(1) as f64).sqrt().ceil() as u64).max(1);
    let ((x0, y0), (x1, y1)) = r.bounding_box();
    let (x0, y0, x1, y1) = (to_f64(&x0), to_f64(&y0), to_f64(&x1), to_f64(&y1));
    let (w, h) = ((x1 - x0) / side as f64, (y1 - y0) / side as f64);
    let planes = r.float_halfplanes();
    let (l1, l2, q) = (t.l1(), t.l2(), t.q());
    let (inv_x, inv_x2) = (1.0 / x, 1.0 / (x * x));
    let integrand = |p: f64, s: f64| -> f64 {
        if !planes.iter().all(|c| c[0] * p + c[1] * s + c[2] > 0.0) {
            return 0.0;
        }
        let a = l1.a as f64 * p + l1.b as f64 * s;
        let b = l2.a as f64 * p + l2.b as f64 * s;
        let c = q.a3 as f64 * p * p + q.b3 as f64 * s * s + q.c3 as f64 * p * s;
        if a < inv_x || b < inv_x || c < inv_x2 {
            return 0.0;
        }
        let bounds = [
            (x * a).ln() / lam,
            (x * b).ln() / lam,
            (x * x * c).ln() / (2.0 * lam),
        ];
        2.0 * v.volume_below(&bounds)
    };
    let rows: Vec<(f64, f64)> = (0..side)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (i.wrapping_mul(0x9E37_79B9_7F4A_7C15)));
            let mut s1 = 0.0;
            let mut s2 = 0.0;
            for j in 0..side {
                let p = x0 + (i as f64 + rng.gen::<f64>()) * w;
                let s = y0 + (j as f64 + rng.gen::<f64>()) * h;
                let f = integrand(p, s);
                s1 += f;
                s2 += f * f;
            }
            (s1, s2)
        })
        .collect();
    let n = (side * side) as f64;
    let (s1, s2) = rows
        .iter()
        .fold((0.0, 0.0), |(a, b), &(c, d)| (a + c, b + d));
    let area = (x1 - x0) * (y1 - y0);
    let mean = s1 / n;
    let var = (s2 / n - mean * mean).max(0.0);
    Ok(ArchimedeanReport {
        x,
        value: area * mean,
        std_error: area * (var / n).sqrt(),
        samples: side * side,
        seed,
        limit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> (ConvexPolygonRegion, FormTriple) {
        (
            ConvexPolygonRegion::unit_square(),
            FormTriple::from_coeffs([1, 0], [0, 1], [1, 1, 0]).unwrap(),
        )
    }

    /// Tensor-product midpoint rule on the unit square for `V = [0,1]^3`.
    fn midpoint_oracle(x: f64, n: usize) -> f64 {
        let lam = (2f64.sqrt() * x).ln();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let (p, s) = ((i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64);
                if p < 1.0 / x || s < 1.0 / x {
                    continue;
                }
                let b1 = (x * p).ln() / lam;
                let b2 = (x * s).ln() / lam;
                let b3 = (x * x * (p * p + s * s)).ln() / (2.0 * lam);
                acc += 2.0 * b1.min(1.0) * b2.min(1.0) * b3.min(1.0);
            }
        }
        acc / (n * n) as f64
    }

    #[test]
    fn cube_matches_midpoint_rule() {
        let (r, t) = unit();
        let v = Polytope::unit_cube(3).unwrap();
        for x in [100.0, 1e6] {
            let rep = archimedean_density(&r, &t, &v, x, 250_000, 1).unwrap();
            let o = midpoint_oracle(x, 2000);
            assert!((rep.value - o).abs() < 4.0 * rep.std_error + 2e-3, "{rep:?} vs {o}");
            assert_eq!(rep.limit, 2.0);
        }
    }

    #[test]
    fn grows_towards_the_limit() {
        let (r, t) = unit();
        let v = Polytope::unit_cube(3).unwrap();
        let vals: Vec<f64> = [1e2, 1e4, 1e8, 1e16]
            .iter()
            .map(|&x| archimedean_density(&r, &t, &v, x, 40_000, 3).unwrap().value)
            .collect();
        assert!(vals.windows(2).all(|w| w[0] < w[1]), "{vals:?}");
        assert!(vals[3] < 2.0);
    }

    #[test]
    fn degenerate_v_gives_zero() {
        let (r, t) = unit();
        let v = Polytope::empty(3).unwrap();
        let rep = archimedean_density(&r, &t, &v, 1e6, 10_000, 5).unwrap();
        assert!(rep.value.abs() < 1e-3);
    }

    #[test]
    fn deterministic_for_a_seed() {
        let (r, t) = unit();
        let v = Polytope::simplex(3).unwrap();
        let a = archimedean_density(&r, &t, &v, 1e3, 10_000, 9).unwrap();
        let b = archimedean_density(&r, &t, &v, 1e3, 10_000, 9).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert!(archimedean_density(&r, &t, &v, 5.0, 100, 9).is_err());
    }
}
