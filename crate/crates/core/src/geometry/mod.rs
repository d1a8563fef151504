//! Region metrics, hypothesis checks, polytope volumes and the archimedean
//! density.

pub mod archimedean;
pub mod polytope;
pub mod region;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::forms::{FormTriple, LinearForm, QuadraticForm};
use crate::rational::{int, to_f64};

pub use archimedean::{archimedean_density, ArchimedeanReport};
pub use polytope::{v0_prime, HalfSpace, Polytope};
pub use region::{ConvexPolygonRegion, InteriorRows, Point};

pub fn region_volume(r: &ConvexPolygonRegion) -> BigRational {
    r.volume()
}

pub fn r_inf(r: &ConvexPolygonRegion) -> BigRational {
    r.r_inf()
}

fn lin_at(l: &LinearForm, p: &Point) -> BigRational {
    int(l.a) * &p.0 + int(l.b) * &p.1
}

fn quad_at(q: &QuadraticForm, p: &Point) -> BigRational {
    int(q.a3) * &p.0 * &p.0 + int(q.b3) * &p.1 * &p.1 + int(q.c3) * &p.0 * &p.1
}

/// Points of the closed polygon where `Q` restricted to the boundary can be
/// extremal: vertices and interior critical points of each edge.
fn quad_candidates(r: &ConvexPolygonRegion, q: &QuadraticForm) -> Vec<Point> {
    let mut out: Vec<Point> = r.vertices().to_vec();
    for (p, s) in r.edges() {
        let e = (&s.0 - &p.0, &s.1 - &p.1);
        // Q(p + u e) = Q(p) + u B + u^2 Q(e)
        let qe = quad_at(q, &e);
        if qe.is_zero() {
            continue;
        }
        let b = int(2 * q.a3) * &p.0 * &e.0
            + int(2 * q.b3) * &p.1 * &e.1
            + int(q.c3) * (&p.0 * &e.1 + &p.1 * &e.0);
        let u = -b / (int(2) * qe);
        if u.is_positive() && u < int(1) {
            out.push((&p.0 + &u * &e.0, &p.1 + &u * &e.1));
        }
    }
    out
}

/// `r'^2 = sup max(L1^2, L2^2, |Q|)` over the closure, exactly.
pub fn r_prime_squared(r: &ConvexPolygonRegion, t: &FormTriple) -> BigRational {
    let mut best = BigRational::zero();
    for v in r.vertices() {
        for l in [t.l1(), t.l2()] {
            let x = lin_at(l, v);
            best = best.max(&x * &x);
        }
    }
    for c in quad_candidates(r, t.q()) {
        best = best.max(quad_at(t.q(), &c).abs());
    }
    best
}

pub fn r_prime(r: &ConvexPolygonRegion, t: &FormTriple) -> f64 {
    to_f64(&r_prime_squared(r, t)).sqrt()
}

/// Exact area, `r_inf` and `r'` of a region for given forms.
#[derive(Debug, Clone, Serialize)]
pub struct RegionMetrics {
    #[serde(serialize_with = "ser_f64_of")]
    pub vol: BigRational,
    #[serde(serialize_with = "ser_f64_of")]
    pub r_inf: BigRational,
    #[serde(serialize_with = "ser_f64_of")]
    pub r_prime_squared: BigRational,
    pub r_prime: f64,
    pub l_infinity: u64,
}

fn ser_f64_of<S: serde::Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(to_f64(r))
}

impl RegionMetrics {
    pub fn compute(r: &ConvexPolygonRegion, t: &FormTriple) -> Self {
        let rp2 = r_prime_squared(r, t);
        RegionMetrics {
            vol: r.volume(),
            r_inf: r.r_inf(),
            r_prime: to_f64(&rp2).sqrt(),
            r_prime_squared: rp2,
            l_infinity: t.l_infinity(),
        }
    }

    /// `r'/(2 L_inf) <= r_inf <= 2 r' L_inf` and `vol <= 4 r_inf^2`.
    pub fn bounds_hold(&self) -> bool {
        let l = int(self.l_infinity as i64);
        let ri2 = &self.r_inf * &self.r_inf;
        // compare squares to stay exact
        let lower = self.r_prime_squared.clone() <= int(4) * &l * &l * &ri2;
        let upper = ri2.clone() <= int(4) * &self.r_prime_squared * &l * &l;
        lower && upper && self.vol <= int(4) * ri2
    }
}

/// Outcome of the positivity check on the forms over the region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum H3Status {
    /// Every form is positive on the closure.
    Accepted,
    /// Positive on the open region, zero somewhere on the boundary.
    AcceptedBoundaryZero,
    Rejected,
}

#[derive(Debug, Clone, Serialize)]
pub struct H3Check {
    pub status: H3Status,
    /// The form that vanishes or goes negative, with the point found.
    pub form: Option<&'static str>,
    pub witness: Option<(f64, f64)>,
    #[serde(skip)]
    pub witness_exact: Option<Point>,
}

impl H3Check {
    pub fn accepted(&self) -> bool {
        self.status != H3Status::Rejected
    }
}

/// Minimizes `L1`, `L2`, `Q` over the closed polygon.
///
/// A minimum of zero is accepted with a warning when the zero lies on the
/// boundary only; negative values, or a zero of `Q` at an interior origin,
/// reject.
pub fn validate_h3(r: &ConvexPolygonRegion, t: &FormTriple) -> H3Check {
    let mut zero: Option<(&'static str, Point)> = None;
    let reject = |form, p: Point| H3Check {
        status: H3Status::Rejected,
        form: Some(form),
        witness: Some((to_f64(&p.0), to_f64(&p.1))),
        witness_exact: Some(p),
    };
    for (name, l) in [("L1", t.l1()), ("L2", t.l2())] {
        for v in r.vertices() {
            let x = lin_at(l, v);
            if x.is_negative() {
                return reject(name, v.clone());
            }
            if x.is_zero() && zero.is_none() {
                zero = Some((name, v.clone()));
            }
        }
    }
    let origin = (int(0), int(0));
    if r.contains_strict(&origin) {
        // Q(0) = 0 at an interior point
        return reject("Q", origin);
    }
    for c in quad_candidates(r, t.q()) {
        let x = quad_at(t.q(), &c);
        if x.is_negative() {
            return reject("Q", c);
        }
        if x.is_zero() && zero.is_none() {
            zero = Some(("Q", c));
        }
    }
    match zero {
        None => H3Check {
            status: H3Status::Accepted,
            form: None,
            witness: None,
            witness_exact: None,
        },
        Some((form, p)) => H3Check {
            status: H3Status::AcceptedBoundaryZero,
            form: Some(form),
            witness: Some((to_f64(&p.0), to_f64(&p.1))),
            witness_exact: Some(p),
        },
    }
}

/// Length of `{y in [lo, hi] : a y^2 + b y + c <= beta}` with `a != 0`.
fn sublevel_length(a: f64, b: f64, c: f64, beta: f64, lo: f64, hi: f64) -> f64 {
    let disc = b * b - 4.0 * a * (c - beta);
    let clip = |u: f64, v: f64| (v.min(hi) - u.max(lo)).max(0.0);
    if disc <= 0.0 {
        return if a > 0.0 { 0.0 } else { hi - lo };
    }
    let s = disc.sqrt();
    // numerically stable roots
    let qq = -0.5 * (b + b.signum() * s);
    let (mut r1, mut r2) = if qq != 0.0 {
        (qq / a, (c - beta) / qq)
    } else {
        (-s / (2.0 * a), s / (2.0 * a))
    };
    if r1 > r2 {
        std::mem::swap(&mut r1, &mut r2);
    }
    if a > 0.0 {
        clip(r1, r2)
    } else {
        (hi - lo) - clip(r1, r2)
    }
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let diff = left + right - whole;
        if depth == 0 || diff.abs() <= 15.0 * tol {
            return left + right + diff / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Area of `{x in R : |Q(x)| <= alpha}` by slice lengths and adaptive
/// quadrature across the vertex abscissae.
pub fn region_deficit_volume(r: &ConvexPolygonRegion, t: &FormTriple, alpha: &BigRational) -> f64 {
    if !alpha.is_positive() {
        return 0.0;
    }
    let al = to_f64(alpha);
    let q = t.q();
    let (a3, b3, c3) = (q.a3 as f64, q.b3 as f64, q.c3 as f64);
    let slice_len = |x1: f64| -> f64 {
        let Some((lo, hi)) = r.slice(x1) else {
            return 0.0;
        };
        // Q(x1, y) = b3 y^2 + c3 x1 y + a3 x1^2
        let (a, b, c) = (b3, c3 * x1, a3 * x1 * x1);
        sublevel_length(a, b, c, al, lo, hi) - sublevel_length(a, b, c, -al, lo, hi)
    };
    let mut xs: Vec<f64> = r.vertices().iter().map(|v| to_f64(&v.0)).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();
    let area = to_f64(&r.volume());
    let tol = 1e-9 * area.max(1e-12);
    xs.windows(2)
        .map(|w| adaptive_simpson(&slice_len, w[0], w[1], tol / xs.len() as f64))
        .sum()
}
