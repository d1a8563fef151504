//! Convex polygons with rational vertices and their strict-interior lattice rows.

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{ceil_i64, common_denominator, floor_i64, int, rat, serde_point_vec, to_f64, to_i128};

pub type Point = (BigRational, BigRational);

#[derive(Debug, Clone, Deserialize)]
struct RegionSpec {
    #[serde(with = "serde_point_vec")]
    vertices: Vec<Point>,
}

/// A strictly convex polygon, vertices stored counterclockwise.
///
/// The region itself is the open interior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RegionSpec")]
pub struct ConvexPolygonRegion {
    #[serde(with = "serde_point_vec")]
    vertices: Vec<Point>,
}

impl TryFrom<RegionSpec> for ConvexPolygonRegion {
    type Error = Error;
    fn try_from(s: RegionSpec) -> Result<Self> {
        ConvexPolygonRegion::new(s.vertices)
    }
}

fn cross(o: &Point, a: &Point, b: &Point) -> BigRational {
    (&a.0 - &o.0) * (&b.1 - &o.1) - (&a.1 - &o.1) * (&b.0 - &o.0)
}

impl ConvexPolygonRegion {
    /// Accepts either orientation; clockwise input is reversed.
    pub fn new(mut vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::DegenerateRegion(format!(
                "{} vertices given, need at least 3",
                vertices.len()
            )));
        }
        let twice_area = shoelace(&vertices);
        if twice_area.is_zero() {
            return Err(Error::DegenerateRegion("zero area".into()));
        }
        if twice_area.is_negative() {
            vertices.reverse();
        }
        let n = vertices.len();
        for i in 0..n {
            let c = cross(&vertices[i], &vertices[(i + 1) % n], &vertices[(i + 2) % n]);
            if !c.is_positive() {
                return Err(Error::DegenerateRegion(format!(
                    "vertex {} is not a strictly convex corner",
                    (i + 1) % n
                )));
            }
        }
        Ok(ConvexPolygonRegion { vertices })
    }

    pub fn from_integer_points(pts: &[(i64, i64)]) -> Result<Self> {
        ConvexPolygonRegion::new(pts.iter().map(|&(a, b)| (int(a), int(b))).collect())
    }

    /// Axis-parallel square `(lo, hi)^2`.
    pub fn square(lo: BigRational, hi: BigRational) -> Result<Self> {
        ConvexPolygonRegion::new(vec![
            (lo.clone(), lo.clone()),
            (hi.clone(), lo.clone()),
            (hi.clone(), hi.clone()),
            (lo, hi),
        ])
    }

    pub fn unit_square() -> Self {
        ConvexPolygonRegion::square(int(0), int(1)).expect("unit square is valid")
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Edges as `(start, end)` in counterclockwise order.
    pub fn edges(&self) -> impl Iterator<Item = (&Point, &Point)> {
        let n = self.vertices.len();
        (0..n).map(move |i| (&self.vertices[i], &self.vertices[(i + 1) % n]))
    }

    /// Exact area by the shoelace formula.
    pub fn volume(&self) -> BigRational {
        shoelace(&self.vertices) / int(2)
    }

    /// `max |x_i|` over the closure, attained at a vertex.
    pub fn r_inf(&self) -> BigRational {
        self.vertices
            .iter()
            .map(|(a, b)| a.abs().max(b.abs()))
            .max()
            .expect("nonempty")
    }

    pub fn scaled(&self, k: &BigRational) -> Result<Self> {
        if !k.is_positive() {
            return Err(Error::invalid("scale factor must be positive"));
        }
        ConvexPolygonRegion::new(
            self.vertices
                .iter()
                .map(|(a, b)| (a * k, b * k))
                .collect(),
        )
    }

    pub fn perimeter(&self) -> f64 {
        self.edges()
            .map(|(a, b)| {
                let dx = to_f64(&(&b.0 - &a.0));
                let dy = to_f64(&(&b.1 - &a.1));
                dx.hypot(dy)
            })
            .sum()
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        let xs = self.vertices.iter().map(|v| &v.0);
        let ys = self.vertices.iter().map(|v| &v.1);
        let (xmin, xmax) = (xs.clone().min().unwrap().clone(), xs.max().unwrap().clone());
        let (ymin, ymax) = (ys.clone().min().unwrap().clone(), ys.max().unwrap().clone());
        ((xmin, ymin), (xmax, ymax))
    }

    /// Exact strict-interior test.
    pub fn contains_strict(&self, p: &Point) -> bool {
        self.edges().all(|(a, b)| cross(a, b, p).is_positive())
    }

    /// Floating-point half-planes `a x1 + b x2 + c > 0`, one per edge.
    pub fn float_halfplanes(&self) -> Vec<[f64; 3]> {
        self.edges()
            .map(|(p, q)| {
                let ex = to_f64(&(&q.0 - &p.0));
                let ey = to_f64(&(&q.1 - &p.1));
                let (px, py) = (to_f64(&p.0), to_f64(&p.1));
                [-ey, ex, ey * px - ex * py]
            })
            .collect()
    }

    /// The vertical chord at abscissa `x1`, if the line meets the closure.
    pub fn slice(&self, x1: f64) -> Option<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (p, q) in self.edges() {
            let (px, py, qx, qy) = (to_f64(&p.0), to_f64(&p.1), to_f64(&q.0), to_f64(&q.1));
            let (a, b) = if px <= qx { (px, qx) } else { (qx, px) };
            if x1 < a || x1 > b {
                continue;
            }
            if px == qx {
                lo = lo.min(py.min(qy));
                hi = hi.max(py.max(qy));
            } else {
                let y = py + (x1 - px) * (qy - py) / (qx - px);
                lo = lo.min(y);
                hi = hi.max(y);
            }
        }
        (lo <= hi).then_some((lo, hi))
    }

    /// Integer points strictly inside `scale * R`, as exact row ranges.
    pub fn interior_rows(&self, scale: &BigRational) -> Result<InteriorRows> {
        if !scale.is_positive() {
            return Err(Error::invalid("scale must be positive"));
        }
        let mut cons = Vec::with_capacity(self.vertices.len());
        for (p, q) in self.edges() {
            let ex = &q.0 - &p.0;
            let ey = &q.1 - &p.1;
            let a = -ey.clone();
            let b = ex.clone();
            let c = -(scale * (&ex * &p.1 - &ey * &p.0));
            let den = common_denominator([&a, &b, &c]);
            let f = BigRational::from_integer(den);
            let to = |r: &BigRational| to_i128(&(r * &f).to_integer());
            cons.push((to(&a)?, to(&b)?, to(&c)?));
        }
        let ((xmin, _), (xmax, _)) = self.bounding_box();
        let x1_min = floor_i64(&(scale * xmin))? + 1;
        let x1_max = ceil_i64(&(scale * xmax))? - 1;
        Ok(InteriorRows {
            cons,
            x1_min,
            x1_max,
        })
    }
}

fn shoelace(v: &[Point]) -> BigRational {
    let n = v.len();
    (0..n)
        .map(|i| {
            let (a, b) = (&v[i], &v[(i + 1) % n]);
            &a.0 * &b.1 - &b.0 * &a.1
        })
        .fold(BigRational::zero(), |acc, x| acc + x)
}

/// Strict-interior lattice points of a scaled polygon, row by row.
#[derive(Debug, Clone)]
pub struct InteriorRows {
    /// `a x1 + b x2 + c > 0` for every edge.
    cons: Vec<(i128, i128, i128)>,
    pub x1_min: i64,
    pub x1_max: i64,
}

impl InteriorRows {
    /// Inclusive `x2` range of row `x1`, or `None` if the row is empty.
    pub fn row(&self, x1: i64) -> Option<(i64, i64)> {
        let x1 = x1 as i128;
        let mut lo = i128::MIN;
        let mut hi = i128::MAX;
        for &(a, b, c) in &self.cons {
            let r = a * x1 + c;
            if b > 0 {
                // x2 > -r / b
                lo = lo.max((-r).div_euclid(b) + 1);
            } else if b < 0 {
                // x2 < r / (-b)
                let nb = -b;
                let ceil = -((-r).div_euclid(nb));
                hi = hi.min(ceil - 1);
            } else if r <= 0 {
                return None;
            }
        }
        (lo <= hi).then(|| (lo as i64, hi as i64))
    }

    pub fn rows(&self) -> impl Iterator<Item = (i64, i64, i64)> + '_ {
        (self.x1_min..=self.x1_max).filter_map(move |x1| self.row(x1).map(|(a, b)| (x1, a, b)))
    }

    pub fn count(&self) -> u64 {
        self.rows().map(|(_, a, b)| (b - a + 1) as u64).sum()
    }

    pub fn contains(&self, x1: i64, x2: i64) -> bool {
        self.cons
            .iter()
            .all(|&(a, b, c)| a * x1 as i128 + b * x2 as i128 + c > 0)
    }
}

/// Helper for tests and fixtures: `(a/b, c/d)`.
pub fn pt(a: i64, b: i64, c: i64, d: i64) -> Point {
    (rat(a, b), rat(c, d))
}
