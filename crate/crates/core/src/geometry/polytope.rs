//! Polytopes inside the unit cube given by half-spaces, with exact volume.

use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{int, rat, serde_rational, serde_rational_vec, to_f64};

/// Closed-membership slack for floating point log-vectors.
pub const MEMBERSHIP_EPS: f64 = 1e-12;

/// `{t : n . t <= c}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace {
    #[serde(with = "serde_rational_vec")]
    pub n: Vec<BigRational>,
    #[serde(with = "serde_rational")]
    pub c: BigRational,
}

#[derive(Debug, Clone, Deserialize)]
struct PolytopeSpec {
    dim: usize,
    #[serde(default)]
    halfspaces: Vec<HalfSpace>,
}

/// Intersection of half-spaces with the box `[0,1]^dim`, `1 <= dim <= 4`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolytopeSpec")]
pub struct Polytope {
    dim: usize,
    halfspaces: Vec<HalfSpace>,
    #[serde(skip)]
    float: Vec<(Vec<f64>, f64)>,
}

impl TryFrom<PolytopeSpec> for Polytope {
    type Error = Error;
    fn try_from(s: PolytopeSpec) -> Result<Self> {
        Polytope::new(s.dim, s.halfspaces)
    }
}

impl Polytope {
    pub fn new(dim: usize, halfspaces: Vec<HalfSpace>) -> Result<Self> {
        if !(1..=4).contains(&dim) {
            return Err(Error::invalid(format!("polytope dimension {dim} not in 1..=4")));
        }
        if let Some(h) = halfspaces.iter().find(|h| h.n.len() != dim) {
            return Err(Error::invalid(format!(
                "half-space normal has {} entries, expected {dim}",
                h.n.len()
            )));
        }
        let float = halfspaces
            .iter()
            .map(|h| (h.n.iter().map(to_f64).collect(), to_f64(&h.c)))
            .collect();
        Ok(Polytope {
            dim,
            halfspaces,
            float,
        })
    }

    /// The full cube `[0,1]^dim`.
    pub fn unit_cube(dim: usize) -> Result<Self> {
        Polytope::new(dim, Vec::new())
    }

    /// An empty polytope (`t_1 <= -1`).
    pub fn empty(dim: usize) -> Result<Self> {
        let mut n = vec![BigRational::zero(); dim];
        n[0] = int(1);
        Polytope::new(dim, vec![HalfSpace { n, c: int(-1) }])
    }

    /// `{t in [0,1]^3 : t1 + t2 + t3 <= 1}` and analogues in other dimensions.
    pub fn simplex(dim: usize) -> Result<Self> {
        Polytope::new(
            dim,
            vec![HalfSpace {
                n: vec![int(1); dim],
                c: int(1),
            }],
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn halfspaces(&self) -> &[HalfSpace] {
        &self.halfspaces
    }

    pub fn is_cube(&self) -> bool {
        self.halfspaces.is_empty()
    }

    /// Intersection with another polytope of the same dimension.
    pub fn intersect(&self, other: &Polytope) -> Result<Polytope> {
        if self.dim != other.dim {
            return Err(Error::invalid("intersecting polytopes of different dimension"));
        }
        let mut hs = self.halfspaces.clone();
        hs.extend(other.halfspaces.iter().cloned());
        Polytope::new(self.dim, hs)
    }

    /// Closed membership with slack `MEMBERSHIP_EPS`.
    #[inline]
    pub fn contains(&self, t: &[f64]) -> bool {
        debug_assert_eq!(t.len(), self.dim);
        t.iter()
            .all(|&x| x >= -MEMBERSHIP_EPS && x <= 1.0 + MEMBERSHIP_EPS)
            && self.float.iter().all(|(n, c)| {
                n.iter().zip(t).map(|(a, b)| a * b).sum::<f64>() <= c + MEMBERSHIP_EPS
            })
    }

    /// Exact membership of a rational point.
    pub fn contains_exact(&self, t: &[BigRational]) -> bool {
        t.iter().all(|x| !x.is_negative() && *x <= int(1))
            && self.halfspaces.iter().all(|h| {
                let s: BigRational = h.n.iter().zip(t).map(|(a, b)| a * b).sum();
                s <= h.c
            })
    }

    /// Exact volume.
    pub fn volume(&self) -> BigRational {
        let (a, c) = constraint_matrix(self.dim, &self.halfspaces);
        volume_generic(self.dim, &a, &c)
    }

    /// Floating-point volume of the polytope cut by `t_i <= upper_i`.
    pub fn volume_below(&self, upper: &[f64]) -> f64 {
        if self.is_cube() {
            return upper.iter().map(|u| u.clamp(0.0, 1.0)).product();
        }
        let (mut a, mut c): (Vec<Vec<f64>>, Vec<f64>) = box_rows(self.dim);
        for (n, cc) in &self.float {
            a.push(n.clone());
            c.push(*cc);
        }
        for (i, &u) in upper.iter().enumerate() {
            let mut row = vec![0.0; self.dim];
            row[i] = 1.0;
            a.push(row);
            c.push(u);
        }
        volume_generic(self.dim, &a, &c)
    }
}

/// `V0'(u) = {t in [0,1]^4 : t_i <= t_4 <= u, i <= 3}`.
pub fn v0_prime(u: &BigRational) -> Result<Polytope> {
    if u.is_negative() || *u > int(1) {
        return Err(Error::invalid("v0_prime needs 0 <= u <= 1"));
    }
    let mut hs = Vec::new();
    for i in 0..3 {
        let mut n = vec![BigRational::zero(); 4];
        n[i] = int(1);
        n[3] = int(-1);
        hs.push(HalfSpace {
            n,
            c: BigRational::zero(),
        });
    }
    hs.push(HalfSpace {
        n: vec![int(0), int(0), int(0), int(1)],
        c: u.clone(),
    });
    Polytope::new(4, hs)
}

/// The half-space `t_axis <= c`.
pub fn upper_bound(dim: usize, axis: usize, c: BigRational) -> HalfSpace {
    let mut n = vec![BigRational::zero(); dim];
    n[axis] = int(1);
    HalfSpace { n, c }
}

/// The half-space `t_axis >= c`.
pub fn lower_bound(dim: usize, axis: usize, c: BigRational) -> HalfSpace {
    let mut n = vec![BigRational::zero(); dim];
    n[axis] = int(-1);
    HalfSpace { n, c: -c }
}

/// Half of the cube in the first coordinate, handy in tests and fixtures.
pub fn half_slab(dim: usize) -> Result<Polytope> {
    Polytope::new(dim, vec![upper_bound(dim, 0, rat(1, 2))])
}

/// Scalars the vertex enumeration can run over.
pub(crate) trait Scalar: Clone + PartialOrd + Signed + std::fmt::Debug {
    fn near_zero(&self) -> bool;
    fn from_usize(n: usize) -> Self;
}

impl Scalar for BigRational {
    fn near_zero(&self) -> bool {
        self.is_zero()
    }
    fn from_usize(n: usize) -> Self {
        int(n as i64)
    }
}

impl Scalar for f64 {
    fn near_zero(&self) -> bool {
        self.abs() < 1e-11
    }
    fn from_usize(n: usize) -> Self {
        n as f64
    }
}

fn box_rows<S: Scalar>(dim: usize) -> (Vec<Vec<S>>, Vec<S>) {
    let mut a = Vec::new();
    let mut c = Vec::new();
    for i in 0..dim {
        let mut lo = vec![S::zero(); dim];
        lo[i] = -S::one();
        a.push(lo);
        c.push(S::zero());
        let mut hi = vec![S::zero(); dim];
        hi[i] = S::one();
        a.push(hi);
        c.push(S::one());
    }
    (a, c)
}

fn constraint_matrix(dim: usize, hs: &[HalfSpace]) -> (Vec<Vec<BigRational>>, Vec<BigRational>) {
    let (mut a, mut c) = box_rows::<BigRational>(dim);
    for h in hs {
        a.push(h.n.clone());
        c.push(h.c.clone());
    }
    (a, c)
}

/// Solves the square system `m x = b` by Gaussian elimination.
fn solve<S: Scalar>(mut m: Vec<Vec<S>>, mut b: Vec<S>) -> Option<Vec<S>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .filter(|&r| !m[r][col].near_zero())
            .max_by(|&r, &s| m[r][col].abs().partial_cmp(&m[s][col].abs()).unwrap())?;
        m.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone() / m[col][col].clone();
                for k in col..n {
                    let v = m[col][k].clone() * f.clone();
                    m[r][k] = m[r][k].clone() - v;
                }
                let v = b[col].clone() * f;
                b[r] = b[r].clone() - v;
            }
        }
    }
    Some((0..n).map(|i| b[i].clone() / m[i][i].clone()).collect())
}

/// Rank of a list of row vectors.
fn rank<S: Scalar>(mut rows: Vec<Vec<S>>) -> usize {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut r = 0;
    for col in 0..ncols {
        let Some(piv) = (r..rows.len())
            .filter(|&i| !rows[i][col].near_zero())
            .max_by(|&i, &j| rows[i][col].abs().partial_cmp(&rows[j][col].abs()).unwrap())
        else {
            continue;
        };
        rows.swap(r, piv);
        for i in 0..rows.len() {
            if i != r && !rows[i][col].is_zero() {
                let f = rows[i][col].clone() / rows[r][col].clone();
                for k in col..ncols {
                    let v = rows[r][k].clone() * f.clone();
                    rows[i][k] = rows[i][k].clone() - v;
                }
            }
        }
        r += 1;
    }
    r
}

fn determinant<S: Scalar>(mut m: Vec<Vec<S>>) -> S {
    let n = m.len();
    let mut det = S::one();
    for col in 0..n {
        let Some(piv) = (col..n)
            .filter(|&r| !m[r][col].near_zero())
            .max_by(|&r, &s| m[r][col].abs().partial_cmp(&m[s][col].abs()).unwrap())
        else {
            return S::zero();
        };
        if piv != col {
            m.swap(col, piv);
            det = -det;
        }
        det = det * m[col][col].clone();
        for r in col + 1..n {
            if !m[r][col].is_zero() {
                let f = m[r][col].clone() / m[col][col].clone();
                for k in col..n {
                    let v = m[col][k].clone() * f.clone();
                    m[r][k] = m[r][k].clone() - v;
                }
            }
        }
    }
    det
}

fn k_subsets(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            if m - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    rec(0, m, k, &mut cur, &mut out);
    out
}

struct Vertices<S> {
    points: Vec<Vec<S>>,
    tight: Vec<BTreeSet<usize>>,
}

fn enumerate_vertices<S: Scalar>(dim: usize, a: &[Vec<S>], c: &[S]) -> Vertices<S> {
    let mut points: Vec<Vec<S>> = Vec::new();
    for subset in k_subsets(a.len(), dim) {
        let m: Vec<Vec<S>> = subset.iter().map(|&i| a[i].clone()).collect();
        let b: Vec<S> = subset.iter().map(|&i| c[i].clone()).collect();
        let Some(x) = solve(m, b) else { continue };
        let feasible = a.iter().zip(c).all(|(row, ci)| {
            let s = dot(row, &x);
            let slack = ci.clone() - s;
            !slack.is_negative() || slack.near_zero()
        });
        if feasible
            && !points.iter().any(|p| {
                p.iter()
                    .zip(&x)
                    .all(|(u, v)| (u.clone() - v.clone()).near_zero())
            })
        {
            points.push(x);
        }
    }
    let tight = points
        .iter()
        .map(|x| {
            a.iter()
                .zip(c)
                .enumerate()
                .filter(|(_, (row, ci))| ((*ci).clone() - dot(row, x)).near_zero())
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    Vertices { points, tight }
}

fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

fn affine_dim<S: Scalar>(pts: &[Vec<S>], idx: &[usize]) -> usize {
    if idx.len() <= 1 {
        return 0;
    }
    let base = &pts[idx[0]];
    let rows = idx[1..]
        .iter()
        .map(|&i| {
            pts[i]
                .iter()
                .zip(base)
                .map(|(u, v)| u.clone() - v.clone())
                .collect()
        })
        .collect();
    rank(rows)
}

/// Pulling triangulation: cone from the first vertex over every facet that
/// avoids it, recursively.
fn triangulate<S: Scalar>(
    v: &Vertices<S>,
    face: &[usize],
    dim: usize,
    ncons: usize,
    out: &mut Vec<Vec<usize>>,
) {
    if dim == 0 {
        out.push(vec![face[0]]);
        return;
    }
    let apex = face[0];
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    for j in 0..ncons {
        let sub: Vec<usize> = face
            .iter()
            .copied()
            .filter(|&i| v.tight[i].contains(&j))
            .collect();
        if sub.is_empty() || sub.len() == face.len() || sub.contains(&apex) {
            continue;
        }
        if affine_dim(&v.points, &sub) != dim - 1 || !seen.insert(sub.clone()) {
            continue;
        }
        let mut inner = Vec::new();
        triangulate(v, &sub, dim - 1, ncons, &mut inner);
        for mut s in inner {
            s.push(apex);
            out.push(s);
        }
    }
}

fn volume_generic<S: Scalar>(dim: usize, a: &[Vec<S>], c: &[S]) -> S {
    let v = enumerate_vertices(dim, a, c);
    let all: Vec<usize> = (0..v.points.len()).collect();
    if all.len() <= dim || affine_dim(&v.points, &all) < dim {
        return S::zero();
    }
    let mut simplices = Vec::new();
    triangulate(&v, &all, dim, a.len(), &mut simplices);
    let mut total = S::zero();
    for s in simplices {
        let base = &v.points[s[0]];
        let m: Vec<Vec<S>> = s[1..]
            .iter()
            .map(|&i| {
                v.points[i]
                    .iter()
                    .zip(base)
                    .map(|(x, y)| x.clone() - y.clone())
                    .collect()
            })
            .collect();
        total = total + determinant(m).abs();
    }
    let fact = (1..=dim).fold(S::one(), |acc, k| acc * S::from_usize(k));
    total / fact
}

/// Volume of an arbitrary bounded H-polytope `{t : a t <= c}` given in floats.
pub fn volume_f64(dim: usize, a: &[Vec<f64>], c: &[f64]) -> f64 {
    volume_generic(dim, a, c)
}

pub fn polytope_volume(v: &Polytope) -> BigRational {
    v.volume()
}
