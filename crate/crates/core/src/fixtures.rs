//! Bundled form triples and regions used by the test suites and `verify`.

use serde::Serialize;

use crate::forms::FormTriple;
use crate::geometry::ConvexPolygonRegion;

#[derive(Debug, Clone, Serialize)]
pub struct Fixture {
    pub name: &'static str,
    pub forms: FormTriple,
    pub region: ConvexPolygonRegion,
}

fn build(name: &'static str, l1: [i64; 2], l2: [i64; 2], q: [i64; 3], region: &[(i64, i64)]) -> Fixture {
    Fixture {
        name,
        forms: FormTriple::from_coeffs(l1, l2, q).expect("bundled forms are valid"),
        region: ConvexPolygonRegion::from_integer_points(region).expect("bundled region is valid"),
    }
}

const UNIT: [(i64, i64); 4] = [(0, 0), (1, 0), (1, 1), (0, 1)];

/// `x1, x2, x1^2 + x2^2` on the unit square.
pub fn unit() -> Fixture {
    build("unit", [1, 0], [0, 1], [1, 1, 0], &UNIT)
}

/// Forms with content 2, 3 and 2.
pub fn nonprimitive() -> Fixture {
    build("nonprimitive", [2, 0], [0, 3], [2, 2, 2], &UNIT)
}

/// Positive discriminant 5 on the square `(1, 2) x (0, 1)`.
pub fn real_disc() -> Fixture {
    build(
        "real_disc",
        [2, -1],
        [1, 1],
        [1, -1, 1],
        &[(1, 0), (2, 0), (2, 1), (1, 1)],
    )
}

/// Discriminant `-27`: an odd prime with odd valuation.
pub fn ramified() -> Fixture {
    build("ramified", [1, 1], [3, 1], [1, 7, 1], &UNIT)
}

/// Discriminant `-36` on a triangle.
pub fn square_factor() -> Fixture {
    build(
        "square_factor",
        [1, 0],
        [1, 2],
        [1, 9, 0],
        &[(0, 0), (2, 0), (0, 2)],
    )
}

/// All bundled fixtures.
pub fn all() -> Vec<Fixture> {
    vec![unit(), nonprimitive(), real_disc(), ramified(), square_factor()]
}

pub fn by_name(name: &str) -> Option<Fixture> {
    all().into_iter().find(|f| f.name == name)
}
