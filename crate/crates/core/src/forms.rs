//! The form triple `(L1, L2, Q)`: two linear forms and an irreducible
//! quadratic form in two variables, with their resultants, the discriminant
//! of `Q` and the decomposition into content times primitive form.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `a*x1 + b*x2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[i64; 2]", into = "[i64; 2]")]
pub struct LinearForm {
    pub a: i64,
    pub b: i64,
}

/// `a3*x1^2 + b3*x2^2 + c3*x1*x2`.
///
/// Serialized as `[a3, b3, c3]`; note the cross term comes last.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[i64; 3]", into = "[i64; 3]")]
pub struct QuadraticForm {
    pub a3: i64,
    pub b3: i64,
    pub c3: i64,
}

impl LinearForm {
    pub fn new(a: i64, b: i64) -> Result<Self> {
        if a == 0 && b == 0 {
            return Err(Error::invalid("linear form with both coefficients zero"));
        }
        Ok(LinearForm { a, b })
    }

    pub fn eval(&self, x1: i64, x2: i64) -> Result<i128> {
        let t1 = (self.a as i128)
            .checked_mul(x1 as i128)
            .ok_or(Error::Overflow("linear form"))?;
        let t2 = (self.b as i128)
            .checked_mul(x2 as i128)
            .ok_or(Error::Overflow("linear form"))?;
        t1.checked_add(t2).ok_or(Error::Overflow("linear form"))
    }

    /// Unchecked evaluation for hot loops where the caller bounded `x`.
    #[inline]
    pub(crate) fn eval_fast(&self, x1: i64, x2: i64) -> i128 {
        self.a as i128 * x1 as i128 + self.b as i128 * x2 as i128
    }

    /// Positive gcd of the coefficients.
    pub fn content(&self) -> i64 {
        self.a.gcd(&self.b)
    }

    pub fn primitive(&self) -> LinearForm {
        let c = self.content();
        LinearForm {
            a: self.a / c,
            b: self.b / c,
        }
    }

    pub fn max_abs_coeff(&self) -> u64 {
        self.a.unsigned_abs().max(self.b.unsigned_abs())
    }

    pub fn scaled(&self, k: i64) -> Result<LinearForm> {
        Ok(LinearForm {
            a: self.a.checked_mul(k).ok_or(Error::Overflow("scaling"))?,
            b: self.b.checked_mul(k).ok_or(Error::Overflow("scaling"))?,
        })
    }
}

impl TryFrom<[i64; 2]> for LinearForm {
    type Error = Error;
    fn try_from(v: [i64; 2]) -> Result<Self> {
        LinearForm::new(v[0], v[1])
    }
}

impl From<LinearForm> for [i64; 2] {
    fn from(l: LinearForm) -> Self {
        [l.a, l.b]
    }
}

impl QuadraticForm {
    /// Builds `Q`, rejecting forms whose discriminant is a perfect square
    /// (reducible over the rationals).
    pub fn new(a3: i64, b3: i64, c3: i64) -> Result<Self> {
        let q = QuadraticForm { a3, b3, c3 };
        let disc = q.discriminant();
        if is_perfect_square(disc) {
            return Err(Error::h2(format!(
                "quadratic form ({a3},{b3},{c3}) has square discriminant {disc}, so it is reducible"
            )));
        }
        Ok(q)
    }

    pub fn discriminant(&self) -> i128 {
        let c = self.c3 as i128;
        c * c - 4 * self.a3 as i128 * self.b3 as i128
    }

    pub fn eval(&self, x1: i64, x2: i64) -> Result<i128> {
        let (x1, x2) = (x1 as i128, x2 as i128);
        let sq1 = x1.checked_mul(x1).ok_or(Error::Overflow("quadratic form"))?;
        let sq2 = x2.checked_mul(x2).ok_or(Error::Overflow("quadratic form"))?;
        let cross = x1.checked_mul(x2).ok_or(Error::Overflow("quadratic form"))?;
        let t1 = (self.a3 as i128)
            .checked_mul(sq1)
            .ok_or(Error::Overflow("quadratic form"))?;
        let t2 = (self.b3 as i128)
            .checked_mul(sq2)
            .ok_or(Error::Overflow("quadratic form"))?;
        let t3 = (self.c3 as i128)
            .checked_mul(cross)
            .ok_or(Error::Overflow("quadratic form"))?;
        t1.checked_add(t2)
            .and_then(|s| s.checked_add(t3))
            .ok_or(Error::Overflow("quadratic form"))
    }

    #[inline]
    pub(crate) fn eval_fast(&self, x1: i64, x2: i64) -> i128 {
        let (x1, x2) = (x1 as i128, x2 as i128);
        self.a3 as i128 * x1 * x1 + self.b3 as i128 * x2 * x2 + self.c3 as i128 * x1 * x2
    }

    pub fn content(&self) -> i64 {
        self.a3.gcd(&self.b3).gcd(&self.c3)
    }

    pub fn primitive(&self) -> QuadraticForm {
        let c = self.content();
        QuadraticForm {
            a3: self.a3 / c,
            b3: self.b3 / c,
            c3: self.c3 / c,
        }
    }

    pub fn max_abs_coeff(&self) -> u64 {
        self.a3
            .unsigned_abs()
            .max(self.b3.unsigned_abs())
            .max(self.c3.unsigned_abs())
    }

    pub fn scaled(&self, k: i64) -> Result<QuadraticForm> {
        let m = |v: i64| v.checked_mul(k).ok_or(Error::Overflow("scaling"));
        Ok(QuadraticForm {
            a3: m(self.a3)?,
            b3: m(self.b3)?,
            c3: m(self.c3)?,
        })
    }
}

impl TryFrom<[i64; 3]> for QuadraticForm {
    type Error = Error;
    fn try_from(v: [i64; 3]) -> Result<Self> {
        QuadraticForm::new(v[0], v[1], v[2])
    }
}

impl From<QuadraticForm> for [i64; 3] {
    fn from(q: QuadraticForm) -> Self {
        [q.a3, q.b3, q.c3]
    }
}

/// Either kind of form, for the generic evaluation entry point.
#[derive(Debug, Clone, Copy)]
pub enum Form {
    Linear(LinearForm),
    Quadratic(QuadraticForm),
}

pub fn evaluate(form: Form, x: (i64, i64)) -> Result<i128> {
    match form {
        Form::Linear(l) => l.eval(x.0, x.1),
        Form::Quadratic(q) => q.eval(x.0, x.1),
    }
}

/// The four invariants `(delta12, delta13, delta23, delta)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Resultants {
    pub delta12: i128,
    pub delta13: i128,
    pub delta23: i128,
    pub delta: i128,
}

/// Contents and primitive parts: `L_i = ell_i * L_i*`, `Q = q * Q*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PrimitiveDecomposition {
    pub ell1: i64,
    pub ell2: i64,
    pub q: i64,
    pub l1_star: LinearForm,
    pub l2_star: LinearForm,
    pub q_star: QuadraticForm,
}

/// A validated triple satisfying the non-degeneracy hypothesis: the linear
/// forms are not proportional and `Q` is irreducible, so every resultant is
/// nonzero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FormTripleSpec", into = "FormTripleSpec")]
pub struct FormTriple {
    l1: LinearForm,
    l2: LinearForm,
    q: QuadraticForm,
    res: Resultants,
    decomposition: PrimitiveDecomposition,
}

/// Wire format `{"L1":[a,b], "L2":[a,b], "Q":[a3,b3,c3]}`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FormTripleSpec {
    #[serde(rename = "L1")]
    pub l1: LinearForm,
    #[serde(rename = "L2")]
    pub l2: LinearForm,
    #[serde(rename = "Q")]
    pub q: QuadraticForm,
}

impl TryFrom<FormTripleSpec> for FormTriple {
    type Error = Error;
    fn try_from(s: FormTripleSpec) -> Result<Self> {
        FormTriple::new(s.l1, s.l2, s.q)
    }
}

impl From<FormTriple> for FormTripleSpec {
    fn from(t: FormTriple) -> Self {
        FormTripleSpec {
            l1: t.l1,
            l2: t.l2,
            q: t.q,
        }
    }
}

fn linear_quadratic_resultant(l: &LinearForm, q: &QuadraticForm) -> i128 {
    // Q(-b, a)
    q.eval_fast(-l.b, l.a)
}

impl FormTriple {
    pub fn new(l1: LinearForm, l2: LinearForm, q: QuadraticForm) -> Result<Self> {
        for c in [l1.a, l1.b, l2.a, l2.b, q.a3, q.b3, q.c3] {
            if c == i64::MIN {
                return Err(Error::Overflow("coefficient"));
            }
        }
        let delta = q.discriminant();
        if is_perfect_square(delta) {
            return Err(Error::h2(format!(
                "disc Q = {delta} is a perfect square, Q is reducible"
            )));
        }
        let delta12 = l1.a as i128 * l2.b as i128 - l2.a as i128 * l1.b as i128;
        if delta12 == 0 {
            return Err(Error::h2("L1 and L2 are proportional (Res(L1,L2) = 0)"));
        }
        let delta13 = linear_quadratic_resultant(&l1, &q);
        let delta23 = linear_quadratic_resultant(&l2, &q);
        if delta13 == 0 || delta23 == 0 {
            return Err(Error::h2("a linear form divides Q (Res(L_i,Q) = 0)"));
        }
        let decomposition = PrimitiveDecomposition {
            ell1: l1.content(),
            ell2: l2.content(),
            q: q.content(),
            l1_star: l1.primitive(),
            l2_star: l2.primitive(),
            q_star: q.primitive(),
        };
        Ok(FormTriple {
            l1,
            l2,
            q,
            res: Resultants {
                delta12,
                delta13,
                delta23,
                delta,
            },
            decomposition,
        })
    }

    /// Convenience constructor from raw coefficients.
    pub fn from_coeffs(l1: [i64; 2], l2: [i64; 2], q: [i64; 3]) -> Result<Self> {
        FormTriple::new(
            LinearForm::new(l1[0], l1[1])?,
            LinearForm::new(l2[0], l2[1])?,
            QuadraticForm::new(q[0], q[1], q[2])?,
        )
    }

    pub fn l1(&self) -> &LinearForm {
        &self.l1
    }
    pub fn l2(&self) -> &LinearForm {
        &self.l2
    }
    pub fn q(&self) -> &QuadraticForm {
        &self.q
    }

    pub fn resultants(&self) -> Resultants {
        self.res
    }

    pub fn primitive_decomposition(&self) -> PrimitiveDecomposition {
        self.decomposition
    }

    pub fn is_primitive(&self) -> bool {
        let d = &self.decomposition;
        d.ell1 == 1 && d.ell2 == 1 && d.q == 1
    }

    /// The triple of primitive parts `(L1*, L2*, Q*)`.
    pub fn primitive(&self) -> FormTriple {
        let d = &self.decomposition;
        FormTriple::new(d.l1_star, d.l2_star, d.q_star)
            .expect("primitive parts of a valid triple are valid")
    }

    /// Maximum absolute coefficient over the three forms.
    pub fn l_infinity(&self) -> u64 {
        self.l1
            .max_abs_coeff()
            .max(self.l2.max_abs_coeff())
            .max(self.q.max_abs_coeff())
    }

    /// `(k L1, k L2, k^2 Q)`: the triple seen on the sublattice `k Z^2`.
    pub fn rescaled(&self, k: i64) -> Result<FormTriple> {
        let k2 = k.checked_mul(k).ok_or(Error::Overflow("scaling"))?;
        FormTriple::new(self.l1.scaled(k)?, self.l2.scaled(k)?, self.q.scaled(k2)?)
    }

    /// `(L1(x), L2(x), Q(x))` with overflow checking.
    pub fn values(&self, x1: i64, x2: i64) -> Result<(i128, i128, i128)> {
        Ok((self.l1.eval(x1, x2)?, self.l2.eval(x1, x2)?, self.q.eval(x1, x2)?))
    }

    #[inline]
    pub(crate) fn values_fast(&self, x1: i64, x2: i64) -> (i128, i128, i128) {
        (
            self.l1.eval_fast(x1, x2),
            self.l2.eval_fast(x1, x2),
            self.q.eval_fast(x1, x2),
        )
    }

    /// Primes at which the local closed forms may fail: divisors of
    /// `2 * delta * delta12 * delta13 * delta23 * ell1 * ell2 * q`.
    /// Prime factors beyond 64 bits are dropped; no prime cutoff reaches them.
    pub fn bad_primes(&self) -> Vec<u64> {
        let r = &self.res;
        let d = &self.decomposition;
        let mut ps: Vec<u64> = vec![2];
        for v in [
            r.delta,
            r.delta12,
            r.delta13,
            r.delta23,
            d.ell1 as i128,
            d.ell2 as i128,
            d.q as i128,
        ] {
            ps.extend(
                crate::arith::factorize_u128(v.unsigned_abs())
                    .into_iter()
                    .filter_map(|(p, _)| u64::try_from(p).ok()),
            );
        }
        ps.sort_unstable();
        ps.dedup();
        ps
    }
}

/// Exact integer square root test; negative numbers are never squares.
pub fn is_perfect_square(n: i128) -> bool {
    if n < 0 {
        return false;
    }
    let r = isqrt_u128(n as u128);
    r * r == n as u128
}

pub fn isqrt_u128(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> FormTriple {
        FormTriple::from_coeffs([1, 0], [0, 1], [1, 1, 0]).unwrap()
    }

    #[test]
    fn evaluation_examples() {
        let l = LinearForm::new(1, 2).unwrap();
        assert_eq!(evaluate(Form::Linear(l), (3, 4)).unwrap(), 11);
        let q = QuadraticForm::new(1, 1, 0).unwrap();
        assert_eq!(evaluate(Form::Quadratic(q), (3, 4)).unwrap(), 25);
        assert_eq!(evaluate(Form::Quadratic(q), (0, 0)).unwrap(), 0);
    }

    #[test]
    fn evaluation_widens_without_wraparound() {
        let q = QuadraticForm::new(i64::MAX, 1, 0).unwrap();
        assert!(q.eval(i64::MAX, 0).is_err());
        let l = LinearForm::new(i64::MAX, i64::MAX).unwrap();
        assert_eq!(
            l.eval(i64::MAX, i64::MAX).unwrap(),
            2 * (i64::MAX as i128) * (i64::MAX as i128)
        );
    }

    #[test]
    fn resultant_examples() {
        let t = unit();
        let r = t.resultants();
        assert_eq!(r.delta12, 1);
        assert_eq!(r.delta13, 1);
        assert_eq!(r.delta, -4);
    }

    #[test]
    fn primitive_examples() {
        assert_eq!(LinearForm::new(2, 4).unwrap().content(), 2);
        assert_eq!(
            LinearForm::new(2, 4).unwrap().primitive(),
            LinearForm { a: 1, b: 2 }
        );
        let q = QuadraticForm::new(3, 3, 3).unwrap();
        assert_eq!(q.content(), 3);
        assert_eq!(q.primitive(), QuadraticForm { a3: 1, b3: 1, c3: 1 });
        assert_eq!(LinearForm::new(1, 0).unwrap().content(), 1);
        // negative leading coefficient: content positive, sign stays on the form
        let l = LinearForm::new(-2, -4).unwrap();
        assert_eq!(l.content(), 2);
        assert_eq!(l.primitive(), LinearForm { a: -1, b: -2 });
    }

    #[test]
    fn l_infinity_examples() {
        assert_eq!(unit().l_infinity(), 1);
        let t = FormTriple::from_coeffs([3, -5], [0, 1], [1, 1, 0]).unwrap();
        assert_eq!(t.l_infinity(), 5);
        let t = FormTriple::from_coeffs([1, 0], [0, 1], [1, 1, -7]).unwrap();
        assert_eq!(t.l_infinity(), 7);
    }

    #[test]
    fn validation_failures() {
        // x1^2 - x2^2 is reducible
        assert!(QuadraticForm::new(1, -1, 0).is_err());
        // x1*x2: square discriminant 1
        assert!(QuadraticForm::new(0, 0, 1).is_err());
        // proportional linear forms
        assert!(FormTriple::from_coeffs([1, 2], [2, 4], [1, 1, 0]).is_err());
        assert!(LinearForm::new(0, 0).is_err());
    }

    #[test]
    fn triple_deserializes_from_wire_format() {
        let t: FormTriple =
            serde_json::from_str(r#"{"L1":[1,0],"L2":[0,1],"Q":[1,1,0]}"#).unwrap();
        assert_eq!(t, unit());
        let bad: std::result::Result<FormTriple, _> =
            serde_json::from_str(r#"{"L1":[1,0],"L2":[2,0],"Q":[1,1,0]}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn rescaled_triple() {
        let t = unit().rescaled(3).unwrap();
        assert_eq!(t.values(1, 1).unwrap(), (3, 3, 18));
        assert_eq!(t.primitive_decomposition().q, 9);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn triple() -> impl Strategy<Value = FormTriple> {
            (
                -20i64..20,
                -20i64..20,
                -20i64..20,
                -20i64..20,
                -9i64..9,
                -9i64..9,
                -9i64..9,
            )
                .prop_filter_map("valid triple", |(a1, b1, a2, b2, a3, b3, c3)| {
                    FormTriple::from_coeffs([a1, b1], [a2, b2], [a3, b3, c3]).ok()
                })
        }

        proptest! {
            #[test]
            fn nonvanishing_invariants(t in triple()) {
                let r = t.resultants();
                prop_assert!(r.delta12 != 0 && r.delta13 != 0 && r.delta23 != 0 && r.delta != 0);
                prop_assert!(!is_perfect_square(r.delta));
                let q = t.q();
                prop_assert!(q.a3 != 0 && q.b3 != 0);
            }

            #[test]
            fn content_homomorphism(t in triple(), x1 in -50i64..50, x2 in -50i64..50) {
                let d = t.primitive_decomposition();
                prop_assert_eq!(t.l1().eval(x1, x2).unwrap(), d.ell1 as i128 * d.l1_star.eval(x1, x2).unwrap());
                prop_assert_eq!(t.l2().eval(x1, x2).unwrap(), d.ell2 as i128 * d.l2_star.eval(x1, x2).unwrap());
                prop_assert_eq!(t.q().eval(x1, x2).unwrap(), d.q as i128 * d.q_star.eval(x1, x2).unwrap());
            }

            #[test]
            fn quadratic_homogeneity(t in triple(), x1 in -50i64..50, x2 in -50i64..50, k in -3i64..=3) {
                let q = t.q();
                prop_assert_eq!(q.eval(k * x1, k * x2).unwrap(), (k * k) as i128 * q.eval(x1, x2).unwrap());
            }
        }
    }
}
