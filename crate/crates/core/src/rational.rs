//! Rational helpers shared by the geometry and sums modules.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // fall back to a scaled quotient for huge numerators/denominators
        let n = r.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

pub fn to_i128(n: &BigInt) -> Result<i128> {
    n.to_i128().ok_or(Error::Overflow("rational to 128-bit integer"))
}

pub fn floor_i64(r: &BigRational) -> Result<i64> {
    r.floor()
        .to_integer()
        .to_i64()
        .ok_or(Error::Overflow("rational floor"))
}

pub fn ceil_i64(r: &BigRational) -> Result<i64> {
    r.ceil()
        .to_integer()
        .to_i64()
        .ok_or(Error::Overflow("rational ceil"))
}

/// Least common multiple of the denominators.
pub fn common_denominator<'a>(rs: impl IntoIterator<Item = &'a BigRational>) -> BigInt {
    rs.into_iter()
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}

/// Square root of a nonnegative rational as `f64`.
pub fn sqrt_f64(r: &BigRational) -> f64 {
    debug_assert!(!r.is_negative());
    to_f64(r).sqrt()
}

pub fn is_zero(r: &BigRational) -> bool {
    r.is_zero()
}

/// JSON form of a rational: an integer, `[num, den]`, or `["num", "den"]`
/// in decimal when either part exceeds 64 bits.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum Repr {
    Int(i64),
    Pair([i64; 2]),
    Big([String; 2]),
}

fn from_repr(r: Repr) -> std::result::Result<BigRational, String> {
    match r {
        Repr::Int(n) => Ok(int(n)),
        Repr::Pair([_, 0]) => Err("zero denominator".into()),
        Repr::Pair([n, d]) => Ok(rat(n, d)),
        Repr::Big([n, d]) => {
            let parse = |x: &str| x.parse::<BigInt>().map_err(|e| format!("{x:?}: {e}"));
            let (n, d) = (parse(&n)?, parse(&d)?);
            if d.is_zero() {
                return Err("zero denominator".into());
            }
            Ok(BigRational::new(n, d))
        }
    }
}

fn to_repr(r: &BigRational) -> Repr {
    match (r.numer().to_i64(), r.denom().to_i64()) {
        (Some(n), Some(d)) => Repr::Pair([n, d]),
        _ => Repr::Big([r.numer().to_string(), r.denom().to_string()]),
    }
}

/// Serde adapters for `BigRational` written as `[num, den]`.
pub mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
        to_repr(r).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigRational, D::Error> {
        from_repr(Repr::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

pub mod serde_rational_vec {
    use super::*;

    pub fn serialize<S: Serializer>(
        v: &[BigRational],
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        v.iter().map(to_repr).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<BigRational>, D::Error> {
        Vec::<Repr>::deserialize(d)?
            .into_iter()
            .map(|r| from_repr(r).map_err(serde::de::Error::custom))
            .collect()
    }
}

pub mod serde_point_vec {
    use super::*;

    pub fn serialize<S: Serializer>(
        v: &[(BigRational, BigRational)],
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        v.iter().map(|(a, b)| [to_repr(a), to_repr(b)]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<(BigRational, BigRational)>, D::Error> {
        Vec::<[Repr; 2]>::deserialize(d)?
            .into_iter()
            .map(|[a, b]| {
                Ok((
                    from_repr(a).map_err(serde::de::Error::custom)?,
                    from_repr(b).map_err(serde::de::Error::custom)?,
                ))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize, Deserialize)]
    struct W(#[serde(with = "serde_rational")] BigRational);

    #[test]
    fn wide_rationals_use_decimal_strings() {
        let big = BigRational::new(BigInt::from(10).pow(30) + 1, BigInt::from(7));
        let j = serde_json::to_string(&W(big.clone())).unwrap();
        assert_eq!(j, "[\"1000000000000000000000000000001\",\"7\"]");
        assert_eq!(serde_json::from_str::<W>(&j).unwrap().0, big);
        assert_eq!(serde_json::to_string(&W(rat(-3, 6))).unwrap(), "[-1,2]");
        assert_eq!(serde_json::from_str::<W>("4").unwrap().0, int(4));
        assert!(serde_json::from_str::<W>("[1, 0]").is_err());
    }
}
