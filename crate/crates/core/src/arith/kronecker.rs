//! Kronecker symbol and the quadratic character attached to a discriminant.

use serde::Serialize;

/// The Kronecker symbol `(a / n)` for arbitrary integers.
pub fn kronecker(a: i128, n: i128) -> i8 {
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    let mut result: i8 = 1;
    let mut n = n;
    if n < 0 {
        n = -n;
        if a < 0 {
            result = -result;
        }
    }
    let v = n.trailing_zeros();
    n >>= v;
    if v > 0 {
        if a % 2 == 0 {
            return 0;
        }
        if v % 2 == 1 {
            let r = a.rem_euclid(8);
            if r == 3 || r == 5 {
                result = -result;
            }
        }
    }
    // n is now odd and positive: Jacobi symbol
    let mut a = a.rem_euclid(n);
    let mut n = n;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = n % 8;
            if r == 3 || r == 5 {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// Table size above which the character is evaluated on the fly.
const TABLE_LIMIT: u64 = 1 << 22;

/// The character `n -> (disc / n)` for a discriminant `disc = 0, 1 mod 4`.
///
/// Such a character is periodic modulo `|disc|`; small moduli are tabulated.
#[derive(Debug, Clone, Serialize)]
pub struct CharacterData {
    disc: i128,
    #[serde(skip)]
    table: Option<Vec<i8>>,
}

impl CharacterData {
    pub fn new(disc: i128) -> Self {
        let q = disc.unsigned_abs();
        let table = if disc % 4 == 0 || disc.rem_euclid(4) == 1 {
            (q >= 1 && q <= TABLE_LIMIT as u128)
                .then(|| (0..q as i128).map(|n| kronecker(disc, n)).collect())
        } else {
            None
        };
        CharacterData { disc, table }
    }

    pub fn disc(&self) -> i128 {
        self.disc
    }

    /// Period of `n -> chi(n)` on positive integers (valid for discriminants).
    pub fn period(&self) -> u128 {
        self.disc.unsigned_abs()
    }

    /// True when the character is principal, i.e. the discriminant is a square.
    pub fn is_principal(&self) -> bool {
        crate::forms::is_perfect_square(self.disc)
    }

    #[inline]
    pub fn chi(&self, n: u64) -> i8 {
        match &self.table {
            Some(t) => t[(n as u128 % t.len() as u128) as usize],
            None => kronecker(self.disc, n as i128),
        }
    }
}

/// `sum_{k | d} chi(k)`, computed from the factorization of `d`.
pub fn r_disc(d: u64, chi: &CharacterData) -> i64 {
    assert!(d >= 1, "r_disc needs d >= 1");
    super::factorize(d)
        .expect("d >= 1")
        .pairs()
        .iter()
        .map(|&(p, e)| match chi.chi(p) {
            1 => e as i64 + 1,
            0 => 1,
            _ => i64::from(e % 2 == 0),
        })
        .product()
}
