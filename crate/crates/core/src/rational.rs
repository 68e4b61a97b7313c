//! Canonical arbitrary-precision rationals with the `p/q` text syntax.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// An exact rational number, always held in lowest terms with a positive
/// denominator.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ExactRational(BigRational);

impl ExactRational {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Self {
        ExactRational(BigRational::new(numer.into(), denom.into()))
    }

    pub fn from_integer(n: i64) -> Self {
        ExactRational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Self {
        ExactRational(BigRational::zero())
    }

    pub fn one() -> Self {
        ExactRational(BigRational::one())
    }

    /// `2^(-k)`.
    pub fn pow2_neg(k: u32) -> Self {
        ExactRational::new(1, BigInt::one() << k)
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn abs(&self) -> Self {
        ExactRational(self.0.abs())
    }

    pub fn square(&self) -> Self {
        ExactRational(&self.0 * &self.0)
    }

    /// The exact rational square root, if one exists.
    pub fn sqrt_exact(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let n = self.0.numer().magnitude().sqrt();
        let d = self.0.denom().magnitude().sqrt();
        if &(&n * &n) == self.0.numer().magnitude() && &(&d * &d) == self.0.denom().magnitude() {
            Some(ExactRational::new(
                BigInt::from_biguint(Sign::Plus, n),
                BigInt::from_biguint(Sign::Plus, d),
            ))
        } else {
            None
        }
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }

    /// Parses the strict canonical syntax: `n` or `p/q` with `q > 0` and
    /// `gcd(|p|, q) = 1`. Non-canonical forms such as `2/4` or `3/-1` are
    /// rejected.
    pub fn parse_canonical(s: &str) -> Result<Self, String> {
        fn int(t: &str) -> Result<BigInt, String> {
            let digits = t.strip_prefix('-').unwrap_or(t);
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(format!("{t:?} is not an integer"));
            }
            if digits.len() > 1 && digits.starts_with('0') {
                return Err(format!("{t:?} has leading zeros"));
            }
            if t.starts_with('-') && digits == "0" {
                return Err("negative zero".into());
            }
            t.parse::<BigInt>().map_err(|e| e.to_string())
        }
        match s.split_once('/') {
            None => Ok(ExactRational(BigRational::from_integer(int(s)?))),
            Some((p, q)) => {
                let p = int(p)?;
                if q.starts_with('-') {
                    return Err("denominator must be positive".into());
                }
                let q = int(q)?;
                if !q.is_positive() {
                    return Err("denominator must be positive".into());
                }
                if !p.gcd(&q).is_one() {
                    return Err("not in lowest terms".into());
                }
                Ok(ExactRational(BigRational::new_raw(p, q)))
            }
        }
    }
}

impl From<BigRational> for ExactRational {
    fn from(r: BigRational) -> Self {
        ExactRational(r)
    }
}

impl From<i64> for ExactRational {
    fn from(n: i64) -> Self {
        ExactRational::from_integer(n)
    }
}

impl FromStr for ExactRational {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ExactRational::parse_canonical(s.trim())
    }
}

impl fmt::Display for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for ExactRational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExactRational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        ExactRational::parse_canonical(&s).map_err(serde::de::Error::custom)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident) => {
        impl $tr for ExactRational {
            type Output = ExactRational;
            fn $m(self, rhs: ExactRational) -> ExactRational {
                ExactRational(self.0.$m(rhs.0))
            }
        }
        impl<'a> $tr<&'a ExactRational> for &'a ExactRational {
            type Output = ExactRational;
            fn $m(self, rhs: &'a ExactRational) -> ExactRational {
                ExactRational((&self.0).$m(&rhs.0))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for ExactRational {
    type Output = ExactRational;
    fn neg(self) -> ExactRational {
        ExactRational(-self.0)
    }
}

/// Compares `sqrt(a)` with `sqrt(b) + sqrt(c)` exactly for nonnegative
/// rationals, used by the squared-form triangle test.
pub fn sqrt_sum_cmp(a: &ExactRational, b: &ExactRational, c: &ExactRational) -> Ordering {
    let sum = b + c;
    match a.cmp(&sum) {
        Ordering::Less => return Ordering::Less,
        Ordering::Equal => {
            return if b.is_zero() || c.is_zero() {
                Ordering::Equal
            } else {
                Ordering::Less
            }
        }
        Ordering::Greater => {}
    }
    // a > b + c: sqrt(a) <= sqrt(b) + sqrt(c)  <=>  (a - b - c)^2 <= 4bc
    let excess = a - &sum;
    let lhs = excess.square();
    let rhs = ExactRational::from_integer(4) * (b * c);
    lhs.cmp(&rhs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_parse_accepts_lowest_terms() {
        assert_eq!(ExactRational::parse_canonical("3/8").unwrap(), ExactRational::new(3, 8));
        assert_eq!(ExactRational::parse_canonical("-5").unwrap(), ExactRational::from_integer(-5));
        assert_eq!(ExactRational::parse_canonical("0").unwrap(), ExactRational::zero());
    }

    #[test]
    fn canonical_parse_rejects_non_canonical() {
        for bad in ["2/4", "1/-2", "1/0", "0/5", "-0", "01", "1.5", "", "/3", "3/"] {
            assert!(ExactRational::parse_canonical(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn display_round_trips() {
        for s in ["1/8", "-3/7", "12", "0"] {
            assert_eq!(ExactRational::parse_canonical(s).unwrap().to_string(), s);
        }
    }

    #[test]
    fn exact_square_roots() {
        assert_eq!(ExactRational::new(9, 64).sqrt_exact(), Some(ExactRational::new(3, 8)));
        assert_eq!(ExactRational::new(1, 2).sqrt_exact(), None);
        assert_eq!(ExactRational::zero().sqrt_exact(), Some(ExactRational::zero()));
    }

    #[test]
    fn sqrt_sum_comparison() {
        let r = ExactRational::from_integer;
        // sqrt(9) vs sqrt(1) + sqrt(4): equal
        assert_eq!(sqrt_sum_cmp(&r(9), &r(1), &r(4)), Ordering::Equal);
        // sqrt(10) > 3
        assert_eq!(sqrt_sum_cmp(&r(10), &r(1), &r(4)), Ordering::Greater);
        // sqrt(4) < sqrt(1) + sqrt(4)
        assert_eq!(sqrt_sum_cmp(&r(4), &r(1), &r(4)), Ordering::Less);
        // sqrt(2) < 1 + 1
        assert_eq!(sqrt_sum_cmp(&r(2), &r(1), &r(1)), Ordering::Less);
    }
}
