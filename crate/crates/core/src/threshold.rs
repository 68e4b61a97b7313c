//! Nonnegative distance thresholds with a distinguished unbounded value.
//!
//! A finite threshold is stored by its exact square. Realized distances in a
//! Euclidean system are square roots of rationals and are frequently
//! irrational, so storing squares keeps every comparison `d < t` exact as
//! `d^2 < t^2`. When the square is a perfect rational square the threshold
//! prints as a plain `p/q`; otherwise it prints as `sqrt(p/q)`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::rational::ExactRational;

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Threshold {
    /// A finite threshold `t >= 0`, stored as `t^2`.
    Finite { square: ExactRational },
    Unbounded,
}

impl Threshold {
    pub fn zero() -> Self {
        Threshold::Finite {
            square: ExactRational::zero(),
        }
    }

    /// Panics on negative input; thresholds are nonnegative by construction.
    pub fn from_rational(value: ExactRational) -> Self {
        assert!(!value.is_negative(), "negative threshold {value}");
        Threshold::Finite {
            square: value.square(),
        }
    }

    pub fn ratio(p: i64, q: i64) -> Self {
        Threshold::from_rational(ExactRational::new(p, q))
    }

    pub fn from_square(square: ExactRational) -> Self {
        assert!(!square.is_negative(), "negative squared threshold {square}");
        Threshold::Finite { square }
    }

    pub fn square(&self) -> Option<&ExactRational> {
        match self {
            Threshold::Finite { square } => Some(square),
            Threshold::Unbounded => None,
        }
    }

    /// The threshold itself when it is rational.
    pub fn as_rational(&self) -> Option<ExactRational> {
        self.square().and_then(ExactRational::sqrt_exact)
    }

    pub fn is_unbounded(&self) -> bool {
        matches!(self, Threshold::Unbounded)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Threshold::Finite { square } if square.is_zero())
    }

    pub fn is_positive(&self) -> bool {
        !self.is_zero()
    }

    /// `d < self` where `sq` is the squared distance `d^2`.
    pub fn admits(&self, sq: &ExactRational) -> bool {
        match self {
            Threshold::Finite { square } => sq < square,
            Threshold::Unbounded => true,
        }
    }

    /// Multiplies the threshold by a nonnegative rational factor.
    pub fn scale(&self, factor: &ExactRational) -> Self {
        match self {
            Threshold::Finite { square } => Threshold::from_square(square * &factor.square()),
            Threshold::Unbounded => Threshold::Unbounded,
        }
    }

    pub fn half(&self) -> Self {
        self.scale(&ExactRational::new(1, 2))
    }

    pub fn double(&self) -> Self {
        self.scale(&ExactRational::from_integer(2))
    }

    pub fn parse(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("unbounded") {
            return Ok(Threshold::Unbounded);
        }
        if let Some(inner) = s.strip_prefix("sqrt(").and_then(|r| r.strip_suffix(')')) {
            let sq = ExactRational::parse_canonical(inner)?;
            if sq.is_negative() {
                return Err("negative square".into());
            }
            if sq.sqrt_exact().is_some() {
                return Err(format!("sqrt({inner}) is rational; write it as p/q"));
            }
            return Ok(Threshold::from_square(sq));
        }
        let v = ExactRational::parse_canonical(s)?;
        if v.is_negative() {
            return Err("thresholds are nonnegative".into());
        }
        Ok(Threshold::from_rational(v))
    }
}

impl PartialOrd for Threshold {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Threshold {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Threshold::Unbounded, Threshold::Unbounded) => Ordering::Equal,
            (Threshold::Unbounded, _) => Ordering::Greater,
            (_, Threshold::Unbounded) => Ordering::Less,
            (Threshold::Finite { square: a }, Threshold::Finite { square: b }) => a.cmp(b),
        }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Unbounded => f.write_str("unbounded"),
            Threshold::Finite { square } => match square.sqrt_exact() {
                Some(root) => write!(f, "{root}"),
                None => write!(f, "sqrt({square})"),
            },
        }
    }
}

impl fmt::Debug for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Threshold {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Threshold::parse(s)
    }
}

impl From<ExactRational> for Threshold {
    fn from(value: ExactRational) -> Self {
        Threshold::from_rational(value)
    }
}

impl Serialize for Threshold {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Threshold {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Threshold::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unbounded_dominates() {
        assert!(Threshold::Unbounded > Threshold::ratio(1_000_000, 1));
        assert!(Threshold::ratio(1, 3) < Threshold::ratio(1, 2));
        assert_eq!(Threshold::ratio(2, 4), Threshold::ratio(1, 2));
    }

    #[test]
    fn display_and_parse() {
        assert_eq!(Threshold::ratio(3, 8).to_string(), "3/8");
        let irr = Threshold::from_square(ExactRational::new(1, 2));
        assert_eq!(irr.to_string(), "sqrt(1/2)");
        assert_eq!(Threshold::parse("sqrt(1/2)").unwrap(), irr);
        assert_eq!(Threshold::parse("unbounded").unwrap(), Threshold::Unbounded);
        assert!(Threshold::parse("sqrt(1/4)").is_err());
        assert!(Threshold::parse("-1/2").is_err());
    }

    #[test]
    fn strict_admission() {
        let t = Threshold::ratio(1, 1);
        assert!(!t.admits(&ExactRational::one()));
        assert!(t.admits(&ExactRational::new(99, 100)));
        assert!(!Threshold::zero().admits(&ExactRational::zero()));
    }

    #[test]
    fn scaling() {
        assert_eq!(Threshold::ratio(1, 3).half(), Threshold::ratio(1, 6));
        assert_eq!(Threshold::ratio(1, 8).double(), Threshold::ratio(1, 4));
    }
}
