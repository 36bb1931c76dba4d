//! Exact half-integer arithmetic for irrep labels and weights.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{cx, Cx, Real};

/// A number `x` with `2x` integer, stored as `twice = 2x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct HalfInteger {
    twice: i64,
}

impl HalfInteger {
    pub const ZERO: Self = Self { twice: 0 };
    pub const HALF: Self = Self { twice: 1 };
    pub const ONE: Self = Self { twice: 2 };

    pub const fn from_twice(twice: i64) -> Self {
        Self { twice }
    }

    pub const fn from_int(n: i64) -> Self {
        Self { twice: 2 * n }
    }

    pub const fn twice(self) -> i64 {
        self.twice
    }

    pub const fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    /// Integer value if `self` is an integer.
    pub fn as_integer(self) -> Option<i64> {
        self.is_integer().then_some(self.twice / 2)
    }

    pub fn to_real<T: Real>(self) -> T {
        T::of(self.twice) * T::half()
    }

    pub fn to_f64(self) -> f64 {
        self.twice as f64 * 0.5
    }

    /// `e^{i pi x}`, exact: one of `1, i, -1, -i`.
    pub fn phase<T: Real>(self) -> Cx<T> {
        match self.twice.rem_euclid(4) {
            0 => cx(T::one(), T::zero()),
            1 => cx(T::zero(), T::one()),
            2 => cx(-T::one(), T::zero()),
            _ => cx(T::zero(), -T::one()),
        }
    }

    /// `(-1)^n` for an integer value.
    pub fn parity_sign(self) -> Option<i64> {
        self.as_integer()
            .map(|n| if n.rem_euclid(2) == 0 { 1 } else { -1 })
    }

    /// Exact conversion from a float that is a multiple of one half.
    pub fn from_f64_exact(x: f64) -> Option<Self> {
        let t = 2.0 * x;
        (t.is_finite() && t.fract() == 0.0 && t.abs() < 9.0e15).then(|| Self::from_twice(t as i64))
    }
}

impl Add for HalfInteger {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::from_twice(self.twice + rhs.twice)
    }
}

impl Sub for HalfInteger {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::from_twice(self.twice - rhs.twice)
    }
}

impl Neg for HalfInteger {
    type Output = Self;
    fn neg(self) -> Self {
        Self::from_twice(-self.twice)
    }
}

impl PartialEq<i64> for HalfInteger {
    fn eq(&self, other: &i64) -> bool {
        self.twice == 2 * other
    }
}

impl PartialOrd<i64> for HalfInteger {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        self.twice.partial_cmp(&(2 * other))
    }
}

impl fmt::Display for HalfInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

/// Accepts `"3/2"`, `"-1/2"`, `"2"`, `"1.5"`.
impl FromStr for HalfInteger {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::HalfInteger(s.to_string());
        if let Some((num, den)) = s.split_once('/') {
            let num: i64 = num.trim().parse().map_err(|_| bad())?;
            return match den.trim() {
                "1" => Ok(Self::from_int(num)),
                "2" => Ok(Self::from_twice(num)),
                _ => Err(bad()),
            };
        }
        if let Ok(n) = s.parse::<i64>() {
            return Ok(Self::from_int(n));
        }
        let x: f64 = s.parse().map_err(|_| bad())?;
        Self::from_f64_exact(x).ok_or_else(bad)
    }
}

impl Serialize for HalfInteger {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for HalfInteger {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            Int(i64),
            Float(f64),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Text(s) => s.parse().map_err(de::Error::custom),
            Repr::Int(n) => Ok(Self::from_int(n)),
            Repr::Float(x) => Self::from_f64_exact(x)
                .ok_or_else(|| de::Error::custom(format!("{x} is not a multiple of 1/2"))),
        }
    }
}
