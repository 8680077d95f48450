//! Task-unit numbers (weights, capacities, distances) and the scalar trait
//! used by the sequential reference kernels.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Sub};
use std::str::FromStr;

use num_traits::{Num, NumCast, ToPrimitive};
use serde::{Deserialize, Serialize};

/// A weight as written in the problem text: exact when integer-formed,
/// floating otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Int(i64),
    Float(f64),
}

impl Number {
    pub fn as_f64(self) -> f64 {
        match self {
            Number::Int(i) => i as f64,
            Number::Float(f) => f,
        }
    }

    pub fn is_finite(self) -> bool {
        match self {
            Number::Int(_) => true,
            Number::Float(f) => f.is_finite(),
        }
    }

    pub fn is_negative(self) -> bool {
        match self {
            Number::Int(i) => i < 0,
            Number::Float(f) => f < 0.0,
        }
    }

    pub fn is_zero(self) -> bool {
        match self {
            Number::Int(i) => i == 0,
            Number::Float(f) => f == 0.0,
        }
    }

    pub fn zero() -> Self {
        Number::Int(0)
    }

    /// Numeric comparison across representations.
    pub fn cmp_numeric(self, other: Number) -> Ordering {
        match (self, other) {
            (Number::Int(a), Number::Int(b)) => a.cmp(&b),
            (a, b) => a.as_f64().total_cmp(&b.as_f64()),
        }
    }

    pub fn min(self, other: Number) -> Number {
        if other.cmp_numeric(self) == Ordering::Less {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Number) -> Number {
        if other.cmp_numeric(self) == Ordering::Greater {
            other
        } else {
            self
        }
    }

    /// Equality up to an absolute tolerance for floats; exact for integers.
    pub fn approx_eq(self, other: Number, tol: f64) -> bool {
        match (self, other) {
            (Number::Int(a), Number::Int(b)) => a == b,
            (a, b) => (a.as_f64() - b.as_f64()).abs() <= tol,
        }
    }
}

/// Subtraction with the same int/float promotion as addition.
impl Sub for Number {
    type Output = Number;

    fn sub(self, rhs: Number) -> Number {
        match (self, rhs) {
            (Number::Int(a), Number::Int(b)) => match a.checked_sub(b) {
                Some(v) => Number::Int(v),
                None => Number::Float(a as f64 - b as f64),
            },
            (a, b) => Number::Float(a.as_f64() - b.as_f64()),
        }
    }
}

impl Add for Number {
    type Output = Number;

    fn add(self, rhs: Number) -> Number {
        match (self, rhs) {
            (Number::Int(a), Number::Int(b)) => match a.checked_add(b) {
                Some(v) => Number::Int(v),
                None => Number::Float(a as f64 + b as f64),
            },
            (a, b) => Number::Float(a.as_f64() + b.as_f64()),
        }
    }
}

impl std::iter::Sum for Number {
    fn sum<I: Iterator<Item = Number>>(iter: I) -> Number {
        iter.fold(Number::zero(), |acc, n| acc + n)
    }
}

impl From<i64> for Number {
    fn from(v: i64) -> Self {
        Number::Int(v)
    }
}

impl From<f64> for Number {
    fn from(v: f64) -> Self {
        Number::Float(v)
    }
}

/// Floats always carry a decimal point or exponent so that rendering and
/// re-parsing preserves the representation.
impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Int(i) => write!(f, "{i}"),
            Number::Float(x) => {
                let s = format!("{x}");
                if s.contains(['.', 'e', 'E', 'i', 'N']) {
                    f.write_str(&s)
                } else {
                    write!(f, "{s}.0")
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("not a number: {0:?}")]
pub struct ParseNumberError(pub String);

impl FromStr for Number {
    type Err = ParseNumberError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let integer_formed = !t.is_empty()
            && t.strip_prefix(['-', '+']).unwrap_or(t).chars().all(|c| c.is_ascii_digit())
            && !t.trim_start_matches(['-', '+']).is_empty();
        if integer_formed {
            return t.parse::<i64>().map(Number::Int).map_err(|_| ParseNumberError(t.to_string()));
        }
        match t.parse::<f64>() {
            Ok(f) if f.is_finite() => Ok(Number::Float(f)),
            _ => Err(ParseNumberError(t.to_string())),
        }
    }
}

/// Scalar types the reference kernels are generic over.
pub trait Scalar: Num + NumCast + ToPrimitive + Copy + PartialOrd + fmt::Debug + Send + Sync + 'static {
    /// Converts a parsed weight without losing information.
    fn from_number(n: Number) -> Option<Self> {
        match n {
            Number::Int(i) => {
                let v: Self = NumCast::from(i)?;
                (v.to_i64() == Some(i)).then_some(v)
            }
            Number::Float(f) => {
                let v: Self = NumCast::from(f)?;
                (v.to_f64() == Some(f)).then_some(v)
            }
        }
    }
}

impl<T> Scalar for T where T: Num + NumCast + ToPrimitive + Copy + PartialOrd + fmt::Debug + Send + Sync + 'static {}
