//! Additive rational valuations.
//!
//! Every size comparison in the library is done through `v(x) = -log|x|`:
//! smaller absolute value means larger valuation, `v(0) = ∞`. Valuations are
//! exact rationals throughout; there are no floats anywhere in the crate.

use num_rational::Rational64;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

use crate::error::{Error, Result};

pub type Rat = Rational64;

/// Construct a rational from numerator/denominator.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(n, d)
}

/// A valuation value: a rational or +∞.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Val {
    Finite(Rat),
    Inf,
}

impl Val {
    pub fn zero() -> Val {
        Val::Finite(Rat::zero())
    }

    pub fn from_int(n: i64) -> Val {
        Val::Finite(Rat::from_integer(n))
    }

    pub fn is_inf(&self) -> bool {
        matches!(self, Val::Inf)
    }

    pub fn finite(&self) -> Option<Rat> {
        match self {
            Val::Finite(r) => Some(*r),
            Val::Inf => None,
        }
    }

    /// Unwrap a finite value; panics on ∞ (internal misuse).
    pub fn expect_finite(&self) -> Rat {
        self.finite().expect("expected finite valuation")
    }

    pub fn min(self, other: Val) -> Val {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Val) -> Val {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn scale(self, by: Rat) -> Val {
        match self {
            Val::Finite(r) => Val::Finite(r * by),
            Val::Inf => Val::Inf,
        }
    }

    pub fn scale_int(self, by: i64) -> Val {
        self.scale(Rat::from_integer(by))
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Val::Finite(r) => r.is_positive(),
            Val::Inf => true,
        }
    }
}

impl PartialOrd for Val {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Val {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        match (self, other) {
            (Val::Inf, Val::Inf) => std::cmp::Ordering::Equal,
            (Val::Inf, _) => std::cmp::Ordering::Greater,
            (_, Val::Inf) => std::cmp::Ordering::Less,
            (Val::Finite(a), Val::Finite(b)) => a.cmp(b),
        }
    }
}

impl std::ops::Add for Val {
    type Output = Val;
    fn add(self, other: Val) -> Val {
        match (self, other) {
            (Val::Finite(a), Val::Finite(b)) => Val::Finite(a + b),
            _ => Val::Inf,
        }
    }
}

impl std::ops::Add<Rat> for Val {
    type Output = Val;
    fn add(self, other: Rat) -> Val {
        self + Val::Finite(other)
    }
}

impl std::ops::Sub for Val {
    type Output = Val;
    /// Subtraction of a finite value; ∞ - finite = ∞, subtracting ∞ panics.
    fn sub(self, other: Val) -> Val {
        match (self, other) {
            (Val::Finite(a), Val::Finite(b)) => Val::Finite(a - b),
            (Val::Inf, Val::Finite(_)) => Val::Inf,
            _ => panic!("cannot subtract an infinite valuation"),
        }
    }
}

impl std::ops::Neg for Val {
    type Output = Val;
    /// Negation of ∞ is not meaningful; callers must not negate ∞.
    fn neg(self) -> Val {
        match self {
            Val::Finite(r) => Val::Finite(-r),
            Val::Inf => panic!("cannot negate an infinite valuation"),
        }
    }
}

impl fmt::Display for Val {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Val::Finite(r) => write!(f, "{}", rat_to_string(*r)),
            Val::Inf => write!(f, "inf"),
        }
    }
}

/// Serialize rationals as "a/b" strings so document output never contains floats.
pub fn rat_to_string(r: Rat) -> String {
    if r.denom() == &1 {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = || Error::InvalidInput(format!("cannot parse rational {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().map_err(|_| bad())?;
        let d: i64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(Error::InvalidInput(format!("zero denominator in {s:?}")));
        }
        Ok(Rat::new(n, d))
    } else {
        let n: i64 = s.parse().map_err(|_| bad())?;
        Ok(Rat::from_integer(n))
    }
}

pub fn parse_val(s: &str) -> Result<Val> {
    if s.trim() == "inf" {
        Ok(Val::Inf)
    } else {
        parse_rat(s).map(Val::Finite)
    }
}

impl Serialize for Val {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Val {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        parse_val(&s).map_err(serde::de::Error::custom)
    }
}
