use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Serialize, Serializer};

/// An integer or `+∞`: the codomain of valuation maps.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExtInt {
    Fin(i64),
    Inf,
}

impl ExtInt {
    pub fn is_inf(self) -> bool {
        matches!(self, ExtInt::Inf)
    }

    pub fn finite(self) -> Option<i64> {
        match self {
            ExtInt::Fin(v) => Some(v),
            ExtInt::Inf => None,
        }
    }

    /// `k · self` for a positive integer `k`.
    pub fn scale(self, k: i64) -> ExtInt {
        debug_assert!(k > 0);
        match self {
            ExtInt::Fin(v) => ExtInt::Fin(v * k),
            ExtInt::Inf => ExtInt::Inf,
        }
    }
}

impl From<i64> for ExtInt {
    fn from(v: i64) -> Self {
        ExtInt::Fin(v)
    }
}

impl PartialEq<i64> for ExtInt {
    fn eq(&self, other: &i64) -> bool {
        *self == ExtInt::Fin(*other)
    }
}

impl PartialOrd<i64> for ExtInt {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        Some(self.cmp(&ExtInt::Fin(*other)))
    }
}

impl Ord for ExtInt {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtInt::Inf, ExtInt::Inf) => Ordering::Equal,
            (ExtInt::Inf, _) => Ordering::Greater,
            (_, ExtInt::Inf) => Ordering::Less,
            (ExtInt::Fin(a), ExtInt::Fin(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for ExtInt {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for ExtInt {
    type Output = ExtInt;
    fn add(self, rhs: ExtInt) -> ExtInt {
        match (self, rhs) {
            (ExtInt::Fin(a), ExtInt::Fin(b)) => ExtInt::Fin(a + b),
            _ => ExtInt::Inf,
        }
    }
}

impl Add<i64> for ExtInt {
    type Output = ExtInt;
    fn add(self, rhs: i64) -> ExtInt {
        self + ExtInt::Fin(rhs)
    }
}

impl Sub<i64> for ExtInt {
    type Output = ExtInt;
    fn sub(self, rhs: i64) -> ExtInt {
        self + ExtInt::Fin(-rhs)
    }
}

/// Negation is only meaningful on finite values; `-∞` is not representable.
impl Neg for ExtInt {
    type Output = Option<ExtInt>;
    fn neg(self) -> Option<ExtInt> {
        self.finite().map(|v| ExtInt::Fin(-v))
    }
}

impl fmt::Display for ExtInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtInt::Fin(v) => write!(f, "{v}"),
            ExtInt::Inf => write!(f, "inf"),
        }
    }
}

impl fmt::Debug for ExtInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Finite values serialize as JSON integers, `+∞` as the string `"inf"`.
impl Serialize for ExtInt {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtInt::Fin(v) => s.serialize_i64(*v),
            ExtInt::Inf => s.serialize_str("inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinity_absorbs_and_dominates() {
        assert_eq!(ExtInt::Inf + ExtInt::Fin(-5), ExtInt::Inf);
        assert!(ExtInt::Inf > ExtInt::Fin(i64::MAX));
        assert_eq!(ExtInt::Fin(2) + ExtInt::Fin(3), 5);
        assert_eq!(ExtInt::Fin(2).min(ExtInt::Inf), 2);
        assert_eq!(-ExtInt::Inf, None);
    }
}
