use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// An exact rational number, always in lowest terms with positive denominator.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rat(BigRational);

impl Rat {
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self> {
        let den = den.into();
        if den.is_zero() {
            return Err(Error::input("zero denominator"));
        }
        Ok(Rat(BigRational::new(num.into(), den)))
    }

    /// Builds `num/den` from integers already known to be valid; panics on a
    /// zero denominator.
    pub fn frac(num: i64, den: i64) -> Self {
        Rat(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Rat(BigRational::from_integer(n))
    }

    pub fn from_big_ratio(num: BigInt, den: BigInt) -> Self {
        Rat(BigRational::new(num, den))
    }

    pub fn zero() -> Self {
        Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Rat(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn abs(&self) -> Rat {
        Rat(self.0.abs())
    }

    pub fn signum(&self) -> i32 {
        match self.0.numer().sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn inv(&self) -> Option<Rat> {
        if self.is_zero() {
            None
        } else {
            Some(Rat(self.0.recip()))
        }
    }

    pub fn pow(&self, e: u32) -> Rat {
        Rat(num_traits::pow(self.0.clone(), e as usize))
    }

    pub fn powi(&self, e: i64) -> Option<Rat> {
        if e >= 0 {
            Some(self.pow(e as u32))
        } else {
            self.inv().map(|r| r.pow((-e) as u32))
        }
    }

    /// Height `max(|a|, |b|)` of `a/b` in lowest terms.
    pub fn height(&self) -> BigInt {
        let a = self.numer().abs();
        let b = self.denom().clone();
        a.max(b)
    }

    pub fn to_i64(&self) -> Option<i64> {
        if self.is_integer() {
            self.numer().to_i64()
        } else {
            None
        }
    }

    /// Exact square root if `self` is the square of a rational.
    pub fn sqrt_exact(&self) -> Option<Rat> {
        if self.is_negative() {
            return None;
        }
        let n = self.numer().sqrt();
        let d = self.denom().sqrt();
        if &(&n * &n) == self.numer() && &(&d * &d) == self.denom() {
            Some(Rat::from_big_ratio(n, d))
        } else {
            None
        }
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }

    pub fn from_big(r: BigRational) -> Self {
        Rat(r)
    }
}

impl From<i64> for Rat {
    fn from(v: i64) -> Self {
        Rat(BigRational::from_integer(BigInt::from(v)))
    }
}

impl From<i32> for Rat {
    fn from(v: i32) -> Self {
        Rat::from(v as i64)
    }
}

impl From<u64> for Rat {
    fn from(v: u64) -> Self {
        Rat(BigRational::from_integer(BigInt::from(v)))
    }
}

impl From<BigInt> for Rat {
    fn from(v: BigInt) -> Self {
        Rat::from_bigint(v)
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rat {
    type Err = Error;

    /// Parses `"a"` or `"a/b"` with optional signs.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse_int = |t: &str| {
            let t = t.trim();
            let t = t.strip_prefix('+').unwrap_or(t);
            BigInt::from_str(t).map_err(|_| Error::input(format!("not a rational: {s:?}")))
        };
        match s.split_once('/') {
            Some((a, b)) => Rat::new(parse_int(a)?, parse_int(b)?),
            None => Ok(Rat::from_bigint(parse_int(s)?)),
        }
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Rat::from_str(&s).map_err(serde::de::Error::custom)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident) => {
        impl $tr<&Rat> for &Rat {
            type Output = Rat;
            fn $m(self, rhs: &Rat) -> Rat {
                Rat((&self.0).$m(&rhs.0))
            }
        }
        impl $tr<Rat> for Rat {
            type Output = Rat;
            fn $m(self, rhs: Rat) -> Rat {
                Rat(self.0.$m(rhs.0))
            }
        }
        impl $tr<&Rat> for Rat {
            type Output = Rat;
            fn $m(self, rhs: &Rat) -> Rat {
                Rat(self.0.$m(&rhs.0))
            }
        }
        impl $tr<Rat> for &Rat {
            type Output = Rat;
            fn $m(self, rhs: Rat) -> Rat {
                Rat((&self.0).$m(rhs.0))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-&self.0)
    }
}

impl AddAssign<&Rat> for Rat {
    fn add_assign(&mut self, rhs: &Rat) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&Rat> for Rat {
    fn sub_assign(&mut self, rhs: &Rat) {
        self.0 -= &rhs.0;
    }
}

impl MulAssign<&Rat> for Rat {
    fn mul_assign(&mut self, rhs: &Rat) {
        self.0 *= &rhs.0;
    }
}

impl std::iter::Sum for Rat {
    fn sum<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |a, b| a + b)
    }
}

/// Exponent of `p` in a nonzero integer.
pub fn int_valuation(n: &BigInt, p: u64) -> u64 {
    debug_assert!(!n.is_zero());
    let pb = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    // Strip large powers first so highly divisible inputs stay cheap.
    let mut chunk = pb.clone();
    let mut chunk_len = 1u64;
    loop {
        let (q, r) = n.div_rem(&chunk);
        if r.is_zero() {
            n = q;
            v += chunk_len;
            if chunk_len < 64 {
                chunk = &chunk * &chunk;
                chunk_len *= 2;
            }
        } else if chunk_len > 1 {
            chunk = pb.clone();
            chunk_len = 1;
        } else {
            break;
        }
    }
    v
}

/// Rational numbers of height at most `h`, in Stern–Brocot breadth-first
/// order: `0` first, then each positive rational followed by its negative.
pub fn rationals_up_to_height(h: u64) -> Vec<Rat> {
    let mut out = vec![Rat::zero()];
    if h == 0 {
        return out;
    }
    let mut positives = Vec::new();
    for a in 1..=h {
        for b in 1..=h {
            if num_integer::gcd(a, b) == 1 {
                positives.push((a, b));
            }
        }
    }
    // Breadth-first: by tree depth, then left to right within a level.
    positives.sort_by(|&(a, b), &(c, d)| {
        sb_depth(a, b)
            .cmp(&sb_depth(c, d))
            .then_with(|| (a * d).cmp(&(c * b)))
    });
    for (a, b) in positives {
        out.push(Rat::frac(a as i64, b as i64));
        out.push(Rat::frac(-(a as i64), b as i64));
    }
    out
}

/// Depth of `a/b` in the Stern–Brocot tree (sum of continued-fraction terms minus one).
fn sb_depth(mut a: u64, mut b: u64) -> u64 {
    let mut d = 0;
    while b != 0 {
        d += a / b;
        let r = a % b;
        a = b;
        b = r;
    }
    d - 1
}

/// A pseudo-random rational `a/b` with `|a| <= h` and `1 <= b <= h`.
pub fn random_rat<R: rand::Rng + ?Sized>(rng: &mut R, h: u64) -> Rat {
    let h = h.max(1) as i64;
    let a = rng.gen_range(-h..=h);
    let b = rng.gen_range(1..=h);
    Rat::frac(a, b)
}

pub fn cmp_rat(a: &Rat, b: &Rat) -> Ordering {
    a.cmp(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowest_terms_and_display() {
        let r = Rat::new(6, -4).unwrap();
        assert_eq!(r.to_string(), "-3/2");
        assert_eq!(Rat::from(5).to_string(), "5");
        assert_eq!(Rat::zero().denom(), &BigInt::from(1));
        assert!(Rat::new(1, 0).is_err());
    }

    #[test]
    fn parse() {
        assert_eq!("3/4".parse::<Rat>().unwrap(), Rat::frac(3, 4));
        assert_eq!("-10/4".parse::<Rat>().unwrap(), Rat::frac(-5, 2));
        assert_eq!(" 7 ".parse::<Rat>().unwrap(), Rat::from(7));
        assert!("x".parse::<Rat>().is_err());
        assert!("1/0".parse::<Rat>().is_err());
    }

    #[test]
    fn heights() {
        assert_eq!(Rat::frac(3, 4).height(), BigInt::from(4));
        assert_eq!(Rat::frac(-7, 2).height(), BigInt::from(7));
        assert_eq!(Rat::zero().height(), BigInt::from(1));
    }

    #[test]
    fn valuation_of_integers() {
        assert_eq!(int_valuation(&BigInt::from(18), 3), 2);
        assert_eq!(int_valuation(&BigInt::from(7), 3), 0);
        let big = num_traits::pow(BigInt::from(5), 300) * 7;
        assert_eq!(int_valuation(&big, 5), 300);
    }

    #[test]
    fn height_enumeration_is_complete() {
        for h in 1..=12u64 {
            let got = rationals_up_to_height(h);
            let mut brute = std::collections::BTreeSet::new();
            for a in -(h as i64)..=(h as i64) {
                for b in 1..=(h as i64) {
                    brute.insert(Rat::frac(a, b));
                }
            }
            let set: std::collections::BTreeSet<_> = got.iter().cloned().collect();
            assert_eq!(set.len(), got.len(), "duplicates at h={h}");
            assert_eq!(set, brute, "h={h}");
        }
        let first: Vec<String> = rationals_up_to_height(2).iter().map(|r| r.to_string()).collect();
        assert_eq!(first, ["0", "1", "-1", "1/2", "-1/2", "2", "-2"]);
    }
}
