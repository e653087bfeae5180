use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;

use crate::arith::mpoly::parse_poly;
use crate::arith::qpoly::{is_irreducible_q, QPoly, FACTOR_DEGREE_CAP};
use crate::arith::rat::Rat;
use crate::error::{Error, Result};

/// A number field `Q[T]/(h)` given by a monic irreducible integer
/// polynomial `h`; `θ` denotes the class of `T`.
#[derive(Clone)]
pub struct NumberField {
    h: Arc<QPoly>,
}

impl NumberField {
    pub fn new(h: QPoly) -> Result<Self> {
        let n = h
            .degree()
            .filter(|&d| d >= 1)
            .ok_or_else(|| Error::input("defining polynomial must have degree at least 1"))?;
        if !h.lead().is_one() {
            return Err(Error::input(format!("{h} is not monic")));
        }
        if !h.coeffs().iter().all(|c| c.is_integer()) {
            return Err(Error::input(format!("{h} does not have integer coefficients")));
        }
        if n > FACTOR_DEGREE_CAP {
            return Err(Error::unsupported(format!(
                "degree {n} exceeds the supported cap {FACTOR_DEGREE_CAP}"
            )));
        }
        if !is_irreducible_q(&h)? {
            return Err(Error::input(format!("{h} is reducible over Q")));
        }
        Ok(NumberField { h: Arc::new(h) })
    }

    /// Parses the defining polynomial written in the variable `T`.
    pub fn parse(src: &str) -> Result<Self> {
        let p = parse_poly(src, &["T"])?;
        NumberField::new(p.as_qpoly(0).expect("univariate"))
    }

    /// Q itself, as `Q[T]/(T)`.
    pub fn rationals() -> Self {
        NumberField {
            h: Arc::new(QPoly::x()),
        }
    }

    pub fn degree(&self) -> usize {
        self.h.deg0()
    }

    pub fn modulus(&self) -> &QPoly {
        &self.h
    }

    pub fn same_field(&self, o: &NumberField) -> bool {
        Arc::ptr_eq(&self.h, &o.h) || self.h == o.h
    }

    pub fn elem(&self, poly: QPoly) -> NfElem {
        NfElem {
            field: self.clone(),
            c: poly.rem(&self.h),
        }
    }

    pub fn from_rat(&self, x: &Rat) -> NfElem {
        self.elem(QPoly::constant(x.clone()))
    }

    pub fn zero(&self) -> NfElem {
        self.elem(QPoly::zero())
    }

    pub fn one(&self) -> NfElem {
        self.from_rat(&Rat::one())
    }

    pub fn theta(&self) -> NfElem {
        self.elem(QPoly::x())
    }

    /// Parses an element written as a polynomial in `T`.
    pub fn parse_elem(&self, src: &str) -> Result<NfElem> {
        let p = parse_poly(src, &["T"])?;
        Ok(self.elem(p.as_qpoly(0).expect("univariate")))
    }
}

impl fmt::Debug for NumberField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q[T]/({})", self.h)
    }
}

impl PartialEq for NumberField {
    fn eq(&self, o: &Self) -> bool {
        self.same_field(o)
    }
}

/// An element of a [`NumberField`], stored as its reduced representative.
#[derive(Clone)]
pub struct NfElem {
    field: NumberField,
    c: QPoly,
}

impl NfElem {
    pub fn field(&self) -> &NumberField {
        &self.field
    }

    pub fn poly(&self) -> &QPoly {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_zero()
    }

    pub fn as_rat(&self) -> Option<Rat> {
        (self.c.deg0() == 0).then(|| self.c.coeff(0))
    }

    pub fn add(&self, o: &NfElem) -> NfElem {
        self.field.elem(self.c.add(&o.c))
    }

    pub fn sub(&self, o: &NfElem) -> NfElem {
        self.field.elem(self.c.sub(&o.c))
    }

    pub fn neg(&self) -> NfElem {
        self.field.elem(self.c.neg())
    }

    pub fn mul(&self, o: &NfElem) -> NfElem {
        self.field.elem(self.c.mul(&o.c))
    }

    pub fn scale(&self, k: &Rat) -> NfElem {
        self.field.elem(self.c.scale(k))
    }

    pub fn inv(&self) -> Option<NfElem> {
        if self.is_zero() {
            return None;
        }
        let (g, s, _) = self.c.xgcd(&self.field.h);
        debug_assert_eq!(g, QPoly::one());
        Some(self.field.elem(s))
    }

    pub fn div(&self, o: &NfElem) -> Option<NfElem> {
        o.inv().map(|i| self.mul(&i))
    }

    pub fn pow(&self, mut e: u64) -> NfElem {
        let mut acc = self.field.one();
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Field norm down to Q (`Res(h, a)` for monic `h`).
    pub fn norm(&self) -> Rat {
        let n = self.field.degree();
        if self.c.deg0() == 0 {
            return self.c.coeff(0).pow(n as u32);
        }
        self.field.h.resultant(&self.c)
    }

    /// Least common denominator of the coordinates.
    pub fn denominator(&self) -> BigInt {
        self.c.denominator_lcm()
    }
}

impl PartialEq for NfElem {
    fn eq(&self, o: &Self) -> bool {
        self.field == o.field && self.c == o.c
    }
}

impl fmt::Display for NfElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.c.to_string_in("T"))
    }
}

impl fmt::Debug for NfElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} in {:?}", self, self.field)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_arithmetic() {
        let k = NumberField::parse("T^2 + 1").unwrap();
        let i = k.theta();
        assert_eq!(i.mul(&i), k.from_rat(&Rat::from(-1)));
        let a = k.parse_elem("1 + 2T").unwrap();
        assert_eq!(a.norm(), Rat::from(5));
        let ai = a.inv().unwrap();
        assert_eq!(a.mul(&ai), k.one());
        assert_eq!(ai.to_string(), "-2/5*T + 1/5");
        assert!(NumberField::parse("T^2 - 1").is_err());
        assert!(NumberField::parse("2T^2 + 1").is_err());
    }
}
