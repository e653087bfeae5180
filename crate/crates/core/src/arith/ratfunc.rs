use std::fmt;

use super::mpoly::MPoly;
use super::rat::Rat;
use crate::error::{Error, Result};

/// A quotient of two polynomials in the same variables with coprime
/// numerator and denominator.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct RatFunc {
    num: MPoly,
    den: MPoly,
}

impl RatFunc {
    /// Builds `num/den`, rejecting a zero or non-coprime denominator.
    pub fn new(num: MPoly, den: MPoly) -> Result<Self> {
        if num.arity() != den.arity() {
            return Err(Error::input("numerator and denominator arity differ"));
        }
        if den.is_zero() {
            return Err(Error::input("zero denominator"));
        }
        let g = num.gcd(&den);
        if !g.is_constant() {
            return Err(Error::input(format!(
                "numerator and denominator share the factor {g}"
            )));
        }
        Ok(RatFunc { num, den })
    }

    /// Cancels the common factor before building.
    pub fn reduced(num: MPoly, den: MPoly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::input("zero denominator"));
        }
        let g = num.gcd(&den);
        if num.is_zero() {
            return Ok(RatFunc {
                den: MPoly::one(num.arity()),
                num,
            });
        }
        let n = num.div_exact(&g).unwrap();
        let d = den.div_exact(&g).unwrap();
        RatFunc::new(n, d)
    }

    pub fn polynomial(p: MPoly) -> Self {
        let a = p.arity();
        RatFunc {
            num: p,
            den: MPoly::one(a),
        }
    }

    pub fn num(&self) -> &MPoly {
        &self.num
    }

    pub fn den(&self) -> &MPoly {
        &self.den
    }

    pub fn arity(&self) -> usize {
        self.num.arity()
    }

    /// Value at `x`, or `None` at a pole (denominator vanishes).
    pub fn eval(&self, x: &[Rat]) -> Option<Rat> {
        let d = self.den.eval(x);
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval(x) / d)
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", self.num, self.den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::mpoly::parse_poly;

    #[test]
    fn coprimality_enforced() {
        let n = parse_poly("X1^2 - 1", &["X1"]).unwrap();
        let d = parse_poly("X1 - 1", &["X1"]).unwrap();
        assert!(RatFunc::new(n.clone(), d.clone()).is_err());
        let r = RatFunc::reduced(n, d).unwrap();
        assert_eq!(r.num(), &parse_poly("X1 + 1", &["X1"]).unwrap());
        let inv = RatFunc::new(MPoly::one(1), parse_poly("X1", &["X1"]).unwrap()).unwrap();
        assert_eq!(inv.eval(&[Rat::zero()]), None);
        assert_eq!(inv.eval(&[Rat::from(4)]), Some(Rat::frac(1, 4)));
    }
}
