use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::Serialize;

use super::primes::{inv_mod, is_prime, mul_mod, pow_mod};
use super::rat::Rat;
use crate::error::{Error, Result};

/// An element of the prime field `F_p`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct FpElem {
    pub modulus: u64,
    pub value: u64,
}

impl FpElem {
    pub fn new(value: i128, modulus: u64) -> Result<Self> {
        if !is_prime(modulus) {
            return Err(Error::input(format!("{modulus} is not prime")));
        }
        Ok(FpElem {
            modulus,
            value: value.rem_euclid(modulus as i128) as u64,
        })
    }

    pub fn add(self, o: FpElem) -> FpElem {
        debug_assert_eq!(self.modulus, o.modulus);
        FpElem {
            modulus: self.modulus,
            value: ((self.value as u128 + o.value as u128) % self.modulus as u128) as u64,
        }
    }

    pub fn neg(self) -> FpElem {
        FpElem {
            modulus: self.modulus,
            value: (self.modulus - self.value) % self.modulus,
        }
    }

    pub fn sub(self, o: FpElem) -> FpElem {
        self.add(o.neg())
    }

    pub fn mul(self, o: FpElem) -> FpElem {
        FpElem {
            modulus: self.modulus,
            value: mul_mod(self.value, o.value, self.modulus),
        }
    }

    pub fn inv(self) -> Option<FpElem> {
        inv_mod(self.value as i128, self.modulus).map(|value| FpElem {
            modulus: self.modulus,
            value,
        })
    }

    pub fn pow(self, e: u64) -> FpElem {
        FpElem {
            modulus: self.modulus,
            value: pow_mod(self.value, e, self.modulus),
        }
    }
}

impl fmt::Debug for FpElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}", self.value, self.modulus)
    }
}

/// Image of a `p`-integral integer in `[0, p)`.
pub fn reduce_int(n: &BigInt, p: u64) -> u64 {
    n.mod_floor(&BigInt::from(p)).to_u64().unwrap()
}

/// Image of a rational in `F_p`; fails when `p` divides the denominator.
pub fn reduce_rat(x: &Rat, p: u64) -> Result<u64> {
    let d = reduce_int(x.denom(), p);
    let inv = inv_mod(d as i128, p)
        .ok_or_else(|| Error::domain(format!("{x} is not {p}-integral")))?;
    Ok(mul_mod(reduce_int(x.numer(), p), inv, p))
}
