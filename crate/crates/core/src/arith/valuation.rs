use num_bigint::BigInt;

use super::extint::ExtInt;
use super::fp::{reduce_rat, FpElem};
use super::primes::require_prime;
use super::rat::{int_valuation, Rat};
use crate::error::{Error, Result};

/// The p-adic valuation of a rational number.
pub fn val_p(x: &Rat, p: u64) -> Result<ExtInt> {
    require_prime(p)?;
    Ok(val_p_unchecked(x, p))
}

/// [`val_p`] for a modulus already known to be prime.
pub fn val_p_unchecked(x: &Rat, p: u64) -> ExtInt {
    if x.is_zero() {
        return ExtInt::Inf;
    }
    let num = int_valuation(x.numer(), p) as i64;
    let den = int_valuation(x.denom(), p) as i64;
    ExtInt::Fin(num - den)
}

/// Finite valuation of a nonzero rational.
pub fn val_fin(x: &Rat, p: u64) -> i64 {
    val_p_unchecked(x, p)
        .finite()
        .expect("valuation of a nonzero rational")
}

/// Image of a p-integral rational in `F_p`.
pub fn residue_p(x: &Rat, p: u64) -> Result<FpElem> {
    require_prime(p)?;
    if val_p_unchecked(x, p) < 0 {
        return Err(Error::domain(format!("{x} is not a {p}-adic integer")));
    }
    let v = reduce_rat(x, p)?;
    Ok(FpElem { modulus: p, value: v })
}

pub fn height_rat(x: &Rat) -> BigInt {
    x.height()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(val_p(&Rat::zero(), 3).unwrap(), ExtInt::Inf);
        assert_eq!(val_p(&Rat::from(18), 3).unwrap(), ExtInt::Fin(2));
        assert_eq!(val_p(&Rat::frac(5, 9), 3).unwrap(), ExtInt::Fin(-2));
        assert!(matches!(val_p(&Rat::one(), 4), Err(Error::Input(_))));
        assert_eq!(residue_p(&Rat::frac(7, 2), 5).unwrap().value, 1);
        assert_eq!(residue_p(&Rat::zero(), 5).unwrap().value, 0);
        assert_eq!(residue_p(&Rat::from(5), 5).unwrap().value, 0);
        assert!(matches!(residue_p(&Rat::frac(1, 5), 5), Err(Error::Domain(_))));
        assert_eq!(height_rat(&Rat::frac(3, 4)), BigInt::from(4));
    }

    fn rat() -> impl Strategy<Value = Rat> {
        (-2000i64..2000, 1i64..2000).prop_map(|(a, b)| Rat::frac(a, b))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2500))]

        #[test]
        fn ultrametric(x in rat(), y in rat(), pi in 0usize..4) {
            let p = [2u64, 3, 5, 7][pi];
            let (vx, vy) = (val_p_unchecked(&x, p), val_p_unchecked(&y, p));
            let vs = val_p_unchecked(&(&x + &y), p);
            prop_assert!(vs >= vx.min(vy));
            if vx != vy {
                prop_assert_eq!(vs, vx.min(vy));
            }
            prop_assert_eq!(val_p_unchecked(&(&x * &y), p), vx + vy);
        }

        #[test]
        fn height_symmetries(x in rat()) {
            prop_assert_eq!(height_rat(&x), height_rat(&-x.clone()));
            if let Some(inv) = x.inv() {
                prop_assert_eq!(height_rat(&x), height_rat(&inv));
            }
        }
    }
}
