use num_bigint::BigInt;

use super::field::{NfElem, NumberField};
use super::primes::{reduce_coords, val_at_prime, NumberFieldPrime};
use crate::arith::fppoly::FpPoly;
use crate::arith::qpoly::{lift_fppoly, QPoly};
use crate::arith::rat::{int_valuation, Rat};
use crate::error::{Error, Result};

/// Requirement `v_P(x - target) ≥ bound`.
#[derive(Clone, Debug)]
pub struct Constraint {
    pub prime: NumberFieldPrime,
    pub target: NfElem,
    pub bound: i64,
}

/// An element meeting every constraint, built by CRT in `Z[θ]/(p^K)` from
/// lifted idempotents and then re-verified valuation by valuation.
///
/// All primes must lie above one rational prime.
pub fn weak_approx(l: &NumberField, constraints: &[Constraint]) -> Result<NfElem> {
    if constraints.is_empty() {
        return Ok(l.zero());
    }
    for c in constraints {
        if !c.prime.field().same_field(l) || !c.target.field().same_field(l) {
            return Err(Error::input("constraint lives in a different field"));
        }
    }
    for (i, a) in constraints.iter().enumerate() {
        for b in &constraints[i + 1..] {
            if a.prime == b.prime {
                return Err(Error::input("two constraints at the same prime"));
            }
        }
    }
    let p = constraints[0].prime.p;
    if constraints.iter().any(|c| c.prime.p != p) {
        return Err(Error::unsupported(
            "weak approximation is implemented for primes above a single rational prime",
        ));
    }
    let x = if constraints.len() == 1 {
        constraints[0].target.clone()
    } else {
        crt_combine(l, p, constraints)?
    };
    for c in constraints {
        let v = val_at_prime(&c.prime, &x.sub(&c.target))?;
        if v < c.bound {
            return Err(Error::invariant(format!(
                "approximation misses a constraint: valuation {v} < {}",
                c.bound
            )));
        }
    }
    Ok(x)
}

fn crt_combine(l: &NumberField, p: u64, constraints: &[Constraint]) -> Result<NfElem> {
    let h = l.modulus();
    let c = constraints
        .iter()
        .map(|k| int_valuation(&k.target.denominator(), p))
        .max()
        .unwrap();
    let need = constraints
        .iter()
        .map(|k| {
            let e = k.prime.e as i64;
            (k.bound + e - 1).div_euclid(e).max(0)
        })
        .max()
        .unwrap();
    let big_k = (c as i64 + need + 1) as u32;
    let scale = Rat::from_bigint(BigInt::from(p).pow(c as u32));
    let hbar = FpPoly::from_rats(p, h.coeffs())?;
    let mut acc = l.zero();
    for k in constraints {
        let eps = idempotent(l, p, &hbar, &k.prime, big_k)?;
        let t = reduce_coords(k.target.scale(&scale).poly(), p, big_k)?;
        acc = acc.add(&eps.mul(&l.elem(t)));
    }
    let reduced = reduce_coords(acc.poly(), p, big_k)?;
    Ok(l.elem(reduced).scale(&scale.inv().unwrap()))
}

/// The idempotent of `Z[θ]/(p^K)` that is 1 on the component of `prime`
/// and 0 on the others, via `ε ← 3ε² − 2ε³`.
fn idempotent(l: &NumberField, p: u64, hbar: &FpPoly, prime: &NumberFieldPrime, k: u32) -> Result<NfElem> {
    let local = prime.residue_poly().pow(prime.e as u64);
    let rest = hbar.divrem(&local).0;
    let (one, _, t) = local.xgcd(&rest);
    if one.degree() != Some(0) {
        return Err(Error::invariant("local factors are not coprime modulo p"));
    }
    let start = t.mul(&rest).rem(hbar);
    let mut eps = l.elem(lift_fppoly(&start));
    let three = Rat::from(3);
    let two = Rat::from(2);
    for _ in 0..64 {
        let sq = eps.mul(&eps);
        let next = l.elem(reduce_coords(
            sq.scale(&three).sub(&sq.mul(&eps).scale(&two)).poly(),
            p,
            k,
        )?);
        let check = reduce_coords(next.mul(&next).sub(&next).poly(), p, k)?;
        eps = next;
        if check == QPoly::zero() {
            return Ok(eps);
        }
    }
    Err(Error::resource("idempotent lifting did not converge"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::extint::ExtInt;
    use crate::numberfield::primes::primes_above;

    #[test]
    fn gaussian_two_primes() {
        let k = NumberField::parse("T^2 + 1").unwrap();
        let ps = primes_above(&k, 5).unwrap();
        let target = k.parse_elem("1 + 2T").unwrap().inv().unwrap();
        let cs = vec![
            Constraint {
                prime: ps[0].clone(),
                target: target.clone(),
                bound: 1,
            },
            Constraint {
                prime: ps[1].clone(),
                target: k.zero(),
                bound: 1,
            },
        ];
        let x = weak_approx(&k, &cs).unwrap();
        assert!(ps[0].val(&x.sub(&target)) >= 1);
        assert!(ps[1].val(&x) >= 1);
    }

    #[test]
    fn high_bounds_and_ramified_primes() {
        let k = NumberField::parse("T^3 - 2").unwrap();
        let ps = primes_above(&k, 5).unwrap();
        assert!(ps.len() >= 2);
        let cs: Vec<Constraint> = ps
            .iter()
            .enumerate()
            .map(|(i, pr)| Constraint {
                prime: pr.clone(),
                target: k.from_rat(&Rat::frac(i as i64 + 1, 25)),
                bound: 4,
            })
            .collect();
        let x = weak_approx(&k, &cs).unwrap();
        for c in &cs {
            assert!(c.prime.val(&x.sub(&c.target)) >= ExtInt::Fin(4));
        }
    }

    #[test]
    fn rejections() {
        let k = NumberField::parse("T^2 + 1").unwrap();
        let p5 = primes_above(&k, 5).unwrap();
        let p2 = primes_above(&k, 2).unwrap();
        let c = |pr: &NumberFieldPrime| Constraint {
            prime: pr.clone(),
            target: k.one(),
            bound: 1,
        };
        assert!(matches!(
            weak_approx(&k, &[c(&p5[0]), c(&p5[0])]),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            weak_approx(&k, &[c(&p5[0]), c(&p2[0])]),
            Err(Error::Unsupported(_))
        ));
        assert_eq!(weak_approx(&k, &[c(&p2[0])]).unwrap(), k.one());
    }

    #[test]
    fn local_factor_divides_modulus() {
        let k = NumberField::parse("T^3 - 2").unwrap();
        for pr in primes_above(&k, 5).unwrap() {
            let hl = pr.local_factor(6);
            let m = BigInt::from(5).pow(6);
            let r = k.modulus().rem(&hl);
            for c in r.coeffs() {
                assert!(c.is_integer());
                assert_eq!(c.numer() % &m, BigInt::from(0), "{pr:?}");
            }
        }
    }
}
