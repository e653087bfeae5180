use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;

use super::field::NumberField;
use super::primes::{s_p_tau, Tau};
use crate::arith::fp::reduce_int;
use crate::arith::primes::require_prime;
use crate::arith::qpoly::{factor_over_q, QPoly, FACTOR_DEGREE_CAP};
use crate::arith::rat::{int_valuation, Rat};
use crate::arith::valuation::val_p_unchecked;
use crate::error::{Error, Result};

const ROOT_SEARCH_DEPTH: usize = 400;

/// How one factor field was decided.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct FactorVerdict {
    pub factor: String,
    pub degree: usize,
    /// `S_p^τ` of the factor field via Dedekind's criterion, when it applies.
    pub dedekind: Option<bool>,
    /// Existence of an unramified degree-one prime via p-adic roots (τ = (1,1)).
    pub padic_root: Option<bool>,
    pub nonempty: bool,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct KillReport {
    pub p: u64,
    pub tau: Tau,
    pub a: Rat,
    pub g_a: String,
    pub factors: Vec<FactorVerdict>,
    /// `S_p^τ(Q; a) ≠ ∅`, i.e. `v_p(a) ≥ 0`.
    pub left_nonempty: bool,
    pub right_nonempty: bool,
    pub agree: bool,
}

/// `g_a = t·a^e·((T^Q − T)² − 1) − (T^Q − T)` with `t = p`, `Q = p^f`.
pub fn parametric_modulus(p: u64, tau: Tau, a: &Rat) -> QPoly {
    let q = (p as usize).pow(tau.f);
    let s = QPoly::monomial(Rat::one(), q).sub(&QPoly::x());
    let coef = Rat::from(p) * a.pow(tau.e);
    s.mul(&s)
        .sub(&QPoly::one())
        .scale(&coef)
        .sub(&s)
}

/// Checks, over `F = Q`, that `S_p^τ(F; a)` is nonempty exactly when some
/// field `Q[T]/(φ)` for an irreducible factor `φ` of `g_a` has a prime of
/// type at most `τ` above `p`.
///
/// Each factor field is decided by Dedekind's criterion on an integral
/// monic generator when `p` does not divide its index, and, for
/// `τ = (1,1)`, independently by searching for a root in `Q_p`. When both
/// apply they must agree.
pub fn lemma_kill_check(p: u64, tau: Tau, a: &Rat) -> Result<KillReport> {
    require_prime(p)?;
    let g = parametric_modulus(p, tau, a);
    if g.deg0() > FACTOR_DEGREE_CAP {
        return Err(Error::resource(format!(
            "g_a has degree {} beyond the factorization cap {FACTOR_DEGREE_CAP}",
            g.deg0()
        )));
    }
    let fac = factor_over_q(&g)?;
    let mut factors = Vec::new();
    for (phi, _) in &fac.factors {
        factors.push(decide_factor(phi, p, tau)?);
    }
    let left_nonempty = val_p_unchecked(a, p) >= 0;
    let right_nonempty = factors.iter().any(|f| f.nonempty);
    let report = KillReport {
        p,
        tau,
        a: a.clone(),
        g_a: g.to_string(),
        factors,
        left_nonempty,
        right_nonempty,
        agree: left_nonempty == right_nonempty,
    };
    if !report.agree {
        return Err(Error::invariant(format!(
            "basic set and factor fields disagree for p={p}, τ={tau}, a={a}"
        )));
    }
    Ok(report)
}

fn decide_factor(phi: &QPoly, p: u64, tau: Tau) -> Result<FactorVerdict> {
    let psi = integral_generator(phi);
    let dedekind = {
        let field = NumberField::new(psi.clone())?;
        match s_p_tau(&field, p, tau) {
        Ok(s) => Some(!s.is_empty()),
        Err(Error::Unsupported(_)) => None,
        Err(e) => return Err(e),
    }
    };
    let padic_root = if tau == (Tau { e: 1, f: 1 }) {
        let ints: Vec<BigInt> = psi.coeffs().iter().map(|c| c.numer().clone()).collect();
        Some(has_root_qp(&ints, p)?)
    } else {
        None
    };
    let nonempty = match (dedekind, padic_root) {
        (Some(a), Some(b)) if a != b => {
            return Err(Error::invariant(format!(
                "Dedekind and p-adic root routes disagree on {phi}"
            )))
        }
        (Some(a), _) => a,
        (None, Some(b)) => b,
        (None, None) => {
            return Err(Error::unsupported(format!(
                "{p} divides the index of Z[θ] for {psi} and τ={tau} has no root-based fallback"
            )))
        }
    };
    Ok(FactorVerdict {
        factor: phi.to_string(),
        degree: phi.deg0(),
        dedekind,
        padic_root,
        nonempty,
    })
}

/// `c^n·φ(T/c)` for the least common denominator `c`: a monic integer
/// polynomial generating the same field.
pub fn integral_generator(phi: &QPoly) -> QPoly {
    let phi = phi.monic();
    let n = phi.deg0();
    let c = phi.denominator_lcm();
    let coeffs: Vec<Rat> = phi
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, v)| v * &Rat::from_bigint(c.pow((n - i) as u32)))
        .collect();
    QPoly::new(coeffs)
}

/// Whether an integer polynomial has a root in `Z_p`.
///
/// Refines residues digit by digit (`X = r + pY`), stripping the `p`-part
/// of the content at each step; a simple root modulo `p` lifts by Hensel's
/// lemma. Terminates for squarefree inputs.
pub fn has_root_zp(f: &[BigInt], p: u64) -> Result<bool> {
    root_search(f, p, 0)
}

/// Whether an integer polynomial has a root in `Q_p`: a root in `Z_p`, or
/// a root of the reversed polynomial in `pZ_p`.
pub fn has_root_qp(f: &[BigInt], p: u64) -> Result<bool> {
    if f.first().is_some_and(|c| c.is_zero()) {
        return Ok(true);
    }
    if has_root_zp(f, p)? {
        return Ok(true);
    }
    let rev: Vec<BigInt> = f.iter().rev().cloned().collect();
    let scaled = substitute_linear(&rev, &BigInt::zero(), &BigInt::from(p));
    has_root_zp(&scaled, p)
}

fn substitute_linear(f: &[BigInt], r: &BigInt, s: &BigInt) -> Vec<BigInt> {
    // f(r + sY) by Horner.
    let mut acc: Vec<BigInt> = Vec::new();
    for c in f.iter().rev() {
        let mut next = vec![BigInt::zero(); acc.len() + 1];
        for (i, a) in acc.iter().enumerate() {
            next[i] += a * r;
            next[i + 1] += a * s;
        }
        next[0] += c;
        acc = next;
    }
    while acc.last().is_some_and(|c| c.is_zero()) {
        acc.pop();
    }
    acc
}

fn root_search(f: &[BigInt], p: u64, depth: usize) -> Result<bool> {
    if depth > ROOT_SEARCH_DEPTH {
        return Err(Error::resource("p-adic root search depth exceeded"));
    }
    if f.iter().all(|c| c.is_zero()) {
        return Ok(true);
    }
    let pb = BigInt::from(p);
    let v = f
        .iter()
        .filter(|c| !c.is_zero())
        .map(|c| int_valuation(c, p))
        .min()
        .unwrap();
    let div = pb.pow(v as u32);
    let f: Vec<BigInt> = f.iter().map(|c| c / &div).collect();
    let fbar: Vec<u64> = f.iter().map(|c| reduce_int(c, p)).collect();
    let eval = |poly: &[u64], x: u64| -> u64 {
        poly.iter()
            .rev()
            .fold(0u128, |acc, &c| (acc * x as u128 + c as u128) % p as u128) as u64
    };
    let deriv: Vec<u64> = fbar
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| ((i as u128 * c as u128) % p as u128) as u64)
        .collect();
    for r in 0..p {
        if eval(&fbar, r) != 0 {
            continue;
        }
        if eval(&deriv, r) != 0 {
            return Ok(true);
        }
        let shifted = substitute_linear(&f, &BigInt::from(r), &pb);
        if root_search(&shifted, p, depth + 1)? {
            return Ok(true);
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(c: &[i64]) -> Vec<BigInt> {
        c.iter().map(|&v| BigInt::from(v)).collect()
    }

    #[test]
    fn padic_roots() {
        // x^2 + 7 has a root in Z_2 (−7 ≡ 1 mod 8); x^2 + 3 does not.
        assert!(has_root_zp(&ints(&[7, 0, 1]), 2).unwrap());
        assert!(!has_root_zp(&ints(&[3, 0, 1]), 2).unwrap());
        // x^2 − 2 has no root in Q_2; 4x^2 − 1 has roots ±1/2 only in Q_2 ∖ Z_2.
        assert!(!has_root_qp(&ints(&[-2, 0, 1]), 2).unwrap());
        assert!(!has_root_zp(&ints(&[-1, 0, 4]), 2).unwrap());
        assert!(has_root_qp(&ints(&[-1, 0, 4]), 2).unwrap());
        // x^2 + 1 has roots in Z_5, not in Z_3.
        assert!(has_root_zp(&ints(&[1, 0, 1]), 5).unwrap());
        assert!(!has_root_qp(&ints(&[1, 0, 1]), 3).unwrap());
    }

    #[test]
    fn modulus_shape() {
        let t11 = Tau::new(1, 1).unwrap();
        assert_eq!(
            parametric_modulus(2, t11, &Rat::one()).to_string(),
            "2*T^4 - 4*T^3 + T^2 + T - 2"
        );
        assert_eq!(parametric_modulus(2, t11, &Rat::zero()).to_string(), "-T^2 + T");
    }

    #[test]
    fn acceptance_values() {
        let t11 = Tau::new(1, 1).unwrap();
        for a in ["0", "1", "2", "1/2", "3/4"] {
            let a: Rat = a.parse().unwrap();
            let r = lemma_kill_check(2, t11, &a).unwrap();
            assert!(r.agree);
            assert_eq!(r.left_nonempty, val_p_unchecked(&a, 2) >= 0);
        }
    }
}
