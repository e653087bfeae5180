//! Kochen-generated rings over Q.
//!
//! For a polynomial `g` with `p`-integral coefficients the ring element set
//! is `{ a/(1 + t·b) : a, b ∈ g(γ(Q), …, γ(Q)) }`, and its degree-`n`
//! closure adds roots of monic relations of degree at most `n` with
//! coefficients in that set. Membership is a bounded search: witnesses are
//! re-verified exactly, non-membership comes from valuation obstructions.

mod bound;
mod exclusion;
mod member;

pub use bound::{
    pi_lower_bound, pi_lower_bound_explicit, verify_certificate, CertificateFamily,
    CertificateReport, Check, LowerBoundCertificate,
};
pub use exclusion::{
    deep_exclusion_test, exclusion_applies, exclusion_root_test, kochen_residue_image,
    proper_subring_witness, SubringWitness,
};
pub use member::{
    member_r_pgt, member_r_pgtn, member_r_pn, verify_witness, CoverEntry, KochenTable,
    MembershipVerdict, Obstruction, RingElement, RingSearcher, RingUnion, SearchBounds, Witness,
};

use serde::Serialize;

use crate::arith::rat::rationals_up_to_height;
use crate::arith::valuation::{val_fin, val_p_unchecked};
use crate::arith::{MPoly, Rat};
use crate::error::{Error, Result};
use crate::kochen::KochenParams;

/// Default cap on enumeration sizes; the CLI overrides it from
/// `KOCHENLAB_BUDGET`.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// A ring `R_{p,g,t,n}`: Kochen parameters (including the sign of `t`), the
/// generating polynomial and the relation degree bound.
#[derive(Clone, Debug, Serialize)]
pub struct RingSpec {
    pub params: KochenParams,
    pub g: MPoly,
    pub n: u32,
}

impl RingSpec {
    pub fn new(params: KochenParams, g: MPoly, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::input("the degree bound n must be at least 1"));
        }
        if let Some((_, c)) = g.terms().find(|(_, c)| val_fin(c, params.p) < 0) {
            return Err(Error::input(format!(
                "coefficient {c} of g is not {}-integral",
                params.p
            )));
        }
        Ok(RingSpec { params, g, n })
    }
}

/// Rationals of height at most `h` whose denominator is prime to `p`
/// (all of them when `p` is `None`), in Stern–Brocot order.
pub fn coefficient_set(p: Option<u64>, h: u64) -> Vec<Rat> {
    rationals_up_to_height(h)
        .into_iter()
        .filter(|c| p.is_none_or(|p| val_p_unchecked(c, p) >= 0))
        .collect()
}

/// Exponent vectors in `vars` variables of total degree at most `deg`,
/// by degree and then lexicographically descending.
pub fn monomials(vars: usize, deg: u32) -> Vec<Vec<u32>> {
    fn rec(vars: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == vars {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        if cur.len() + 1 == vars {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in (0..=left).rev() {
            cur.push(k);
            rec(vars, left - k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for d in 0..=deg {
        if vars == 0 {
            if d == 0 {
                out.push(Vec::new());
            }
            continue;
        }
        rec(vars, d, &mut Vec::new(), &mut out);
    }
    out
}

/// `|coefficients|^|monomials|`, or `None` on overflow.
pub fn family_size(coefficients: usize, monomials: usize) -> Option<u64> {
    (coefficients as u64).checked_pow(monomials as u32)
}

/// All polynomials in `n` variables of total degree and height at most `n`
/// with `p`-integral coefficients, in a fixed order.
pub fn bounded_polys(p: u64, n: u32, budget: u64) -> Result<Vec<MPoly>> {
    if n == 0 {
        return Err(Error::input("n must be at least 1"));
    }
    let coeffs = coefficient_set(Some(p), n as u64);
    let monos = monomials(n as usize, n);
    let count = family_size(coeffs.len(), monos.len());
    match count {
        Some(c) if c <= budget => {}
        _ => {
            return Err(Error::resource(format!(
                "the family has {} polynomials ({} coefficients over {} monomials), over the budget {budget}",
                count.map_or_else(|| "more than 2^64".to_string(), |c| c.to_string()),
                coeffs.len(),
                monos.len()
            )))
        }
    }
    let count = count.unwrap() as usize;
    let mut out = Vec::with_capacity(count);
    let mut digits = vec![0usize; monos.len()];
    for _ in 0..count {
        let terms = digits
            .iter()
            .zip(&monos)
            .map(|(&d, e)| (e.clone(), coeffs[d].clone()));
        out.push(MPoly::from_terms(n as usize, terms));
        for d in digits.iter_mut() {
            *d += 1;
            if *d < coeffs.len() {
                break;
            }
            *d = 0;
        }
    }
    Ok(out)
}

/// `g*(X) = −g(−X)`, which satisfies `γ_{−t}`-rings of `g` being the
/// negatives of `γ_t`-rings of `g*` at the level of ring elements.
pub fn star(g: &MPoly) -> MPoly {
    let k = g.arity();
    let subs: Vec<MPoly> = (0..k).map(|i| -MPoly::var(k, i)).collect();
    -g.compose(&subs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::mpoly::height_poly;
    use num_bigint::BigInt;

    #[test]
    fn family_for_degree_one() {
        let fam = bounded_polys(2, 1, DEFAULT_BUDGET).unwrap();
        assert_eq!(fam.len(), 9);
        let fam3 = bounded_polys(3, 1, DEFAULT_BUDGET).unwrap();
        assert_eq!(fam, fam3);
        assert!(matches!(bounded_polys(2, 0, 10), Err(Error::Input(_))));
        assert!(matches!(bounded_polys(3, 2, 1000), Err(Error::Resource(_))));
    }

    #[test]
    fn family_for_degree_two() {
        // Heights ≤ 2 with odd denominator: 0, ±1, ±2; six monomials.
        let fam = bounded_polys(2, 2, DEFAULT_BUDGET).unwrap();
        assert_eq!(fam.len(), 5usize.pow(6));
        let mut sorted = fam.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), fam.len());
        assert!(fam
            .iter()
            .all(|g| g.total_degree() <= 2 && height_poly(g) <= BigInt::from(2)));
        assert_eq!(bounded_polys(3, 2, DEFAULT_BUDGET).unwrap().len(), 7usize.pow(6));
    }

    #[test]
    fn star_is_an_involution() {
        for g in bounded_polys(5, 2, DEFAULT_BUDGET).unwrap().iter().step_by(97) {
            assert_eq!(star(&star(g)), *g);
            assert_eq!(height_poly(&star(g)), height_poly(g));
        }
    }
}
