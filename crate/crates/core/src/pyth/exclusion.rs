//! Exclusion primes: primes `ℓ ≠ p` at which every Kochen value is
//! `ℓ`-integral, and the residues those values can take.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::arith::fp::reduce_rat;
use crate::arith::primes::{inv_mod, is_prime, pow_mod, require_prime};
use crate::arith::rat::random_rat;
use crate::arith::valuation::{val_fin, val_p_unchecked};
use crate::arith::{MPoly, Rat};
use crate::error::{Error, Result};
use crate::kochen::{gamma_eval, KochenParams};

fn distinct(p: u64, ell: u64) -> Result<()> {
    require_prime(p)?;
    require_prime(ell)?;
    if p == ell {
        return Err(Error::input(format!("ℓ must differ from p = {p}")));
    }
    Ok(())
}

/// Whether neither `X^p − X + 1` nor `X^p − X − 1` has a zero in `F_ℓ`,
/// decided by evaluating at every element.
pub fn exclusion_root_test(p: u64, ell: u64) -> Result<bool> {
    distinct(p, ell)?;
    Ok((0..ell).all(|c| {
        let y = (pow_mod(c, p, ell) + ell - c) % ell;
        y != 1 && y != ell - 1
    }))
}

/// Whether `(ℓ − 1) | (p − 1)`, in which case every `γ_p(x)` lies in
/// `ℓ·Z_(ℓ)`; when it holds, `samples` pseudo-random `x` are checked.
pub fn deep_exclusion_test(p: u64, ell: u64, samples: usize, seed: u64) -> Result<bool> {
    distinct(p, ell)?;
    if !(p - 1).is_multiple_of(ell - 1) {
        return Ok(false);
    }
    let params = KochenParams::new(p, 1, 1, false)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let x = random_rat(&mut rng, 1000);
        let g = gamma_eval(&params, &x)
            .ok_or_else(|| Error::invariant(format!("γ_{p} has a rational pole at {x}")))?;
        if val_p_unchecked(&g, ell) < 1 {
            return Err(Error::invariant(format!(
                "v_{ell}(γ_{p}({x})) = {} although ℓ − 1 divides p − 1",
                val_p_unchecked(&g, ell)
            )));
        }
    }
    Ok(true)
}

/// Residues mod `ℓ` of the values `γ(x)`, `x ∈ Q`, or `None` when some
/// value has negative `ℓ`-adic valuation.
///
/// For `x ∈ Z_(ℓ)` with residue `c` and `y = c^Q − c`: if `y = 0` then
/// `γ(x) ≡ 0`; if `y = ±1` the value has a pole mod `ℓ`; otherwise the
/// residue is `t⁻¹(y/(y² − 1))^e`. Non-integral `x` give `γ(x) ≡ 0`.
pub fn kochen_residue_image(params: &KochenParams, ell: u64) -> Result<Option<Vec<u64>>> {
    distinct(params.p, ell)?;
    let q = params.big_q();
    let t = reduce_rat(&params.t(), ell)?;
    let t_inv = inv_mod(t as i128, ell).expect("t is a unit mod ℓ");
    let mut image = vec![false; ell as usize];
    image[0] = true;
    for c in 0..ell {
        let y = (pow_mod(c, q, ell) + ell - c) % ell;
        if y == 0 {
            continue;
        }
        let d = (pow_mod(y, 2, ell) + ell - 1) % ell;
        if d == 0 {
            return Ok(None);
        }
        let base = (y as u128 * inv_mod(d as i128, ell).unwrap() as u128 % ell as u128) as u64;
        let r = (pow_mod(base, params.e() as u64, ell) as u128 * t_inv as u128 % ell as u128) as usize;
        image[r] = true;
    }
    Ok(Some(
        (0..ell).filter(|&r| image[r as usize]).collect(),
    ))
}

fn eval_mod(g: &MPoly, point: &[u64], ell: u64) -> Result<u64> {
    let mut acc: u128 = 0;
    for (e, c) in g.monos() {
        let mut term = reduce_rat(c, ell)? as u128;
        for &(i, k) in e.pairs() {
            term = term * pow_mod(point[i as usize], k as u64, ell) as u128 % ell as u128;
        }
        acc = (acc + term) % ell as u128;
    }
    Ok(acc as u64)
}

/// Certifies `R_{p,g,t}(Q) ⊆ Z_(ℓ)`: every Kochen value is `ℓ`-integral,
/// `g` has `ℓ`-integral coefficients, and `1 + t·g(c)` is nonzero mod `ℓ`
/// at every tuple `c` of attainable Kochen residues. Returns the residue
/// image on success and `None` when this cannot be certified within `budget`
/// evaluations.
pub fn exclusion_applies(
    params: &KochenParams,
    g: &MPoly,
    ell: u64,
    budget: u64,
) -> Result<Option<Vec<u64>>> {
    if g.terms().any(|(_, c)| val_fin(c, ell) < 0) {
        return Ok(None);
    }
    let image = match kochen_residue_image(params, ell)? {
        Some(i) => i,
        None => return Ok(None),
    };
    let k = g.arity();
    let used: Vec<usize> = (0..k).filter(|&i| g.uses_var(i)).collect();
    let count = (image.len() as u64).checked_pow(used.len() as u32);
    if count.is_none_or(|c| c > budget) {
        return Ok(None);
    }
    let t = reduce_rat(&params.t(), ell)? as u128;
    let mut digits = vec![0usize; used.len()];
    let mut point = vec![0u64; k];
    for _ in 0..count.unwrap() {
        for (d, &i) in digits.iter().zip(&used) {
            point[i] = image[*d];
        }
        let v = eval_mod(g, &point, ell)? as u128;
        if (1 + t * v).is_multiple_of(ell as u128) {
            return Ok(None);
        }
        for d in digits.iter_mut() {
            *d += 1;
            if *d < image.len() {
                break;
            }
            *d = 0;
        }
    }
    Ok(Some(image))
}

/// A prime `ℓ` with `γ_p(Q) ⊆ Z_(ℓ)`, and `1/ℓ ∈ Z_(p) ∖ Z_(ℓ)` showing
/// that the ring generated by `γ_p(Q)` is properly contained in `Z_(p)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubringWitness {
    pub p: u64,
    pub ell: u64,
    pub witness: Rat,
    pub sampled: usize,
}

/// Smallest exclusion prime for `p`, with a sampled check that the
/// Kochen values are `ℓ`-integral.
pub fn proper_subring_witness(p: u64, samples: usize, seed: u64) -> Result<SubringWitness> {
    require_prime(p)?;
    const BOUND: u64 = 10_000;
    let ell = (2..=BOUND)
        .filter(|&l| l != p && is_prime(l))
        .find(|&l| exclusion_root_test(p, l).unwrap_or(false))
        .ok_or_else(|| Error::not_found(format!("no exclusion prime below {BOUND} for p = {p}")))?;
    let params = KochenParams::new(p, 1, 1, false)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let x = random_rat(&mut rng, 1000);
        let g = gamma_eval(&params, &x)
            .ok_or_else(|| Error::invariant(format!("γ_{p} has a rational pole at {x}")))?;
        if val_p_unchecked(&g, ell) < 0 {
            return Err(Error::invariant(format!(
                "v_{ell}(γ_{p}({x})) < 0 although ℓ passes the root test"
            )));
        }
    }
    let witness = Rat::frac(1, ell as i64);
    debug_assert!(val_fin(&witness, p) >= 0 && val_fin(&witness, ell) < 0);
    Ok(SubringWitness {
        p,
        ell,
        witness,
        sampled: samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn root_test_examples() {
        assert!(exclusion_root_test(3, 2).unwrap());
        assert!(exclusion_root_test(2, 17).unwrap());
        assert!(!exclusion_root_test(3, 5).unwrap());
        assert!(matches!(exclusion_root_test(3, 3), Err(Error::Input(_))));
        for p in crate::arith::primes::primes_up_to(199).into_iter().skip(1) {
            assert!(exclusion_root_test(p, 2).unwrap(), "p = {p}");
        }
    }

    #[test]
    fn deep_examples() {
        assert!(deep_exclusion_test(7, 3, 200, 1).unwrap());
        assert!(deep_exclusion_test(5, 2, 200, 2).unwrap());
        assert!(!deep_exclusion_test(7, 5, 200, 3).unwrap());
    }

    #[test]
    fn residue_image_agrees_with_root_test() {
        for p in [2u64, 3, 5, 7, 11, 13] {
            for ell in crate::arith::primes::primes_up_to(60) {
                if ell == p {
                    continue;
                }
                let params = KochenParams::new(p, 1, 1, false).unwrap();
                let img = kochen_residue_image(&params, ell).unwrap();
                assert_eq!(img.is_some(), exclusion_root_test(p, ell).unwrap(), "p={p} ℓ={ell}");
                if (p - 1) % (ell - 1) == 0 {
                    assert_eq!(img, Some(vec![0]));
                }
            }
        }
    }

    #[test]
    fn residue_image_contains_sampled_residues() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (p, e, f) in [(2u64, 1u32, 1u32), (3, 2, 1), (2, 1, 2), (5, 1, 1)] {
            for ell in [7u64, 11, 13, 17, 19] {
                let params = KochenParams::new(p, e, f, true).unwrap();
                let Some(img) = kochen_residue_image(&params, ell).unwrap() else {
                    continue;
                };
                for _ in 0..200 {
                    let x = random_rat(&mut rng, 200);
                    let g = gamma_eval(&params, &x).unwrap();
                    assert!(val_p_unchecked(&g, ell) >= 0);
                    assert!(img.contains(&reduce_rat(&g, ell).unwrap()));
                }
            }
        }
    }

    #[test]
    fn subring_witnesses() {
        let w = proper_subring_witness(3, 100, 1).unwrap();
        assert_eq!((w.ell, w.witness.clone()), (2, Rat::frac(1, 2)));
        assert_eq!(proper_subring_witness(2, 100, 1).unwrap().ell, 17);
        assert_eq!(proper_subring_witness(101, 20, 1).unwrap().ell, 2);
    }
}
