//! Certificates that a finite family of generating polynomials misses some
//! rational, hence that the Pythagoras number exceeds `n`.
//!
//! Given `ℓ > |P| + 1` with `P ⊆ Z_(ℓ)[X]`, an `a` avoiding `0` and every
//! constant term mod `ℓ`, and a prime `p > ℓ` with `p ≡ 1 (mod ℓ − 1)` and
//! `p·a ≡ −1 (mod ℓ)`, every `1 + p·g(γ_p(…))` is an `ℓ`-adic unit, so the
//! rings generated by `P` lie in `Z_(ℓ)` and miss `1/ℓ`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{coefficient_set, family_size, monomials};
use crate::arith::fp::reduce_rat;
use crate::arith::primes::{crt_pair, dirichlet_prime, inv_mod, is_prime, next_prime};
use crate::arith::rat::random_rat;
use crate::arith::valuation::val_p_unchecked;
use crate::arith::{MPoly, Rat};
use crate::error::{Error, Result};
use crate::kochen::{gamma_eval, KochenParams};

/// The family a certificate speaks about.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CertificateFamily {
    /// An explicit list of polynomials.
    Explicit { polys: Vec<MPoly> },
    /// All polynomials in `n` variables of degree and height at most `n`,
    /// without any condition on denominators, so it contains the
    /// `p`-integral family for every `p`.
    Bounded { n: u32 },
}

impl CertificateFamily {
    pub fn size(&self) -> Option<u64> {
        match self {
            CertificateFamily::Explicit { polys } => Some(polys.len() as u64),
            CertificateFamily::Bounded { n } => family_size(
                coefficient_set(None, *n as u64).len(),
                monomials(*n as usize, *n).len(),
            ),
        }
    }

    /// Every value `g(0, …, 0)` for `g` in the family.
    fn constant_terms(&self) -> Vec<Rat> {
        match self {
            CertificateFamily::Explicit { polys } => {
                polys.iter().map(MPoly::constant_term).collect()
            }
            CertificateFamily::Bounded { n } => coefficient_set(None, *n as u64),
        }
    }

    /// Whether every coefficient is `ℓ`-integral.
    fn integral_at(&self, ell: u64) -> bool {
        match self {
            CertificateFamily::Explicit { polys } => polys
                .iter()
                .all(|g| g.terms().all(|(_, c)| val_p_unchecked(c, ell) >= 0)),
            // Denominators are at most n.
            CertificateFamily::Bounded { n } => ell > *n as u64,
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> MPoly {
        match self {
            CertificateFamily::Explicit { polys } => polys[rng.gen_range(0..polys.len())].clone(),
            CertificateFamily::Bounded { n } => {
                let coeffs = coefficient_set(None, *n as u64);
                let terms: Vec<_> = monomials(*n as usize, *n)
                    .into_iter()
                    .map(|e| (e, coeffs[rng.gen_range(0..coeffs.len())].clone()))
                    .collect();
                MPoly::from_terms(*n as usize, terms)
            }
        }
    }
}

/// Largest `p` for which sampled Kochen values are computed exactly; above
/// it `x^p` is too large and only the arithmetic conditions are checked.
pub const EXACT_SAMPLING_MAX_P: u64 = 20_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LowerBoundCertificate {
    pub n: u32,
    pub ell: u64,
    pub p: u64,
    pub a: u64,
    pub family_size: u64,
    pub family: CertificateFamily,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CertificateReport {
    pub checks: Vec<Check>,
    pub samples: usize,
    pub all_pass: bool,
}

fn certify(n: u32, family: CertificateFamily, p_bound: u64) -> Result<LowerBoundCertificate> {
    let size = family
        .size()
        .ok_or_else(|| Error::resource("the family size exceeds 2^64"))?;
    let mut ell = next_prime(size.checked_add(1).ok_or_else(|| Error::resource("family too large"))?);
    while !family.integral_at(ell) {
        ell = next_prime(ell + 1);
    }
    let constants: Vec<u64> = family
        .constant_terms()
        .iter()
        .map(|c| reduce_rat(c, ell))
        .collect::<Result<_>>()?;
    let a = (1..ell)
        .find(|a| !constants.contains(a))
        .expect("ℓ exceeds the number of constant terms plus one");
    let target = (ell - inv_mod(a as i128, ell).unwrap()) % ell;
    let (r, m) = crt_pair(1 % (ell - 1), ell - 1, target, ell)
        .ok_or_else(|| Error::resource("modulus ℓ(ℓ − 1) overflows 64 bits"))?;
    let p = dirichlet_prime(r as i64, m, |q| q > ell, p_bound)?.ok_or_else(|| {
        Error::not_found(format!(
            "no prime p ≤ {p_bound} with p ≡ 1 mod {} and p ≡ {target} mod {ell}",
            ell - 1
        ))
    })?;
    Ok(LowerBoundCertificate {
        n,
        ell,
        p,
        a,
        family_size: size,
        family,
    })
}

/// Certificate for the whole family of degree and height at most `n`.
pub fn pi_lower_bound(n: u32, budget: u64) -> Result<LowerBoundCertificate> {
    if n == 0 {
        return Err(Error::input("n must be at least 1"));
    }
    let family = CertificateFamily::Bounded { n };
    if family.size().is_none_or(|s| s > budget) {
        return Err(Error::resource(format!(
            "the family for n = {n} exceeds the budget {budget}"
        )));
    }
    certify(n, family, u64::MAX / 2)
}

/// Certificate for an explicit family in `n` variables.
pub fn pi_lower_bound_explicit(n: u32, polys: Vec<MPoly>) -> Result<LowerBoundCertificate> {
    if n == 0 {
        return Err(Error::input("n must be at least 1"));
    }
    if polys.is_empty() {
        return Err(Error::input("the family must not be empty"));
    }
    certify(n, CertificateFamily::Explicit { polys }, u64::MAX / 2)
}

/// Re-checks every arithmetic condition, then (for `p` up to
/// [`EXACT_SAMPLING_MAX_P`]) samples `samples` Kochen tuples and checks `g(γ_p(u)) ≡ g(0) (mod ℓ)`, `v_ℓ(1 + p·g(γ_p(w))) = 0`
/// and that the resulting ring element is `ℓ`-integral.
pub fn verify_certificate(
    cert: &LowerBoundCertificate,
    samples: usize,
    seed: u64,
) -> Result<CertificateReport> {
    let (ell, p, a) = (cert.ell, cert.p, cert.a);
    let size = cert.family.size();
    let constants = cert.family.constant_terms();
    let mut checks = vec![
        ("ℓ is prime", is_prime(ell)),
        ("family size matches", size == Some(cert.family_size)),
        ("ℓ > |P| + 1", size.is_some_and(|s| (ell as u128) > s as u128 + 1)),
        ("P has ℓ-integral coefficients", cert.family.integral_at(ell)),
        ("p is prime", is_prime(p)),
        ("p > ℓ", p > ell),
        ("p ≡ 1 mod ℓ − 1", p % (ell - 1) == 1 % (ell - 1)),
        (
            "p ≡ −a⁻¹ mod ℓ",
            (p as u128 % ell as u128) * (a as u128) % ell as u128 == ell as u128 - 1,
        ),
        ("a ≢ 0 mod ℓ", a % ell != 0),
        (
            "a ≢ g(0) mod ℓ for every g",
            constants
                .iter()
                .all(|c| reduce_rat(c, ell).is_ok_and(|r| r != a % ell)),
        ),
    ];
    let arithmetic_ok = checks.iter().all(|c| c.1);
    let samples = if p <= EXACT_SAMPLING_MAX_P { samples } else { 0 };
    let mut sampled_ok = arithmetic_ok;
    if arithmetic_ok && samples > 0 {
        let params = KochenParams::new(p, 1, 1, false)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pr = Rat::from(p);
        for _ in 0..samples {
            let g = cert.family.sample(&mut rng);
            let mut gam = || -> Result<Vec<Rat>> {
                (0..g.arity())
                    .map(|_| {
                        let x = random_rat(&mut rng, 1000);
                        gamma_eval(&params, &x)
                            .ok_or_else(|| Error::invariant(format!("γ_{p} has a pole at {x}")))
                    })
                    .collect()
            };
            let (gu, gw) = (gam()?, gam()?);
            let a_val = g.eval(&gu);
            let b_val = g.eval(&gw);
            let den = Rat::one() + &pr * &b_val;
            let congruent = val_p_unchecked(&(&a_val - &g.constant_term()), ell) >= 1;
            let unit = val_p_unchecked(&den, ell) == 0;
            let element = if den.is_zero() { None } else { Some(&a_val / &den) };
            let integral = element.is_some_and(|e| val_p_unchecked(&e, ell) >= 0);
            if !(congruent && unit && integral) {
                sampled_ok = false;
                break;
            }
        }
    }
    if samples > 0 {
        checks.push(("sampled ring elements lie in Z_(ℓ)", sampled_ok));
    }
    let checks: Vec<Check> = checks
        .into_iter()
        .map(|(name, pass)| Check {
            name: name.to_string(),
            pass,
        })
        .collect();
    let all_pass = checks.iter().all(|c| c.pass);
    Ok(CertificateReport {
        checks,
        samples,
        all_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_family() {
        let c = pi_lower_bound_explicit(1, vec![MPoly::var(1, 0)]).unwrap();
        assert_eq!((c.ell, c.a, c.p), (3, 1, 5));
        let r = verify_certificate(&c, 1000, 3).unwrap();
        assert!(r.all_pass, "{r:?}");
    }

    #[test]
    fn full_family_degree_one() {
        let c = pi_lower_bound(1, super::super::DEFAULT_BUDGET).unwrap();
        assert_eq!(c.family_size, 9);
        assert_eq!((c.ell, c.a, c.p), (11, 2, 71));
        assert!(verify_certificate(&c, 200, 4).unwrap().all_pass);
        assert!(matches!(pi_lower_bound(0, 10), Err(Error::Input(_))));
    }

    #[test]
    fn tampered_certificates_fail() {
        let mut c = pi_lower_bound_explicit(1, vec![MPoly::var(1, 0)]).unwrap();
        c.p = 7;
        assert!(!verify_certificate(&c, 10, 1).unwrap().all_pass);
        let mut c = pi_lower_bound(1, 100).unwrap();
        c.a = 1;
        assert!(!verify_certificate(&c, 10, 1).unwrap().all_pass);
    }

    #[test]
    fn full_family_degree_two() {
        let c = pi_lower_bound(2, super::super::DEFAULT_BUDGET).unwrap();
        assert_eq!(c.family_size, 7u64.pow(6));
        assert!(c.ell > c.family_size + 1);
        let r = verify_certificate(&c, 20, 5).unwrap();
        assert!(r.all_pass, "{r:?}");
        assert_eq!(r.samples, 0);
    }
}
