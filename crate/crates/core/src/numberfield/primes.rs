use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Signed;
use serde::Serialize;

use super::field::{NfElem, NumberField};
use crate::arith::extint::ExtInt;
use crate::arith::fp::reduce_int;
use crate::arith::fppoly::{factor_mod_p, FpPoly};
use crate::arith::primes::require_prime;
use crate::arith::qpoly::{lift_fppoly, QPoly};
use crate::arith::rat::{int_valuation, Rat};
use crate::arith::valuation::val_fin;
use crate::error::{Error, Result};

/// A relative type `(e, f)`; "at most `τ`" means `e ≤ τ.e` and `f | τ.f`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Tau {
    pub e: u32,
    pub f: u32,
}

impl Tau {
    pub fn new(e: u32, f: u32) -> Result<Self> {
        if e == 0 || f == 0 {
            return Err(Error::input("type entries e and f must be at least 1"));
        }
        Ok(Tau { e, f })
    }

    /// `self ≤ other` in the divisibility order on residue degrees.
    pub fn le(&self, other: &Tau) -> bool {
        self.e <= other.e && other.f.is_multiple_of(self.f)
    }
}

impl fmt::Display for Tau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.e, self.f)
    }
}

/// A prime of a monogenic number field lying above the rational prime `p`,
/// given by a monic irreducible factor `G` of `h mod p` with multiplicity `e`.
#[derive(Clone)]
pub struct NumberFieldPrime {
    field: NumberField,
    pub p: u64,
    pub e: u32,
    pub f: u32,
    /// Position among the primes above `p` (ordered by residue factor).
    pub index: usize,
    residue_poly: FpPoly,
    /// `β` with `v(β/p) = -1` here and `v(β) ≥ e_Q` at the other primes above `p`.
    anti: QPoly,
    /// `w` with `v(w) = 0` here and `v(w) ≥ e_Q` at the other primes above `p`.
    away: QPoly,
}

impl NumberFieldPrime {
    pub fn field(&self) -> &NumberField {
        &self.field
    }

    pub fn tau(&self) -> Tau {
        Tau {
            e: self.e,
            f: self.f,
        }
    }

    /// The residue factor `G` of `h mod p` defining this prime.
    pub fn residue_poly(&self) -> &FpPoly {
        &self.residue_poly
    }

    pub fn val(&self, x: &NfElem) -> ExtInt {
        val_at_prime(self, x).expect("valuation at a verified prime")
    }

    /// Integer polynomial `H` with `H ≡ G^e (mod p)` dividing `h` modulo
    /// `p^k` (Hensel lift of the local factor).
    pub fn local_factor(&self, k: u32) -> QPoly {
        let h = self.field.modulus();
        let hz: Vec<BigInt> = h.coeffs().iter().map(|c| c.numer().clone()).collect();
        let hbar = FpPoly::new(self.p, hz.iter().map(|v| reduce_int(v, self.p)));
        let g = self.residue_poly.pow(self.e as u64);
        let rest = hbar.divrem(&g).0;
        if rest.degree() == Some(0) {
            return h.clone();
        }
        let lifted = crate::arith::qpoly::hensel_lift_factor(&hz, &g, &rest, self.p, k);
        QPoly::from_bigints(&lifted)
    }

    fn label(&self) -> String {
        format!("P{} over {} ({})", self.index, self.p, self.residue_poly)
    }
}

impl fmt::Debug for NumberFieldPrime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} e={} f={} in {:?}",
            self.label(),
            self.e,
            self.f,
            self.field
        )
    }
}

impl PartialEq for NumberFieldPrime {
    fn eq(&self, o: &Self) -> bool {
        self.field == o.field && self.p == o.p && self.residue_poly == o.residue_poly
    }
}

/// Serializable summary of a prime.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct PrimeSummary {
    pub p: u64,
    pub residue_factor: String,
    pub e: u32,
    pub f: u32,
}

impl From<&NumberFieldPrime> for PrimeSummary {
    fn from(pr: &NumberFieldPrime) -> Self {
        PrimeSummary {
            p: pr.p,
            residue_factor: pr.residue_poly.to_string(),
            e: pr.e,
            f: pr.f,
        }
    }
}

fn int_coeffs(f: &QPoly) -> Vec<BigInt> {
    f.coeffs().iter().map(|c| c.numer().clone()).collect()
}

/// Whether `Z[θ]` is maximal at `p` (Dedekind's criterion), together with
/// the factorization of `h mod p`.
pub fn dedekind_check(h: &QPoly, p: u64) -> Result<(bool, Vec<(FpPoly, u32)>)> {
    require_prime(p)?;
    let hbar = FpPoly::from_rats(p, h.coeffs())?;
    let fac = factor_mod_p(&hbar)?;
    let mut lifted_product = QPoly::one();
    let mut radical = FpPoly::one(p);
    let mut excess = FpPoly::one(p);
    for (g, e) in &fac.factors {
        lifted_product = lifted_product.mul(&lift_fppoly(g).pow(*e));
        radical = radical.mul(g);
        excess = excess.mul(&g.pow(*e as u64 - 1));
    }
    let diff = h.sub(&lifted_product);
    let pb = BigInt::from(p);
    let quotient: Vec<BigInt> = int_coeffs(&diff)
        .into_iter()
        .map(|c| {
            debug_assert!(c.is_multiple_of(&pb));
            c / &pb
        })
        .collect();
    let fbar = FpPoly::new(p, quotient.iter().map(|c| reduce_int(c, p)));
    let d = fbar.gcd(&radical).gcd(&excess);
    Ok((d.degree() == Some(0), fac.factors))
}

/// Primes above `p` by Dedekind's factorization theorem; rejects primes
/// dividing the index `[O_L : Z[θ]]`.
pub fn primes_above(l: &NumberField, p: u64) -> Result<Vec<NumberFieldPrime>> {
    let h = l.modulus();
    let (maximal, factors) = dedekind_check(h, p)?;
    if !maximal {
        return Err(Error::unsupported(format!(
            "{p} divides the index of Z[θ] for {h}; Dedekind's criterion does not apply"
        )));
    }
    let lifts: Vec<QPoly> = factors.iter().map(|(g, _)| lift_fppoly(g)).collect();
    let mut out = Vec::with_capacity(factors.len());
    for (i, (g, e)) in factors.iter().enumerate() {
        let mut away = QPoly::one();
        for (j, (_, ej)) in factors.iter().enumerate() {
            if j != i {
                away = away.mul(&lifts[j].pow(*ej));
            }
        }
        let anti = away.mul(&lifts[i].pow(e - 1)).rem(h);
        let away = away.rem(h);
        out.push(NumberFieldPrime {
            field: l.clone(),
            p,
            e: *e,
            f: g.degree().unwrap() as u32,
            index: i,
            residue_poly: g.clone(),
            anti,
            away,
        });
    }
    let total: u32 = out.iter().map(|q| q.e * q.f).sum();
    if total as usize != l.degree() {
        return Err(Error::invariant(format!(
            "sum of e·f over primes above {p} is {total}, not {}",
            l.degree()
        )));
    }
    for pr in &out {
        let vp = val_at_prime(pr, &l.from_rat(&Rat::from(p)))?;
        if vp != ExtInt::Fin(pr.e as i64) {
            return Err(Error::invariant(format!(
                "v_P(p) = {vp} differs from e = {} at {}",
                pr.e,
                pr.label()
            )));
        }
    }
    Ok(out)
}

fn p_integral(c: &QPoly, p: u64) -> bool {
    c.coeffs()
        .iter()
        .all(|x| !x.denom().is_multiple_of(&BigInt::from(p)))
}

/// The normalized valuation `v_P(x)` (`v_P(L^×) = Z`).
///
/// For `x = A/d` with `A ∈ Z[θ]`, `v_P(A)` is the largest `k` for which
/// `A·(β/p)^k` still has `p`-integral coordinates; this is exact because
/// `Z[θ]` is `p`-maximal. The count is capped by `v_p(N(A))/f`.
pub fn val_at_prime(pr: &NumberFieldPrime, x: &NfElem) -> Result<ExtInt> {
    if !pr.field.same_field(x.field()) {
        return Err(Error::input("element and prime belong to different fields"));
    }
    if x.is_zero() {
        return Ok(ExtInt::Inf);
    }
    let p = pr.p;
    let d = x.denominator();
    let s = int_valuation(&d, p) as i64;
    let a = x.scale(&Rat::from_bigint(d));
    let norm = a.norm();
    let cap = val_fin(&norm, p) / pr.f as i64;
    let step = pr.field.elem(pr.anti.scale(&Rat::frac(1, p as i64)));
    let mut cur = a;
    let mut k = 0i64;
    loop {
        let next = cur.mul(&step);
        if !p_integral(next.poly(), p) {
            break;
        }
        k += 1;
        if k > cap {
            return Err(Error::invariant(format!(
                "valuation count exceeded the norm bound {cap} at {}",
                pr.label()
            )));
        }
        cur = next;
    }
    Ok(ExtInt::Fin(k - pr.e as i64 * s))
}

/// An element of the residue field `F_p[T]/(G)`.
pub type ResidueElem = FpPoly;

/// Residue of a `P`-integral element in `F_p[T]/(G)`.
pub fn residue_at_prime(pr: &NumberFieldPrime, x: &NfElem) -> Result<ResidueElem> {
    let v = val_at_prime(pr, x)?;
    if v < 0 {
        return Err(Error::domain(format!("element has negative valuation at {}", pr.label())));
    }
    let p = pr.p;
    let g = &pr.residue_poly;
    if x.is_zero() {
        return Ok(FpPoly::zero(p));
    }
    let d = x.denominator();
    let s = int_valuation(&d, p);
    let pb = BigInt::from(p);
    let unit_part = &d / pb.pow(s as u32);
    let away = pr.field.elem(pr.away.clone());
    // y = x·d'·w^s has p-integral coordinates (see the module notes).
    let y = x
        .scale(&Rat::from_bigint(unit_part.clone()))
        .mul(&away.pow(s));
    if !p_integral(y.poly(), p) {
        return Err(Error::invariant("residue lift is not p-integral"));
    }
    let ry = FpPoly::from_rats(p, y.poly().coeffs())?.rem(g);
    let rw = FpPoly::from_rats(p, pr.away.coeffs())?.rem(g);
    let denom = rw
        .powmod(s, g)
        .scale(reduce_int(&unit_part, p));
    let inv = residue_inverse(&denom, g).ok_or_else(|| Error::invariant("unit residue not invertible"))?;
    Ok(ry.mul(&inv).rem(g))
}

/// Inverse in `F_p[T]/(G)`.
pub fn residue_inverse(a: &FpPoly, g: &FpPoly) -> Option<FpPoly> {
    let (d, s, _) = a.xgcd(g);
    (d.degree() == Some(0)).then(|| s.rem(g))
}

/// Degree over `F_q` of the subfield generated by a residue: least `d ≥ 1`
/// with `r^{q^d} = r`.
pub fn residue_degree(r: &FpPoly, g: &FpPoly, q: u64) -> u32 {
    let mut cur = r.rem(g);
    let target = cur.clone();
    for d in 1..=g.degree().unwrap_or(1).max(1) as u32 {
        cur = cur.powmod(q, g);
        if cur == target {
            return d;
        }
    }
    unreachable!("the residue field is finite")
}

/// `S_p^τ(L)`: primes above `p` of relative type at most `τ`.
pub fn s_p_tau(l: &NumberField, p: u64, tau: Tau) -> Result<Vec<NumberFieldPrime>> {
    Ok(primes_above(l, p)?
        .into_iter()
        .filter(|pr| pr.tau().le(&tau))
        .collect())
}

/// `S_p^τ(L; a) = {P ∈ S_p^τ(L) : v_P(a) ≥ 0}`.
pub fn s_p_tau_basic(l: &NumberField, p: u64, tau: Tau, a: &NfElem) -> Result<Vec<NumberFieldPrime>> {
    let mut out = Vec::new();
    for pr in s_p_tau(l, p, tau)? {
        if val_at_prime(&pr, a)? >= 0 {
            out.push(pr);
        }
    }
    Ok(out)
}

/// Membership of `x` in the holomorphy ring `∩_{P ∈ S_p^τ(L)} O_P`.
pub fn holomorphy_member(l: &NumberField, p: u64, tau: Tau, x: &NfElem) -> Result<bool> {
    for pr in s_p_tau(l, p, tau)? {
        if val_at_prime(&pr, x)? < 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `x mod p^k` on coordinates, for `x` with `p`-integral coordinates.
pub(crate) fn reduce_coords(x: &QPoly, p: u64, k: u32) -> Result<QPoly> {
    let m = BigInt::from(p).pow(k);
    let mut out = Vec::with_capacity(x.coeffs().len());
    for c in x.coeffs() {
        let den = c.denom().mod_floor(&m);
        let inv = mod_inverse(&den, &m)
            .ok_or_else(|| Error::domain("coordinate is not p-integral"))?;
        out.push(Rat::from_bigint((c.numer() * inv).mod_floor(&m)));
    }
    Ok(QPoly::new(out))
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    (e.gcd.abs() == BigInt::from(1)).then(|| (e.x * e.gcd.signum()).mod_floor(m))
}
