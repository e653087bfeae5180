//! The Kochen operator `γ(X) = (1/t)·((X^Q − X)/((X^Q − X)² − 1))^e` with
//! `Q = p^f`, its valuation case table, and the rational functions `ρ` and
//! `ω` used to isolate primes of a given type.

use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;

use crate::arith::extint::ExtInt;
use crate::arith::mpoly::MPoly;
use crate::arith::primes::{dirichlet_prime, require_prime};
use crate::arith::rat::{int_valuation, Rat};
use crate::arith::ratfunc::RatFunc;
use crate::arith::valuation::val_p_unchecked;
use crate::error::{Error, Result};
use crate::numberfield::primes::{residue_at_prime, residue_degree};
use crate::numberfield::{NfElem, NumberField, NumberFieldPrime, Tau};

/// Default search bound for the prime `ℓ` in [`omega_construct`].
pub const OMEGA_SEARCH_BOUND: u64 = 10_000;

/// Base prime `p`, type `τ = (e, f)` and uniformizer `t = ±p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct KochenParams {
    pub p: u64,
    pub tau: Tau,
    /// `true` for `t = −p`.
    pub negative_t: bool,
}

impl KochenParams {
    pub fn new(p: u64, e: u32, f: u32, negative_t: bool) -> Result<Self> {
        require_prime(p)?;
        Ok(KochenParams {
            p,
            tau: Tau::new(e, f)?,
            negative_t,
        })
    }

    pub fn e(&self) -> u32 {
        self.tau.e
    }

    /// `Q = q^f` with `q = p`.
    pub fn big_q(&self) -> u64 {
        self.p.pow(self.tau.f)
    }

    pub fn t(&self) -> Rat {
        let t = Rat::from(self.p);
        if self.negative_t {
            -t
        } else {
            t
        }
    }

    /// The same operator with the other uniformizer.
    pub fn flipped(&self) -> Self {
        KochenParams {
            negative_t: !self.negative_t,
            ..*self
        }
    }
}

impl fmt::Display for KochenParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "p={} τ={} t={}{}",
            self.p,
            self.tau,
            if self.negative_t { "-" } else { "" },
            self.p
        )
    }
}

/// `γ(x)` over Q, or `None` at a pole.
///
/// With `x = a/b`, `N = a^Q − a·b^{Q−1}` and `D = b^Q` we have
/// `γ(x) = (N·D)^e / (t·(N² − D²)^e)`, which avoids rational arithmetic on
/// the large intermediate powers.
pub fn gamma_eval(params: &KochenParams, x: &Rat) -> Option<Rat> {
    let (n, d) = root_parts(params, x);
    let den = &n * &n - &d * &d;
    if den.is_zero() {
        return None;
    }
    let e = params.e();
    let num = num_traits::pow(&n * &d, e as usize);
    let den = num_traits::pow(den, e as usize) * BigInt::from(params.p);
    let g = Rat::from_big_ratio(num, den);
    Some(if params.negative_t { -g } else { g })
}

/// `(N, D)` with `x^Q − x = N/D`, `D = b^Q`.
fn root_parts(params: &KochenParams, x: &Rat) -> (BigInt, BigInt) {
    let q = params.big_q() as usize;
    let a = x.numer();
    let b = x.denom();
    let bq1 = num_traits::pow(b.clone(), q - 1);
    let n = num_traits::pow(a.clone(), q) - a * &bq1;
    let d = bq1 * b;
    (n, d)
}

/// `γ(x)` in a number field, or `None` at a pole.
pub fn gamma_eval_nf(params: &KochenParams, x: &NfElem) -> Option<NfElem> {
    let l = x.field();
    let y = x.pow(params.big_q()).sub(x);
    let den = y.mul(&y).sub(&l.one());
    let base = y.div(&den)?;
    Some(base.pow(params.e() as u64).scale(&params.t().inv().unwrap()))
}

/// `γ` as a rational function in one variable with coprime parts.
pub fn gamma_ratfunc(params: &KochenParams) -> RatFunc {
    let x = MPoly::var(1, 0);
    let y = &x.pow(params.big_q() as u32) - &x;
    let e = params.e();
    let num = y.pow(e);
    let den = (&(&y * &y) - &MPoly::one(1)).pow(e).scale(&params.t());
    RatFunc::new(num, den).expect("y and y^2 - 1 are coprime")
}

/// Rational poles of `γ`: rational roots of `(X^Q − X)² − 1`, which is
/// monic with integer coefficients, so only `±1` can occur.
pub fn rational_poles(params: &KochenParams) -> Vec<Rat> {
    [Rat::one(), -Rat::one()]
        .into_iter()
        .filter(|x| gamma_eval(params, x).is_none())
        .collect()
}

/// Which line of the valuation table applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum GammaCase {
    /// `v(x) < 0`: `−e·Q·v(x) − v(t)`.
    NegVal,
    /// `v(x) > 0`: `e·v(x) − v(t)`.
    PosVal,
    /// `v(x) = 0`, `v(x^Q − x) > 0`: `e·v(x^Q − x) − v(t)`.
    ResRootPos,
    /// `v(x) = 0`, `v(x^Q − x) = 0`: `−e·v((x^Q − x)² − 1) − v(t)`.
    ResUnit,
    /// `x` is a pole.
    Pole,
    /// `x = 0`, where `γ(0) = 0`.
    Zero,
}

impl fmt::Display for GammaCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Valuation data at one prime, as consumed by [`gamma_valuation_predict`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ValuationData {
    pub v_x: ExtInt,
    pub v_t: i64,
    /// `v(x^Q − x)`, required when `v(x) = 0`.
    pub v_root: Option<ExtInt>,
    /// `v((x^Q − x)² − 1)`, required when additionally `v(x^Q − x) = 0`.
    pub v_unit: Option<ExtInt>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Prediction {
    pub case: GammaCase,
    /// `None` at a pole.
    pub valuation: Option<ExtInt>,
}

/// The valuation of `γ(x)` from valuations alone.
///
/// Both auxiliary valuations are accepted because the two residue cases
/// need different ones; a value that contradicts `v(x)` is rejected.
pub fn gamma_valuation_predict(params: &KochenParams, d: &ValuationData) -> Result<Prediction> {
    if d.v_t < 1 {
        return Err(Error::input("v(t) must be a positive integer"));
    }
    let e = params.e() as i64;
    let q = params.big_q() as i64;
    let vt = d.v_t;
    let inconsistent = |what: &str| Err(Error::input(format!("inconsistent case data: {what}")));
    let pred = |case, v: ExtInt| {
        Ok(Prediction {
            case,
            valuation: Some(v),
        })
    };
    match d.v_x {
        ExtInt::Inf => pred(GammaCase::Zero, ExtInt::Inf),
        ExtInt::Fin(vx) if vx < 0 => {
            if d.v_root.is_some_and(|r| r != vx * q) {
                return inconsistent("v(x^Q − x) must equal Q·v(x) when v(x) < 0");
            }
            if d.v_unit.is_some_and(|u| u != 2 * vx * q) {
                return inconsistent("v((x^Q − x)² − 1) must equal 2Q·v(x) when v(x) < 0");
            }
            pred(GammaCase::NegVal, ExtInt::Fin(-e * q * vx - vt))
        }
        ExtInt::Fin(vx) if vx > 0 => {
            if d.v_root.is_some_and(|r| r != vx) {
                return inconsistent("v(x^Q − x) must equal v(x) when v(x) > 0");
            }
            if d.v_unit.is_some_and(|u| u != 0) {
                return inconsistent("(x^Q − x)² − 1 must be a unit when v(x) > 0");
            }
            pred(GammaCase::PosVal, ExtInt::Fin(e * vx - vt))
        }
        ExtInt::Fin(_) => {
            let root = match d.v_root {
                Some(r) => r,
                None => return inconsistent("v(x) = 0 requires v(x^Q − x)"),
            };
            if root < 0 {
                return inconsistent("v(x^Q − x) < 0 with v(x) = 0");
            }
            if root > 0 {
                if d.v_unit.is_some_and(|u| u != 0) {
                    return inconsistent("(x^Q − x)² − 1 must be a unit when v(x^Q − x) > 0");
                }
                return pred(GammaCase::ResRootPos, root.scale(e) - vt);
            }
            match d.v_unit {
                None => inconsistent("v(x^Q − x) = 0 requires v((x^Q − x)² − 1)"),
                Some(u) if u < 0 => inconsistent("v((x^Q − x)² − 1) < 0 with v(x) = 0"),
                Some(ExtInt::Inf) => Ok(Prediction {
                    case: GammaCase::Pole,
                    valuation: None,
                }),
                Some(ExtInt::Fin(u)) => pred(GammaCase::ResUnit, ExtInt::Fin(-e * u - vt)),
            }
        }
    }
}

/// Valuation data of a rational `x` at `p`, computed from `N` and `D`.
pub fn rational_valuation_data(params: &KochenParams, x: &Rat) -> ValuationData {
    let p = params.p;
    let v_x = val_p_unchecked(x, p);
    if x.is_zero() {
        return ValuationData {
            v_x,
            v_t: 1,
            v_root: None,
            v_unit: None,
        };
    }
    let (n, d) = root_parts(params, x);
    let vd = int_valuation(&d, p) as i64;
    let v_root = if n.is_zero() {
        ExtInt::Inf
    } else {
        ExtInt::Fin(int_valuation(&n, p) as i64 - vd)
    };
    let m = &n * &n - &d * &d;
    let v_unit = if m.is_zero() {
        ExtInt::Inf
    } else {
        ExtInt::Fin(int_valuation(&m, p) as i64 - 2 * vd)
    };
    ValuationData {
        v_x,
        v_t: 1,
        v_root: Some(v_root),
        v_unit: Some(v_unit),
    }
}

/// Case and predicted valuation of `γ(x)` for rational `x`.
pub fn gamma_case_rational(params: &KochenParams, x: &Rat) -> Prediction {
    let mut d = rational_valuation_data(params, x);
    // Drop data the table does not use so consistency checks stay meaningful.
    if d.v_x != 0 {
        d.v_root = None;
        d.v_unit = None;
    } else if d.v_root.is_some_and(|r| r > 0) {
        d.v_unit = None;
    }
    gamma_valuation_predict(params, &d).expect("data computed from x is consistent")
}

fn ensure_above_p(params: &KochenParams, prime: &NumberFieldPrime) -> Result<()> {
    if prime.p != params.p {
        return Err(Error::precondition(format!(
            "the prime lies above {} rather than p = {}",
            prime.p, params.p
        )));
    }
    Ok(())
}

/// Valuation data of a number-field element at a prime above `p`.
pub fn valuation_data_at(params: &KochenParams, x: &NfElem, prime: &NumberFieldPrime) -> Result<ValuationData> {
    ensure_above_p(params, prime)?;
    let y = x.pow(params.big_q()).sub(x);
    let u = y.mul(&y).sub(&x.field().one());
    Ok(ValuationData {
        v_x: prime.val(x),
        v_t: prime.e as i64,
        v_root: Some(prime.val(&y)),
        v_unit: Some(prime.val(&u)),
    })
}

/// Case table prediction at a number-field prime.
pub fn gamma_case_at(params: &KochenParams, x: &NfElem, prime: &NumberFieldPrime) -> Result<Prediction> {
    let mut d = valuation_data_at(params, x, prime)?;
    if d.v_x != 0 {
        d.v_root = None;
        d.v_unit = None;
    } else if d.v_root.is_some_and(|r| r > 0) {
        d.v_unit = None;
    }
    gamma_valuation_predict(params, &d)
}

/// Which hypothesis of the negativity criterion was used.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SmallClause {
    /// `0 < (e+1)·v(x) ≤ v(t)`.
    SmallPositive,
    /// `v(x) = 0` and the residue generates a subfield of degree not dividing `f`.
    ResidueOutside,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SmallCertificate {
    pub clause: SmallClause,
    pub v_gamma: ExtInt,
    pub v_t: i64,
    pub holds: bool,
}

/// Checks `v_P(γ(x)) ≤ −v_P(t)/(e+1)` under either hypothesis.
pub fn gamma_small_certificate(
    params: &KochenParams,
    x: &NfElem,
    prime: &NumberFieldPrime,
) -> Result<SmallCertificate> {
    ensure_above_p(params, prime)?;
    let e = params.e() as i64;
    let vt = prime.e as i64;
    let gx = gamma_eval_nf(params, x)
        .ok_or_else(|| Error::precondition("x is a pole of the Kochen operator"))?;
    let vx = prime.val(x);
    let clause = match vx {
        ExtInt::Fin(v) if v > 0 && (e + 1) * v <= vt => SmallClause::SmallPositive,
        ExtInt::Fin(0) => {
            let r = residue_at_prime(prime, x)?;
            let d = residue_degree(&r, prime.residue_poly(), params.p);
            if params.tau.f.is_multiple_of(d) {
                return Err(Error::precondition(format!(
                    "clause (ii) fails: residue degree {d} divides f = {}",
                    params.tau.f
                )));
            }
            SmallClause::ResidueOutside
        }
        _ => {
            return Err(Error::precondition(format!(
                "clause (i) fails: need 0 < (e+1)·v(x) ≤ v(t) but v(x) = {vx}, v(t) = {vt}; \
                 clause (ii) needs v(x) = 0"
            )))
        }
    };
    let vg = prime.val(&gx);
    // (e+1)·v(γ) ≤ −v(t), compared exactly in integers.
    let holds = match vg {
        ExtInt::Fin(v) => (e + 1) * v <= -vt,
        ExtInt::Inf => false,
    };
    if !holds {
        return Err(Error::invariant(format!(
            "v(γ(x)) = {vg} exceeds −v(t)/(e+1) with v(t) = {vt}"
        )));
    }
    Ok(SmallCertificate {
        clause,
        v_gamma: vg,
        v_t: vt,
        holds,
    })
}

/// If `v(γ(x)) < 0` and `v(x − y) ≥ v(t)`, then `y` is not a pole and
/// `v(γ(y)) < 0`; checked by direct evaluation.
pub fn gamma_perturbation_check(
    params: &KochenParams,
    x: &NfElem,
    y: &NfElem,
    prime: &NumberFieldPrime,
) -> Result<bool> {
    ensure_above_p(params, prime)?;
    let vt = prime.e as i64;
    let gx = gamma_eval_nf(params, x)
        .ok_or_else(|| Error::precondition("x is a pole of the Kochen operator"))?;
    let vgx = prime.val(&gx);
    if vgx >= 0 {
        return Err(Error::precondition(format!("v(γ(x)) = {vgx} is not negative")));
    }
    let vd = prime.val(&x.sub(y));
    if vd < vt {
        return Err(Error::precondition(format!("v(x − y) = {vd} is below v(t) = {vt}")));
    }
    let gy = gamma_eval_nf(params, y)
        .ok_or_else(|| Error::invariant("y is a pole although x is not"))?;
    let vgy = prime.val(&gy);
    if vgy >= 0 {
        return Err(Error::invariant(format!("v(γ(y)) = {vgy} is not negative")));
    }
    Ok(true)
}

/// `ρ(X) = X/(X^Q − X + 1)` over Q.
pub fn rho_eval(params: &KochenParams, x: &Rat) -> Option<Rat> {
    let q = params.big_q() as u32;
    let den = x.pow(q) - x + Rat::one();
    den.inv().map(|d| x * &d)
}

pub fn rho_eval_nf(params: &KochenParams, x: &NfElem) -> Option<NfElem> {
    let den = x.pow(params.big_q()).sub(x).add(&x.field().one());
    x.div(&den)
}

/// At a prime of type at most `τ`: `ρ(x)` is a unit with the residue of
/// `x` when `x` is a unit, and has positive valuation otherwise.
pub fn rho_check(params: &KochenParams, x: &NfElem, prime: &NumberFieldPrime) -> Result<bool> {
    ensure_above_p(params, prime)?;
    if !prime.tau().le(&params.tau) {
        return Err(Error::precondition(format!(
            "prime of type {} is not of type at most {}",
            prime.tau(),
            params.tau
        )));
    }
    let r = rho_eval_nf(params, x)
        .ok_or_else(|| Error::invariant("ρ has a pole at a prime of admissible type"))?;
    let vx = prime.val(x);
    let vr = prime.val(&r);
    if vx == 0 {
        if vr != 0 {
            return Err(Error::invariant(format!("v(ρ(x)) = {vr} for a unit x")));
        }
        if residue_at_prime(prime, &r)? != residue_at_prime(prime, x)? {
            return Err(Error::invariant("ρ changed the residue of a unit"));
        }
    } else if vr <= 0 {
        return Err(Error::invariant(format!("v(ρ(x)) = {vr} with v(x) = {vx}")));
    }
    Ok(true)
}

/// `ω(X) = (β + β⁻¹)⁻¹` with `β = t^{−k}X^ℓ`, `ℓ = 1 + k·e` prime and `ℓ > e′`.
#[derive(Clone, Debug)]
pub struct Omega {
    pub params: KochenParams,
    pub tau_prime: Tau,
    pub k: u64,
    pub ell: u64,
    pub beta: RatFunc,
    pub omega: RatFunc,
}

impl Omega {
    pub fn eval(&self, x: &Rat) -> Option<Rat> {
        self.omega.eval(std::slice::from_ref(x))
    }

    pub fn eval_nf(&self, x: &NfElem) -> Option<NfElem> {
        let l = x.field();
        let tk = self.params.t().pow(self.k as u32);
        let xl = x.pow(self.ell);
        let den = xl.mul(&xl).add(&l.from_rat(&tk.pow(2)));
        xl.scale(&tk).div(&den)
    }
}

pub fn omega_construct(params: &KochenParams, tau_prime: Tau, bound: u64) -> Result<Omega> {
    if !params.tau.le(&tau_prime) {
        return Err(Error::input(format!(
            "τ = {} is not at most τ′ = {tau_prime}",
            params.tau
        )));
    }
    let e = params.e() as u64;
    let ell = dirichlet_prime(1, e, |l| l > tau_prime.e as u64, bound)?.ok_or_else(|| {
        Error::not_found(format!("no prime ℓ ≡ 1 mod {e} with ℓ > {} below {bound}", tau_prime.e))
    })?;
    let k = (ell - 1) / e;
    let x = MPoly::var(1, 0);
    let tk = params.t().pow(k as u32);
    let xl = x.pow(ell as u32);
    let beta = RatFunc::new(xl.clone(), MPoly::constant(1, tk.clone()))?;
    let omega = RatFunc::new(
        xl.scale(&tk),
        &(&xl * &xl) + &MPoly::constant(1, tk.pow(2)),
    )?;
    Ok(Omega {
        params: *params,
        tau_prime,
        k,
        ell,
        beta,
        omega,
    })
}

/// `v(ω(x)) > 0` at primes of type at most `τ′`, and `= 1` when `v(x) = 1`
/// at a prime of exact type `τ`.
pub fn omega_check(omega: &Omega, x: &NfElem, prime: &NumberFieldPrime) -> Result<bool> {
    ensure_above_p(&omega.params, prime)?;
    if !prime.tau().le(&omega.tau_prime) {
        return Err(Error::precondition("prime is not of type at most τ′"));
    }
    let w = omega
        .eval_nf(x)
        .ok_or_else(|| Error::precondition("x is a pole of ω"))?;
    let vw = prime.val(&w);
    if vw <= 0 {
        return Err(Error::invariant(format!("v(ω(x)) = {vw} is not positive")));
    }
    if prime.val(x) == 1 && prime.tau() == omega.params.tau && vw != 1 {
        return Err(Error::invariant(format!(
            "v(ω(x)) = {vw} at a uniformizer of exact type τ"
        )));
    }
    Ok(true)
}

/// The unique prime of Q above `p`, as a number-field prime of `Q[T]/(T)`.
pub fn rational_prime(p: u64) -> Result<NumberFieldPrime> {
    let q = NumberField::rationals();
    let mut ps = crate::numberfield::primes_above(&q, p)?;
    Ok(ps.remove(0))
}
