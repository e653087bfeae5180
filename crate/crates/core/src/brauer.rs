//! Quaternion algebras over Q: local Hilbert symbols, ramification, Hasse
//! invariant ledgers, reduced norm and trace, and the trace-difference sets
//! `T_A` with their diophantine compilation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::AtomicU64;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Serialize, Serializer};

use crate::arith::mpoly::MPoly;
use crate::arith::primes::{legendre, prime_divisors, primes_up_to, require_prime};
use crate::arith::rat::{int_valuation, rationals_up_to_height, Rat};
use crate::arith::ratfunc::RatFunc;
use crate::arith::valuation::val_p_unchecked;
use crate::dioph::{DiophFamily, QOps, Solver};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::kochen::{gamma_ratfunc, KochenParams};

/// Trial-division limit when factoring symbol entries.
pub const FACTOR_LIMIT: u64 = 1_000_000;

/// Largest auxiliary prime used by [`construct_ab`] and class realization.
pub const AUX_PRIME_BOUND: u64 = 50;

/// A place of Q.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Place {
    Finite(u64),
    Real,
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Finite(p) => write!(f, "{p}"),
            Place::Real => write!(f, "real"),
        }
    }
}

impl FromStr for Place {
    type Err = Error;
    fn from_str(s: &str) -> Result<Place> {
        match s.trim() {
            "real" | "inf" | "oo" => Ok(Place::Real),
            t => {
                let p: u64 = t.parse().map_err(|_| Error::input(format!("bad place '{t}'")))?;
                require_prime(p)?;
                Ok(Place::Finite(p))
            }
        }
    }
}

impl Serialize for Place {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Place::Finite(p) => s.serialize_u64(*p),
            Place::Real => s.serialize_str("real"),
        }
    }
}

/// Integer in the square class of a nonzero rational: `n/d ↦ n·d`.
fn square_class(x: &Rat) -> BigInt {
    x.numer() * x.denom()
}

/// `(−1)^{(u−1)/2}` exponent for an odd integer.
fn eps(u: &BigInt) -> u32 {
    let r = u.mod_floor(&BigInt::from(8)).to_u32().unwrap();
    ((r - 1) / 2) % 2
}

/// `(−1)^{(u²−1)/8}` exponent for an odd integer.
fn omega(u: &BigInt) -> u32 {
    let r = u.mod_floor(&BigInt::from(8)).to_u32().unwrap();
    ((r * r - 1) / 8) % 2
}

fn split_off(n: &BigInt, p: u64) -> (u64, BigInt) {
    let v = int_valuation(n, p);
    let u = n / BigInt::from(p).pow(v as u32);
    (v, u)
}

/// The Hilbert symbol `(a, b)_v`: `+1` iff the quaternion algebra `(a, b)`
/// splits over `Q_v`.
pub fn hilbert_symbol(a: &Rat, b: &Rat, v: Place) -> Result<i32> {
    if a.is_zero() || b.is_zero() {
        return Err(Error::input("Hilbert symbol entries must be nonzero"));
    }
    let (a, b) = (square_class(a), square_class(b));
    let p = match v {
        Place::Real => {
            return Ok(if a.is_negative() && b.is_negative() { -1 } else { 1 });
        }
        Place::Finite(p) => {
            require_prime(p)?;
            p
        }
    };
    let (al, u) = split_off(&a, p);
    let (be, w) = split_off(&b, p);
    let odd = if p == 2 {
        eps(&u) * eps(&w) + (al as u32 % 2) * omega(&w) + (be as u32 % 2) * omega(&u)
    } else {
        let pb = BigInt::from(p);
        let mut e = ((al * be) % 2) as u32 * eps(&pb);
        if be % 2 == 1 && legendre(&u, p) == -1 {
            e += 1;
        }
        if al % 2 == 1 && legendre(&w, p) == -1 {
            e += 1;
        }
        e
    };
    Ok(if odd % 2 == 0 { 1 } else { -1 })
}

/// Places where a symbol can be `−1`: the real place, 2, and the primes
/// dividing `a` or `b`.
fn relevant_places(a: &Rat, b: &Rat) -> Result<Vec<Place>> {
    let mut primes = BTreeSet::from([2u64]);
    for x in [a, b] {
        for n in [x.numer(), x.denom()] {
            primes.extend(prime_divisors(n, FACTOR_LIMIT)?);
        }
    }
    let mut out: Vec<Place> = primes.into_iter().map(Place::Finite).collect();
    out.push(Place::Real);
    Ok(out)
}

/// The quaternion algebra `(a, b)` with `i² = a`, `j² = b`, `k = ij = −ji`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuaternionAlgebra {
    pub a: Rat,
    pub b: Rat,
}

/// A quaternion `x0 + x1·i + x2·j + x3·k`.
pub type Quat = [Rat; 4];

impl QuaternionAlgebra {
    pub fn new(a: Rat, b: Rat) -> Result<Self> {
        if a.is_zero() || b.is_zero() {
            return Err(Error::input("quaternion algebra parameters must be nonzero"));
        }
        Ok(QuaternionAlgebra { a, b })
    }

    pub fn from_ints(a: i64, b: i64) -> Result<Self> {
        Self::new(Rat::from(a), Rat::from(b))
    }

    pub fn nrd(&self, x: &Quat) -> Rat {
        let ab = &self.a * &self.b;
        &(&(&x[0] * &x[0]) - &(&self.a * &(&x[1] * &x[1]))) - &(&(&self.b * &(&x[2] * &x[2])) - &(&ab * &(&x[3] * &x[3])))
    }

    pub fn trd(&self, x: &Quat) -> Rat {
        &x[0] + &x[0]
    }

    pub fn mul(&self, x: &Quat, y: &Quat) -> Quat {
        let (a, b) = (&self.a, &self.b);
        let ab = a * b;
        let c0 = &(&(&x[0] * &y[0]) + &(a * &(&x[1] * &y[1]))) + &(&(b * &(&x[2] * &y[2])) - &(&ab * &(&x[3] * &y[3])));
        let c1 = &(&(&x[0] * &y[1]) + &(&x[1] * &y[0])) + &(b * &(&(&x[3] * &y[2]) - &(&x[2] * &y[3])));
        let c2 = &(&(&x[0] * &y[2]) + &(&x[2] * &y[0])) + &(a * &(&(&x[1] * &y[3]) - &(&x[3] * &y[1])));
        let c3 = &(&(&x[0] * &y[3]) + &(&x[3] * &y[0])) + &(&(&x[1] * &y[2]) - &(&x[2] * &y[1]));
        [c0, c1, c2, c3]
    }

    /// All places where the algebra does not split.
    pub fn ramification_set(&self) -> Result<BTreeSet<Place>> {
        let mut out = BTreeSet::new();
        for v in relevant_places(&self.a, &self.b)? {
            if hilbert_symbol(&self.a, &self.b, v)? == -1 {
                out.insert(v);
            }
        }
        if out.len() % 2 == 1 {
            return Err(Error::invariant(format!(
                "({}, {}) ramifies at an odd number of places",
                self.a, self.b
            )));
        }
        Ok(out)
    }

    /// Ramified finite primes.
    pub fn ramified_primes(&self) -> Result<Vec<u64>> {
        Ok(self
            .ramification_set()?
            .into_iter()
            .filter_map(|v| match v {
                Place::Finite(p) => Some(p),
                Place::Real => None,
            })
            .collect())
    }

    /// Polynomial `nrd(X) − 1` in four variables starting at `offset`.
    fn norm_one_poly(&self, arity: usize, offset: usize) -> MPoly {
        let x = |i: usize| MPoly::var(arity, offset + i);
        let ab = &self.a * &self.b;
        let f = &(&x(0) * &x(0)) - &(&x(1) * &x(1)).scale(&self.a);
        let f = &f - &(&x(2) * &x(2)).scale(&self.b);
        let f = &f + &(&x(3) * &x(3)).scale(&ab);
        &f - &MPoly::one(arity)
    }
}

/// Signed squarefree products of at most two primes from `pool`, by size.
fn candidates(pool: &[u64]) -> Vec<BigInt> {
    let mut mags = vec![BigInt::one()];
    for (i, &p) in pool.iter().enumerate() {
        mags.push(BigInt::from(p));
        for &q in &pool[i + 1..] {
            mags.push(BigInt::from(p) * BigInt::from(q));
        }
    }
    mags.sort();
    mags.dedup();
    mags.into_iter().flat_map(|m| [-m.clone(), m]).collect()
}

/// A quaternion algebra with exactly the given ramification, searched over
/// parameters built from `pool`.
pub fn quaternion_with_ramification(target: &BTreeSet<Place>, pool: &[u64]) -> Result<QuaternionAlgebra> {
    if target.len() % 2 == 1 {
        return Err(Error::input("a quaternion algebra ramifies at an even number of places"));
    }
    let cands = candidates(pool);
    // Walk pairs in order of the larger index so small parameters come first.
    for j in 0..cands.len() {
        for i in 0..=j {
            let alg = QuaternionAlgebra {
                a: Rat::from_bigint(cands[i].clone()),
                b: Rat::from_bigint(cands[j].clone()),
            };
            if &alg.ramification_set()? == target {
                return Ok(alg);
            }
        }
    }
    Err(Error::not_found(format!(
        "no algebra over primes {pool:?} ramifies exactly at {{{}}}",
        target.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
    )))
}

fn search_pool(extra: &[u64], bound: u64) -> Vec<u64> {
    let mut pool: BTreeSet<u64> = primes_up_to(bound).into_iter().collect();
    pool.extend(extra);
    pool.into_iter().collect()
}

/// Two algebras split at the real place, with `A` ramified exactly at
/// `{p, q1}` and `B` exactly at `{p, q2}`.
pub fn construct_ab(p: u64, q1: u64, q2: u64) -> Result<(QuaternionAlgebra, QuaternionAlgebra)> {
    construct_ab_bounded(p, q1, q2, AUX_PRIME_BOUND)
}

pub fn construct_ab_bounded(p: u64, q1: u64, q2: u64, bound: u64) -> Result<(QuaternionAlgebra, QuaternionAlgebra)> {
    for x in [p, q1, q2] {
        require_prime(x)?;
    }
    if p == q1 || p == q2 || q1 == q2 {
        return Err(Error::input(format!("primes {p}, {q1}, {q2} must be distinct")));
    }
    let pool = search_pool(&[p, q1, q2], bound);
    let a = quaternion_with_ramification(&BTreeSet::from([Place::Finite(p), Place::Finite(q1)]), &pool)?;
    let b = quaternion_with_ramification(&BTreeSet::from([Place::Finite(p), Place::Finite(q2)]), &pool)?;
    Ok((a, b))
}

/// A Brauer class of Q given by its local invariants in `Q/Z`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BrauerClass {
    pub ell: u64,
    /// Nonzero invariants, reduced into `[0, 1)`.
    pub invariants: BTreeMap<Place, Rat>,
    /// A quaternion algebra in the class, for `ℓ = 2`.
    pub algebra: Option<QuaternionAlgebra>,
}

impl Serialize for BrauerClass {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry<'a> {
            place: Place,
            invariant: &'a Rat,
        }
        #[derive(Serialize)]
        struct Repr<'a> {
            ell: u64,
            invariants: Vec<Entry<'a>>,
            algebra: &'a Option<QuaternionAlgebra>,
        }
        Repr {
            ell: self.ell,
            invariants: self
                .invariants
                .iter()
                .map(|(&place, invariant)| Entry { place, invariant })
                .collect(),
            algebra: &self.algebra,
        }
        .serialize(s)
    }
}

fn frac_part(x: &Rat) -> Rat {
    let fl = x.numer().div_floor(x.denom());
    x - &Rat::from_bigint(fl)
}

/// Validates a local-invariant ledger and, for `ℓ = 2`, realizes it.
pub fn brauer_class_prescribe(ell: u64, assignments: &BTreeMap<Place, Rat>) -> Result<BrauerClass> {
    require_prime(ell)?;
    let mut invariants = BTreeMap::new();
    let mut total = Rat::zero();
    for (&v, x) in assignments {
        let x = frac_part(x);
        let scaled = &x * &Rat::from(ell);
        if !scaled.is_integer() {
            return Err(Error::input(format!("invariant {x} at {v} has denominator not dividing {ell}")));
        }
        if v == Place::Real && !(x.is_zero() || x == Rat::frac(1, 2)) {
            return Err(Error::input(format!("real invariant must be 0 or 1/2, got {x}")));
        }
        if let Place::Finite(p) = v {
            require_prime(p)?;
        }
        total += &x;
        if !x.is_zero() {
            invariants.insert(v, x);
        }
    }
    if !frac_part(&total).is_zero() {
        return Err(Error::precondition(format!(
            "reciprocity fails: invariants sum to {total}, not 0 in Q/Z"
        )));
    }
    let algebra = if ell == 2 {
        let support: BTreeSet<Place> = invariants.keys().copied().collect();
        let extra: Vec<u64> = support
            .iter()
            .filter_map(|v| match v {
                Place::Finite(p) => Some(*p),
                Place::Real => None,
            })
            .collect();
        Some(quaternion_with_ramification(&support, &search_pool(&extra, AUX_PRIME_BOUND))?)
    } else {
        None
    };
    Ok(BrauerClass { ell, invariants, algebra })
}

/// Norm-one quaternions of coordinate height at most `h`.
pub fn norm_one_elements(alg: &QuaternionAlgebra, h: u64, exec: Exec) -> Vec<Quat> {
    let rats = rationals_up_to_height(h);
    let hb = BigInt::from(h);
    let ab = &alg.a * &alg.b;
    let shells = exec.map(&rats, |x0| {
        let mut out = Vec::new();
        let c = &(x0 * x0) - &Rat::one();
        for x1 in &rats {
            let base = &(&alg.a * &(x1 * x1)) - &c;
            for x2 in &rats {
                let sq = &(&base + &(&alg.b * &(x2 * x2))) / &ab;
                let Some(r) = sq.sqrt_exact() else { continue };
                if r.height() > hb {
                    continue;
                }
                out.push([x0.clone(), x1.clone(), x2.clone(), r.clone()]);
                if !r.is_zero() {
                    out.push([x0.clone(), x1.clone(), x2.clone(), -r]);
                }
            }
        }
        out
    });
    shells.into_iter().flatten().collect()
}

/// Sampled elements of `T_A`.
#[derive(Clone, Debug, Serialize)]
pub struct TSample {
    pub algebra: QuaternionAlgebra,
    pub height: u64,
    pub norm_one_count: usize,
    pub ramified_primes: Vec<u64>,
    pub traces: Vec<Rat>,
    pub differences: Vec<Rat>,
}

/// Pairwise differences of traces of norm-one quaternions of height at most
/// `h`, each checked to be integral at every ramified finite prime.
pub fn sample_t(alg: &QuaternionAlgebra, h: u64, exec: Exec) -> Result<TSample> {
    if h == 0 {
        return Err(Error::input("height bound must be at least 1"));
    }
    let ramified = alg.ramified_primes()?;
    let elems = norm_one_elements(alg, h, exec);
    let traces: Vec<Rat> = elems
        .iter()
        .map(|x| alg.trd(x))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let rows = exec.map(&traces, |s| traces.iter().map(|r| s - r).collect::<Vec<_>>());
    let differences: Vec<Rat> = rows.into_iter().flatten().collect::<BTreeSet<_>>().into_iter().collect();
    for z in &differences {
        for &q in &ramified {
            if neg_val(z, q) {
                return Err(Error::invariant(format!(
                    "trace difference {z} is not integral at the ramified prime {q}"
                )));
            }
        }
    }
    Ok(TSample {
        algebra: alg.clone(),
        height: h,
        norm_one_count: elems.len(),
        ramified_primes: ramified,
        traces,
        differences,
    })
}

/// A norm-one quaternion with trace `s`, searching the `i` and `j`
/// coordinates up to height `h`.
pub fn norm_one_with_trace(alg: &QuaternionAlgebra, s: &Rat, h: u64) -> Option<Quat> {
    let x0 = s / &Rat::from(2);
    let c = &(&x0 * &x0) - &Rat::one();
    if c.is_zero() {
        return Some([x0, Rat::zero(), Rat::zero(), Rat::zero()]);
    }
    let ab = &alg.a * &alg.b;
    let rats = rationals_up_to_height(h);
    for x1 in &rats {
        let base = &(&alg.a * &(x1 * x1)) - &c;
        for x2 in &rats {
            let sq = &(&base + &(&alg.b * &(x2 * x2))) / &ab;
            if let Some(r) = sq.sqrt_exact() {
                let q = [x0.clone(), x1.clone(), x2.clone(), r];
                debug_assert!(alg.nrd(&q).is_one());
                return Some(q);
            }
        }
    }
    None
}

/// Two norm-one quaternions whose traces differ by `z`.
pub fn t_witness(alg: &QuaternionAlgebra, z: &Rat, h: u64) -> Option<(Quat, Quat)> {
    if z.is_zero() {
        let one = [Rat::one(), Rat::zero(), Rat::zero(), Rat::zero()];
        return Some((one.clone(), one));
    }
    // Offsets: traces of small norm-one elements, the identity first.
    let mut offsets = vec![[Rat::one(), Rat::zero(), Rat::zero(), Rat::zero()]];
    offsets.extend(norm_one_elements(alg, 3, Exec::Sequential));
    let mut seen = BTreeSet::new();
    for y in offsets {
        let s2 = alg.trd(&y);
        if !seen.insert(s2.clone()) {
            continue;
        }
        if let Some(x) = norm_one_with_trace(alg, &(z + &s2), h) {
            return Some((x, y));
        }
    }
    None
}

/// `S_A`: free `s`, auxiliaries the four coordinates of a norm-one
/// quaternion of trace `s`.
fn s_family(alg: &QuaternionAlgebra) -> DiophFamily {
    let arity = 5;
    let polys = vec![
        &MPoly::var(arity, 0) - &MPoly::var(arity, 1).scale(&Rat::from(2)),
        alg.norm_one_poly(arity, 1),
    ];
    let names = (0..4).map(|i| format!("q{i}")).collect();
    DiophFamily::with_names(1, 4, polys, names).expect("well-formed norm family")
}

/// `T_A = S_A − S_A` as a one-dimensional family.
pub fn compile_t_family(alg: &QuaternionAlgebra) -> Result<DiophFamily> {
    let s = s_family(alg);
    let f = RatFunc::new(&MPoly::var(2, 0) - &MPoly::var(2, 1), MPoly::one(2))?;
    s.product(&s).rational_image(&[f])
}

/// The five-fold family `T_A × T_B × T_A × T_B × γ` pushed through
/// `(X1 + X2)/(1 + t·X5^{e+1}·(X3 + X4))`.
#[derive(Clone, Debug, Serialize)]
pub struct DFamily {
    pub params: KochenParams,
    pub a: QuaternionAlgebra,
    pub b: QuaternionAlgebra,
    pub family: DiophFamily,
    /// Auxiliary indices of the eight quaternions' coordinates, in order.
    #[serde(skip)]
    quat_vars: Vec<usize>,
    #[serde(skip)]
    arg_var: usize,
}

/// Verdict for `x ∈ D(Q)`.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "verdict")]
pub enum DMembership {
    /// A verified point of the compiled family over `x`.
    Member {
        x1: Rat,
        x2: Rat,
        assignment: Vec<Rat>,
    },
    /// `D(Q_p)` lies in `Z_p`, so a negative valuation excludes `x`.
    NonMember { p: u64, valuation: i64 },
    /// No witness within the search height.
    Unknown { height: u64 },
}

pub fn compile_d_family(params: &KochenParams, a: &QuaternionAlgebra, b: &QuaternionAlgebra) -> Result<DFamily> {
    if params.tau.e != 1 || params.tau.f != 1 {
        return Err(Error::unsupported(format!(
            "quaternion algebras have degree 2, which needs 2 > e·f; τ = ({}, {}) violates it",
            params.tau.e, params.tau.f
        )));
    }
    let ta = compile_t_family(a)?;
    let tb = compile_t_family(b)?;
    let gam = DiophFamily::full(1).rational_image(&[gamma_ratfunc(params)])?;
    let prod = ta.product(&tb).product(&ta).product(&tb).product(&gam);
    let x = |i| MPoly::var(5, i);
    let e = params.e() + 1;
    let num = &x(0) + &x(1);
    let den = &MPoly::one(5) + &(&x(4).pow(e) * &(&x(2) + &x(3))).scale(&params.t());
    let mut family = prod.rational_image(&[RatFunc::new(num, den)?])?;
    // The γ factor's argument is the only auxiliary of the full family it images.
    let mut arg_var = None;
    let mut quat_vars = Vec::new();
    let mut pre = 0;
    for (i, name) in family.aux_names.iter_mut().enumerate() {
        if name.starts_with('q') {
            quat_vars.push(family.n + i);
        } else if name == "pre" {
            pre += 1;
            if pre == 5 + 8 + 1 {
                *name = "arg".into();
                arg_var = Some(family.n + i);
            }
        }
    }
    debug_assert_eq!(quat_vars.len(), 32);
    Ok(DFamily {
        params: *params,
        a: a.clone(),
        b: b.clone(),
        family,
        quat_vars,
        arg_var: arg_var.ok_or_else(|| Error::invariant("γ argument not found in the D family layout"))?,
    })
}

fn neg_val(x: &Rat, q: u64) -> bool {
    val_p_unchecked(x, q).finite().is_some_and(|k| k < 0)
}

/// Splits `x` as `x1 + x2` with `x1` integral at `ra` and `x2` integral at
/// `rb`, given that `x` is integral at their common primes.
fn split_integral(x: &Rat, ra: &[u64]) -> (Rat, Rat) {
    let d = x.denom().clone();
    let mut u = BigInt::one();
    for &q in ra {
        let k = int_valuation(&d, q);
        u *= BigInt::from(q).pow(k as u32);
    }
    let v = &d / &u;
    // n/d = a/v + b/u  ⇔  n = a·u + b·v.
    let g = u.extended_gcd(&v);
    debug_assert!(g.gcd.is_one());
    let n = x.numer();
    let a = n * &g.x;
    let b = n * &g.y;
    (Rat::from_big_ratio(a, v), Rat::from_big_ratio(b, u))
}

impl DFamily {
    /// Completes a witness (x, eight quaternions, γ argument) to a full
    /// assignment by propagation and checks it.
    pub fn lift(&self, x: &Rat, quats: &[Quat; 8], arg: &Rat) -> Result<Option<Vec<Rat>>> {
        let d = &self.family;
        let solver = Solver::new(&QOps, d.arity(), &d.polys)?;
        let mut start = vec![None; d.arity()];
        start[0] = Some(x.clone());
        for (slot, c) in self.quat_vars.iter().zip(quats.iter().flatten()) {
            start[*slot] = Some(c.clone());
        }
        start[self.arg_var] = Some(arg.clone());
        let nodes = AtomicU64::new(0);
        let sol = solver.solve(start, &|_| 0, &|_| Vec::new(), &nodes, 1)?;
        Ok(sol.filter(|s| d.satisfied_by(s)))
    }

    /// Membership of a rational in `D(Q)`.
    pub fn member(&self, x: &Rat, height: u64) -> Result<DMembership> {
        let p = self.params.p;
        if let Some(valuation) = val_p_unchecked(x, p).finite().filter(|&k| k < 0) {
            return Ok(DMembership::NonMember { p, valuation });
        }
        let ra = self.a.ramified_primes()?;
        let rb = self.b.ramified_primes()?;
        let only_a: Vec<u64> = ra.iter().copied().filter(|q| !rb.contains(q)).collect();
        let (x1, x2) = if !ra.iter().any(|&q| neg_val(x, q)) {
            (x.clone(), Rat::zero())
        } else if !rb.iter().any(|&q| neg_val(x, q)) {
            (Rat::zero(), x.clone())
        } else {
            split_integral(x, &only_a)
        };
        if ra.iter().any(|&q| neg_val(&x1, q))
            || rb.iter().any(|&q| neg_val(&x2, q))
        {
            return Err(Error::invariant(format!("splitting {x} left a non-integral part")));
        }
        let (Some(w1), Some(w2)) = (t_witness(&self.a, &x1, height), t_witness(&self.b, &x2, height)) else {
            return Ok(DMembership::Unknown { height });
        };
        let one = [Rat::one(), Rat::zero(), Rat::zero(), Rat::zero()];
        let quats = [w1.0, w1.1, w2.0, w2.1, one.clone(), one.clone(), one.clone(), one];
        match self.lift(x, &quats, &Rat::zero())? {
            Some(assignment) => Ok(DMembership::Member { x1, x2, assignment }),
            None => Err(Error::invariant(format!("witness for {x} does not satisfy the D family"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64) -> Rat {
        Rat::from(n)
    }

    fn places_of(v: &[u64], real: bool) -> BTreeSet<Place> {
        let mut s: BTreeSet<Place> = v.iter().map(|&p| Place::Finite(p)).collect();
        if real {
            s.insert(Place::Real);
        }
        s
    }

    /// Brute-force oracle: `(a, b)_p = 1` iff `a x² + b y² = z²` has a
    /// primitive solution mod `p^k` lifting, checked via the classical
    /// criterion "z² − a x² − b y² ≡ 0 mod p^k with some coordinate a unit"
    /// for a large enough `k`.
    fn symbol_oracle(a: i64, b: i64, p: u64) -> i32 {
        let k = if p == 2 { 5 } else { 3 };
        let m = (p as i64).pow(k);
        // Remove squares of p so valuations are 0 or 1.
        let strip = |mut x: i64| {
            while x % (p as i64 * p as i64) == 0 {
                x /= p as i64 * p as i64;
            }
            x
        };
        let (a, b) = (strip(a), strip(b));
        for x in 0..m {
            for y in 0..m {
                for z in 0..m {
                    if x % p as i64 == 0 && y % p as i64 == 0 && z % p as i64 == 0 {
                        continue;
                    }
                    if (z * z - a * x * x - b * y * y).rem_euclid(m) == 0 {
                        return 1;
                    }
                }
            }
        }
        -1
    }

    #[test]
    fn symbol_examples() {
        assert_eq!(hilbert_symbol(&r(-1), &r(-1), Place::Real).unwrap(), -1);
        assert_eq!(hilbert_symbol(&r(2), &r(5), Place::Finite(5)).unwrap(), -1);
        for v in [Place::Finite(2), Place::Finite(3), Place::Finite(7), Place::Real] {
            assert_eq!(hilbert_symbol(&r(1), &r(-7), v).unwrap(), 1);
        }
        assert!(matches!(hilbert_symbol(&r(0), &r(1), Place::Real), Err(Error::Input(_))));
    }

    #[test]
    fn symbols_match_brute_force() {
        for a in [-6, -5, -3, -2, -1, 1, 2, 3, 5, 6, 10, 15] {
            for b in [-5, -3, -2, -1, 2, 3, 7, 12] {
                for p in [2u64, 3, 5] {
                    let want = symbol_oracle(a, b, p);
                    let got = hilbert_symbol(&r(a), &r(b), Place::Finite(p)).unwrap();
                    assert_eq!(got, want, "({a},{b})_{p}");
                }
            }
        }
    }

    #[test]
    fn ramification_examples() {
        let ram = |a, b| QuaternionAlgebra::from_ints(a, b).unwrap().ramification_set().unwrap();
        assert_eq!(ram(-1, -1), places_of(&[2], true));
        assert_eq!(ram(2, 5), places_of(&[2, 5], false));
        assert_eq!(ram(1, 7), BTreeSet::new());
        let half = QuaternionAlgebra::new(Rat::frac(1, 2), Rat::frac(5, 9)).unwrap();
        assert_eq!(half.ramification_set().unwrap(), places_of(&[2, 5], false));
    }

    #[test]
    fn construct_examples() {
        let (a, b) = construct_ab(5, 2, 13).unwrap();
        assert_eq!(a.ramification_set().unwrap(), places_of(&[2, 5], false));
        assert_eq!(b.ramification_set().unwrap(), places_of(&[5, 13], false));
        let (a, _) = construct_ab(2, 5, 13).unwrap();
        assert_eq!(a.ramification_set().unwrap(), places_of(&[2, 5], false));
        assert!(matches!(construct_ab(5, 5, 13), Err(Error::Input(_))));
        for (p, q1, q2) in [(3, 7, 11), (7, 3, 2), (11, 13, 17), (2, 3, 5), (41, 43, 47)] {
            let (a, b) = construct_ab(p, q1, q2).unwrap();
            assert_eq!(a.ramification_set().unwrap(), places_of(&[p, q1], false));
            assert_eq!(b.ramification_set().unwrap(), places_of(&[p, q2], false));
        }
    }

    #[test]
    fn class_ledgers() {
        let two = BTreeMap::from([(Place::Finite(5), Rat::frac(1, 2)), (Place::Finite(2), Rat::frac(1, 2))]);
        let c = brauer_class_prescribe(2, &two).unwrap();
        let alg = c.algebra.unwrap();
        assert_eq!(alg.ramification_set().unwrap(), places_of(&[2, 5], false));
        let three = BTreeMap::from([(Place::Finite(7), Rat::frac(1, 3)), (Place::Finite(13), Rat::frac(2, 3))]);
        let c = brauer_class_prescribe(3, &three).unwrap();
        assert!(c.algebra.is_none());
        assert_eq!(c.invariants.len(), 2);
        let bad = BTreeMap::from([(Place::Finite(5), Rat::frac(1, 2))]);
        assert!(matches!(brauer_class_prescribe(2, &bad), Err(Error::Precondition(_))));
        let real = BTreeMap::from([(Place::Real, Rat::frac(1, 3)), (Place::Finite(3), Rat::frac(2, 3))]);
        assert!(matches!(brauer_class_prescribe(3, &real), Err(Error::Input(_))));
        let hamilton = BTreeMap::from([(Place::Real, Rat::frac(1, 2)), (Place::Finite(2), Rat::frac(1, 2))]);
        let alg = brauer_class_prescribe(2, &hamilton).unwrap().algebra.unwrap();
        assert_eq!(alg.ramification_set().unwrap(), places_of(&[2], true));
    }

    #[test]
    fn norm_and_trace_examples() {
        let a = QuaternionAlgebra::from_ints(2, 5).unwrap();
        let one = [r(1), r(0), r(0), r(0)];
        assert_eq!((a.nrd(&one), a.trd(&one)), (r(1), r(2)));
        let x = [r(3), r(2), r(0), r(0)];
        assert_eq!((a.nrd(&x), a.trd(&x)), (r(1), r(6)));
        let h = QuaternionAlgebra::from_ints(-1, -1).unwrap();
        let i = [r(0), r(1), r(0), r(0)];
        assert_eq!((h.nrd(&i), h.trd(&i)), (r(1), r(0)));
        // ij = k and ji = −k.
        let j = [r(0), r(0), r(1), r(0)];
        assert_eq!(h.mul(&i, &j), [r(0), r(0), r(0), r(1)]);
        assert_eq!(h.mul(&j, &i), [r(0), r(0), r(0), r(-1)]);
    }

    #[test]
    fn trace_differences() {
        let a = QuaternionAlgebra::from_ints(2, 5).unwrap();
        let s1 = sample_t(&a, 1, Exec::default()).unwrap();
        assert!(s1.differences.contains(&r(0)));
        let s3 = sample_t(&a, 3, Exec::default()).unwrap();
        assert!(s3.differences.contains(&r(4)));
        assert!(!s3.differences.contains(&Rat::frac(1, 2)));
        let seq = sample_t(&a, 3, Exec::Sequential).unwrap();
        assert_eq!(seq.differences, s3.differences);
    }

    #[test]
    fn t_family_agrees_with_witnesses() {
        let a = QuaternionAlgebra::from_ints(2, 5).unwrap();
        let t = compile_t_family(&a).unwrap();
        assert_eq!((t.n, t.m), (1, 11));
        for z in [r(0), r(4), r(7), Rat::frac(1, 3), r(-5)] {
            let (x, y) = t_witness(&a, &z, 12).unwrap_or_else(|| panic!("no witness for {z}"));
            assert!(a.nrd(&x).is_one() && a.nrd(&y).is_one());
            let s1 = a.trd(&x);
            let s2 = a.trd(&y);
            let mut point = vec![z.clone(), s1, s2];
            point.extend(x.iter().cloned());
            point.extend(y.iter().cloned());
            point.push(r(1));
            assert!(t.satisfied_by(&point));
        }
        assert!(t_witness(&a, &Rat::frac(1, 2), 12).is_none());
    }

    #[test]
    fn d_family_semantics() {
        let params = KochenParams::new(5, 1, 1, false).unwrap();
        let (a, b) = construct_ab(5, 2, 13).unwrap();
        let d = compile_d_family(&params, &a, &b).unwrap();
        assert!(matches!(d.member(&r(7), 12).unwrap(), DMembership::Member { .. }));
        assert!(matches!(d.member(&Rat::frac(1, 5), 12).unwrap(), DMembership::NonMember { .. }));
        for x in [Rat::frac(1, 26), Rat::frac(3, 2), Rat::frac(-7, 13), r(0)] {
            match d.member(&x, 12).unwrap() {
                DMembership::Member { x1, x2, .. } => assert_eq!(&x1 + &x2, x),
                other => panic!("{x}: {other:?}"),
            }
        }
        let wide = KochenParams::new(5, 1, 2, false).unwrap();
        assert!(matches!(compile_d_family(&wide, &a, &b), Err(Error::Unsupported(_))));
    }

    fn nonzero() -> impl Strategy<Value = Rat> {
        (-50i64..=50, 1i64..=50).prop_filter_map("nonzero", |(n, d)| (n != 0).then(|| Rat::frac(n, d)))
    }

    proptest! {
        #[test]
        fn reciprocity(a in nonzero(), b in nonzero()) {
            let mut prod = 1;
            for v in relevant_places(&a, &b).unwrap() {
                prod *= hilbert_symbol(&a, &b, v).unwrap();
            }
            prop_assert_eq!(prod, 1);
        }

        #[test]
        fn bilinear(a in nonzero(), b1 in nonzero(), b2 in nonzero(), p in prop::sample::select(vec![2u64, 3, 5, 7, 11, 13])) {
            let v = Place::Finite(p);
            let lhs = hilbert_symbol(&a, &(&b1 * &b2), v).unwrap();
            let rhs = hilbert_symbol(&a, &b1, v).unwrap() * hilbert_symbol(&a, &b2, v).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn norm_is_multiplicative(a in nonzero(), b in nonzero(), xs in prop::collection::vec(-9i64..=9, 8)) {
            let alg = QuaternionAlgebra::new(a, b).unwrap();
            let x: Quat = [r(xs[0]), r(xs[1]), Rat::frac(xs[2], 2), r(xs[3])];
            let y: Quat = [r(xs[4]), Rat::frac(xs[5], 3), r(xs[6]), r(xs[7])];
            prop_assert_eq!(alg.nrd(&alg.mul(&x, &y)), &alg.nrd(&x) * &alg.nrd(&y));
        }
    }
}
