//! Compilers from Kochen data to diophantine families, with bounded
//! witness search over Q for the compiled equations.

use std::sync::atomic::AtomicU64;

use serde::Serialize;

use super::solve::{QOps, Solver};
use super::weil::weil_restrict;
use super::DiophFamily;
use crate::arith::mpoly::MPoly;
use crate::arith::qpoly::{factor_over_q, QPoly, FACTOR_DEGREE_CAP};
use crate::arith::rat::{rationals_up_to_height, Rat};
use crate::arith::ratfunc::RatFunc;
use crate::arith::valuation::val_p_unchecked;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::kochen::{gamma_ratfunc, KochenParams};
use crate::numberfield::field::NumberField;
use crate::numberfield::kill::{integral_generator, lemma_kill_check, parametric_modulus};
use crate::numberfield::primes::{holomorphy_member as holomorphy_ring_member, s_p_tau};
use crate::pyth::{bounded_polys, member_r_pn, MembershipVerdict, Obstruction, SearchBounds, Witness};

/// `γ` as a one-dimensional family: free `z`, auxiliaries `[arg, inv]`.
fn gamma_family(params: &KochenParams) -> Result<DiophFamily> {
    let mut d = DiophFamily::full(1).rational_image(&[gamma_ratfunc(params)])?;
    d.aux_names[0] = "arg".into();
    Ok(d)
}

/// `{g(γ(u))/(1 + t·g(γ(w)))}` over the variables `g` uses, `u` first.
fn ring_family(params: &KochenParams, g: &MPoly) -> Result<DiophFamily> {
    let used = g.vars();
    let k = used.len();
    let mut prod = DiophFamily::full(0);
    if k > 0 {
        let gam = gamma_family(params)?;
        for _ in 0..2 * k {
            prod = prod.product(&gam);
        }
    }
    let mut map_u = vec![0; g.arity()];
    let mut map_w = vec![0; g.arity()];
    for (pos, &v) in used.iter().enumerate() {
        map_u[v] = pos;
        map_w[v] = k + pos;
    }
    let num = g.embed(2 * k, &map_u);
    let den = &MPoly::one(2 * k) + &g.embed(2 * k, &map_w).scale(&params.t());
    let f = RatFunc::new(num, den)?;
    let mut d = prod.rational_image(&[f])?;
    for name in d.aux_names.iter_mut().filter(|s| *s == "pre") {
        *name = "gval".into();
    }
    Ok(d)
}

/// Roots of `x^m + c_{m−1}x^{m−1} + … + c_0` with every `c_i` in the ring
/// element set; the coefficients are the leading auxiliaries.
fn relation_family(params: &KochenParams, g: &MPoly, m: u32) -> Result<DiophFamily> {
    let ring = ring_family(params, g)?;
    let m = m as usize;
    let mut d = DiophFamily::full(1);
    for _ in 0..m {
        d = d.product(&ring);
    }
    let arity = d.arity();
    let x = MPoly::var(arity, 0);
    let mut rel = x.pow(m as u32);
    for i in 0..m {
        rel = &rel + &(&MPoly::var(arity, 1 + i) * &x.pow(i as u32));
    }
    let n = d.n;
    let mut polys = d.polys;
    polys.push(rel);
    DiophFamily::with_names(n, d.m, polys, d.aux_names)?.project(m, "coef")
}

/// One operand of the compiled union.
#[derive(Clone, Debug, Serialize)]
pub struct BranchInfo {
    pub g: MPoly,
    pub t: Rat,
    pub m: u32,
    /// Index of the branch's selector variable.
    pub selector: usize,
    /// Index of the branch's first auxiliary variable.
    pub aux_offset: usize,
    pub aux_len: usize,
    /// Argument variables of the Kochen operator, in witness order.
    pub arg_vars: Vec<usize>,
}

/// The family for `R_{p,n}^τ` with its branch layout.
#[derive(Clone, Debug, Serialize)]
pub struct CompiledFamily {
    pub params: KochenParams,
    pub n: u32,
    pub family: DiophFamily,
    pub branches: Vec<BranchInfo>,
}

/// Membership over Q through the compiled equations.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "verdict")]
pub enum DiophMembership {
    /// A full assignment of the family's variables, checked exactly.
    Member { branch: usize, assignment: Vec<Rat> },
    NonMember { obstruction: Obstruction },
    /// No witness at the searched heights.
    Unknown { height: u64 },
}

/// Compiles `R_{p,n}^τ`: the union over `g ∈ P_{p,n}`, `t = ±p` and
/// relation degrees `m = 1..n` of the roots of monic relations over
/// `R_{p,g,t}`.
///
/// The union uses selector variables, so the size is the sum of the branch
/// sizes. `budget` caps the total number of terms.
pub fn compile_r_family(params: &KochenParams, n: u32, budget: u64) -> Result<CompiledFamily> {
    if n == 0 {
        return Err(Error::input("n must be at least 1"));
    }
    let base = KochenParams {
        negative_t: false,
        ..*params
    };
    let polys = bounded_polys(base.p, n, budget)?;
    // Estimate from the largest polynomial before building everything.
    let probe = polys.iter().max_by_key(|g| g.vars().len()).cloned();
    if let Some(g) = probe {
        let per: u64 = (1..=n)
            .map(|m| relation_family(&base, &g, m).map(|d| d.size().terms as u64))
            .sum::<Result<u64>>()?;
        let est = per.saturating_mul(2 * polys.len() as u64);
        if est > budget {
            return Err(Error::resource(format!(
                "about {est} terms for {} polynomials exceed the budget {budget}",
                polys.len()
            )));
        }
    }
    let mut parts = Vec::new();
    let mut meta = Vec::new();
    for g in &polys {
        for sign in [false, true] {
            let p = KochenParams {
                negative_t: sign,
                ..base
            };
            for m in 1..=n {
                parts.push(relation_family(&p, g, m)?);
                meta.push((g.clone(), p.t(), m));
            }
        }
    }
    let (family, offsets) = DiophFamily::union_selected(&parts)?;
    let branches = meta
        .into_iter()
        .zip(offsets)
        .zip(&parts)
        .enumerate()
        .map(|(i, (((g, t, m), off), d))| BranchInfo {
            g,
            t,
            m,
            selector: 1 + i,
            aux_offset: off,
            aux_len: d.m,
            arg_vars: (0..d.m)
                .filter(|&j| d.aux_names[j] == "arg")
                .map(|j| off + j)
                .collect(),
        })
        .collect();
    Ok(CompiledFamily {
        params: base,
        n,
        family,
        branches,
    })
}

impl CompiledFamily {
    fn start(&self, branch: usize, x: &Rat) -> Vec<Option<Rat>> {
        let mut a = vec![None; self.family.arity()];
        a[0] = Some(x.clone());
        for (i, b) in self.branches.iter().enumerate() {
            a[b.selector] = Some(if i == branch { Rat::one() } else { Rat::zero() });
        }
        a
    }

    /// Completes an assignment from the arguments of a ring witness and
    /// checks every equation of the family exactly.
    pub fn lift(&self, witness: &Witness, x: &Rat) -> Result<Option<(usize, Vec<Rat>)>> {
        let Witness::Relation { t, g, coefficients } = witness else {
            return Ok(None);
        };
        let m = coefficients.len() as u32;
        let Some(bi) = self
            .branches
            .iter()
            .position(|b| &b.g == g && &b.t == t && b.m == m)
        else {
            return Ok(None);
        };
        let b = &self.branches[bi];
        let used = g.vars();
        let mut args = Vec::new();
        for c in coefficients {
            args.extend(used.iter().map(|&v| c.u[v].clone()));
            args.extend(used.iter().map(|&v| c.w[v].clone()));
        }
        if args.len() != b.arg_vars.len() {
            return Ok(None);
        }
        let mut start = self.start(bi, x);
        for (&v, a) in b.arg_vars.iter().zip(args) {
            start[v] = Some(a);
        }
        let solver = Solver::new(&QOps, self.family.arity(), &self.family.polys)?;
        let nodes = AtomicU64::new(0);
        let found = solver.solve(start, &|_| 0, &|_| Vec::new(), &nodes, 1)?;
        Ok(found
            .filter(|a| self.family.satisfied_by(a))
            .map(|a| (bi, a)))
    }

    /// Direct search: every branch, Kochen arguments of height at most
    /// `height`, all other auxiliaries by propagation.
    pub fn search(&self, x: &Rat, height: u64, budget: u64, exec: Exec) -> Result<Option<(usize, Vec<Rat>)>> {
        let solver = Solver::new(&QOps, self.family.arity(), &self.family.polys)?;
        let dom = rationals_up_to_height(height);
        let names = &self.family.aux_names;
        let n = self.family.n;
        let rank = |v: usize| if v >= n && names[v - n] == "arg" { 0 } else { 1 };
        let domain = |_: usize| dom.clone();
        let nodes = AtomicU64::new(0);
        let hits = exec.try_map_range(self.branches.len(), |bi| {
            let sol = solver.solve(self.start(bi, x), &rank, &domain, &nodes, budget)?;
            Ok::<_, Error>(sol.filter(|a| self.family.satisfied_by(a)).map(|a| (bi, a)))
        })?;
        Ok(hits.into_iter().flatten().next())
    }

    /// Membership of `x`: ring witnesses from the Kochen-value search are
    /// lifted to the family's equations (failure to lift is an invariant
    /// violation); obstructions are cross-checked by a direct search at
    /// `direct_height` that must come back empty.
    pub fn member(
        &self,
        x: &Rat,
        bounds: &SearchBounds,
        direct_height: u64,
        budget: u64,
        exec: Exec,
    ) -> Result<DiophMembership> {
        let verdict = member_r_pn(self.params.p, self.params.tau, self.n, x, bounds, budget, exec)?;
        match verdict {
            MembershipVerdict::Member { witness } => match self.lift(&witness, x)? {
                Some((branch, assignment)) => Ok(DiophMembership::Member { branch, assignment }),
                None => Err(Error::invariant(format!(
                    "ring witness for {x} does not satisfy the compiled equations"
                ))),
            },
            MembershipVerdict::NonMember { obstruction } => {
                if let Some((b, _)) = self.search(x, direct_height, budget, exec)? {
                    return Err(Error::invariant(format!(
                        "obstructed {x} satisfies the equations of branch {b}"
                    )));
                }
                Ok(DiophMembership::NonMember { obstruction })
            }
            MembershipVerdict::Unknown { .. } => Ok(match self.search(x, direct_height, budget, exec)? {
                Some((branch, assignment)) => DiophMembership::Member { branch, assignment },
                None => DiophMembership::Unknown { height: bounds.height },
            }),
        }
    }
}

/// `f_s − N_s = 0`, `N_s^l = 0`: the same points as `f_s^l = 0` in any ring,
/// with the power taken on a single fresh variable.
fn nilpotent_power(d: &DiophFamily, l: u32) -> Result<DiophFamily> {
    let r = d.polys.len();
    let arity = d.arity() + r;
    let lift: Vec<usize> = (0..d.arity()).collect();
    let mut polys = Vec::with_capacity(2 * r);
    for (s, f) in d.polys.iter().enumerate() {
        let nv = MPoly::var(arity, d.arity() + s);
        polys.push(&f.embed(arity, &lift) - &nv);
        polys.push(nv.pow(l));
    }
    let mut names = d.aux_names.clone();
    names.extend((0..r).map(|_| "nil".to_string()));
    DiophFamily::with_names(d.n, d.m + r, polys, names)
}

/// Substitutes the algebra parameters `z` of a Weil restriction (free
/// variables `1..=k` after `x`) by polynomials in `(x, a, extra…)`.
fn specialize(w: &DiophFamily, k: usize, subs_z: &[MPoly], extra: &[&str], extra_polys: Vec<MPoly>) -> Result<DiophFamily> {
    // New layout: x, a, extra, then w's auxiliaries.
    let e = extra.len();
    let arity = 2 + e + w.m;
    let subs = |i: usize| -> MPoly {
        if i == 0 {
            MPoly::var(arity, 0)
        } else if i <= k {
            subs_z[i - 1].clone()
        } else {
            MPoly::var(arity, 2 + e + (i - 1 - k))
        }
    };
    let mut polys: Vec<MPoly> = w.polys.iter().map(|f| f.compose_sparse(arity, subs)).collect();
    polys.extend(extra_polys);
    let mut names: Vec<String> = extra.iter().map(|s| s.to_string()).collect();
    names.extend(w.aux_names.iter().cloned());
    DiophFamily::with_names(2, e + w.m, polys, names)
}

fn qpoly_in(arity: usize, f: &QPoly) -> Vec<MPoly> {
    f.coeffs().iter().map(|c| MPoly::constant(arity, c.clone())).collect()
}

/// The two-dimensional holomorphy family with its ingredients.
#[derive(Clone, Debug, Serialize)]
pub struct HoloFamily {
    pub params: KochenParams,
    pub n_prime: u32,
    /// The power applied to the ring equations.
    pub l: u32,
    /// Degree of `g_a`.
    pub k: usize,
    pub family: DiophFamily,
    /// First auxiliary index of the `a = 0` block.
    pub zero_offset: usize,
    /// Variables of the ring family after the nilpotent encoding.
    pub ring_vars: usize,
}

impl HoloFamily {
    /// For `a = 0`, `B_0 ≅ Q^Q` and a point of the ring family embeds
    /// diagonally. Completes such an assignment (`xy` for the ring family)
    /// and checks every equation.
    pub fn lift_zero_branch(&self, xy: &[Rat]) -> Result<Option<Vec<Rat>>> {
        let q = self.params.big_q() as usize;
        let fam = &self.family;
        let mut start: Vec<Option<Rat>> = vec![None; fam.arity()];
        start[0] = Some(xy[0].clone());
        start[1] = Some(Rat::zero());
        start[2] = Some(Rat::zero());
        start[3] = Some(Rat::one());
        let m_nil = self.ring_vars - 1;
        let u = |i: usize, j: usize| self.zero_offset + i * m_nil + j;
        for j in 0..m_nil {
            // Ring auxiliaries, then the nilpotent slots, which are zero at a point.
            let v = xy.get(1 + j).cloned().unwrap_or_default();
            start[u(0, j)] = Some(v);
            for i in 1..q {
                start[u(i, j)] = Some(Rat::zero());
            }
        }
        let solver = Solver::new(&QOps, fam.arity(), &fam.polys)?;
        let nodes = AtomicU64::new(0);
        let found = solver.solve(start, &|_| 0, &|_| vec![Rat::zero()], &nodes, 1 << 20)?;
        Ok(found.filter(|a| fam.satisfied_by(a)))
    }
}

/// The family of `(x, a)` with `x ∈ P_{f^l}(B_a)`, where `f` are the
/// equations of `R_{p,N′}^τ`, `l = 2Q` and `B_a = Q[T]/(g_a)` with
/// `g_a = t·a^e·((T^Q − T)² − 1) − (T^Q − T)`.
///
/// For `a ≠ 0` the algebra is presented by the monic `g_a/(t·a^e)`, whose
/// coefficients are polynomials in an auxiliary `b = 1/(t·a^e)`. For
/// `a = 0` it is presented by `T^Q − T`. The two cases are joined by a
/// selector union.
pub fn compile_holomorphy_family(params: &KochenParams, n_prime: u32, budget: u64) -> Result<HoloFamily> {
    let r = compile_r_family(params, n_prime, budget)?;
    let q = params.big_q() as usize;
    let l = 2 * q as u32;
    let nil = nilpotent_power(&r.family, l)?;
    let t = params.t();
    let s = QPoly::monomial(Rat::one(), q).sub(&QPoly::x());
    let quad = s.mul(&s).sub(&QPoly::one());

    let k = 2 * q;
    let w = weil_restrict(&nil, k)?;
    if w.size().terms as u64 > budget {
        return Err(Error::resource(format!(
            "Weil restriction has {} terms, over the budget {budget}",
            w.size().terms
        )));
    }
    let ar = 3 + w.m;
    let a = MPoly::var(ar, 1);
    let b = MPoly::var(ar, 2);
    let z: Vec<MPoly> = (0..k)
        .map(|i| &MPoly::constant(ar, quad.coeff(i)) - &b.scale(&s.coeff(i)))
        .collect();
    let unit = &(&a.pow(params.e()) * &b).scale(&t) - &MPoly::one(ar);
    let generic = specialize(&w, k, &z, &["b"], vec![unit])?;

    let w0 = weil_restrict(&nil, q)?;
    let ar0 = 2 + w0.m;
    let z0: Vec<MPoly> = qpoly_in(ar0, &s).into_iter().take(q).collect();
    let zero = specialize(&w0, q, &z0, &[], vec![MPoly::var(ar0, 1)])?;

    let (family, offsets) = DiophFamily::union_selected(&[generic, zero])?;
    Ok(HoloFamily {
        params: r.params,
        n_prime,
        l,
        k,
        family,
        zero_offset: offsets[1],
        ring_vars: nil.arity(),
    })
}

/// One factor field of `g_a`.
#[derive(Clone, Debug, Serialize)]
pub struct FactorMembership {
    pub factor: String,
    /// Whether `x` lies in the holomorphy ring at the primes of type at most
    /// `τ` of this field.
    pub member: bool,
    /// Whether this field has such primes.
    pub has_primes: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct HoloVerdict {
    pub x: Rat,
    pub a: Rat,
    /// `v_p(x) ≥ 0` for every prime of `S_p^τ(Q; a)`.
    pub basic_set: bool,
    /// Intersection over the factor fields of `g_a`.
    pub factor_fields: bool,
    pub factors: Vec<FactorMembership>,
    pub member: bool,
}

/// Membership of `(x, a) ∈ Q²` in the holomorphy family, decided twice:
/// from the basic set `S_p^τ(Q; a)` directly, and through the residue
/// fields of `B_a`, where each factor field `E` of `g_a` contributes
/// `Q ∩ O_{S_p^τ(E)}`. Disagreement is an invariant violation.
pub fn holomorphy_member(params: &KochenParams, x: &Rat, a: &Rat) -> Result<HoloVerdict> {
    let p = params.p;
    let tau = params.tau;
    let s_nonempty = val_p_unchecked(a, p) >= 0;
    let basic_set = !s_nonempty || val_p_unchecked(x, p) >= 0;

    let g = if a.is_zero() {
        let q = params.big_q() as usize;
        QPoly::x().sub(&QPoly::monomial(Rat::one(), q))
    } else {
        parametric_modulus(p, tau, a)
    };
    if g.deg0() > FACTOR_DEGREE_CAP {
        return Err(Error::resource(format!("g_a of degree {} is too large to factor", g.deg0())));
    }
    let kill = if a.is_zero() { None } else { Some(lemma_kill_check(p, tau, a)?) };
    let fac = factor_over_q(&g)?;
    let mut factors = Vec::new();
    for (i, (phi, _)) in fac.factors.iter().enumerate() {
        let field = NumberField::new(integral_generator(phi))?;
        let elem = field.from_rat(x);
        let (member, has_primes) = match s_p_tau(&field, p, tau) {
            Ok(primes) => (holomorphy_ring_member(&field, p, tau, &elem)?, !primes.is_empty()),
            Err(Error::Unsupported(_)) => {
                // Dedekind's criterion fails here; fall back on the kill
                // check's decision for this factor, and on the rational
                // valuation of x (every prime above p restricts to p).
                let has = kill
                    .as_ref()
                    .and_then(|k| k.factors.get(i))
                    .map(|f| f.nonempty)
                    .ok_or_else(|| Error::unsupported(format!("cannot decide primes of {phi}")))?;
                (!has || val_p_unchecked(x, p) >= 0, has)
            }
            Err(e) => return Err(e),
        };
        factors.push(FactorMembership {
            factor: phi.to_string(),
            member,
            has_primes,
        });
    }
    let factor_fields = factors.iter().all(|f| f.member);
    if basic_set != factor_fields {
        return Err(Error::invariant(format!(
            "basic set and factor fields disagree at x={x}, a={a}"
        )));
    }
    Ok(HoloVerdict {
        x: x.clone(),
        a: a.clone(),
        basic_set,
        factor_fields,
        factors,
        member: basic_set,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pyth::DEFAULT_BUDGET;

    fn p3() -> KochenParams {
        KochenParams::new(3, 1, 1, false).unwrap()
    }

    #[test]
    fn gamma_family_matches_gamma() {
        let d = gamma_family(&p3()).unwrap();
        let x = Rat::from(2);
        let z = crate::kochen::gamma_eval(&p3(), &x).unwrap();
        let w = gamma_ratfunc(&p3()).den().eval(std::slice::from_ref(&x)).inv().unwrap();
        assert!(d.satisfied_by(&[z.clone(), x.clone(), w.clone()]));
        assert!(!d.satisfied_by(&[&z + &Rat::one(), x, w]));
    }

    #[test]
    fn r_family_shape_and_members() {
        let c = compile_r_family(&p3(), 1, DEFAULT_BUDGET).unwrap();
        assert_eq!(c.branches.len(), 18);
        assert_eq!(c.family.n, 1);
        let bounds = SearchBounds::default();
        let v = c
            .member(&Rat::frac(2, 35), &bounds, 2, DEFAULT_BUDGET, Exec::Sequential)
            .unwrap();
        match v {
            DiophMembership::Member { assignment, .. } => assert!(c.family.satisfied_by(&assignment)),
            other => panic!("{other:?}"),
        }
        let v = c.member(&Rat::frac(1, 3), &bounds, 2, DEFAULT_BUDGET, Exec::Sequential).unwrap();
        assert!(matches!(v, DiophMembership::NonMember { .. }));
        let v = c.member(&Rat::zero(), &bounds, 2, DEFAULT_BUDGET, Exec::Sequential).unwrap();
        assert!(matches!(v, DiophMembership::Member { .. }));
    }

    #[test]
    fn holomorphy_family_builds() {
        let p2 = KochenParams::new(2, 1, 1, false).unwrap();
        let t0 = std::time::Instant::now();
        let h = compile_holomorphy_family(&p2, 1, u64::MAX).unwrap();
        eprintln!("{:?} in {:?}", h.family.size(), t0.elapsed());
        assert_eq!(h.family.n, 2);
        assert_eq!(h.l, 4);
        let r = compile_r_family(&p2, 1, u64::MAX).unwrap();
        let v = r
            .member(&Rat::from(3), &SearchBounds::default(), 1, DEFAULT_BUDGET, Exec::Sequential)
            .unwrap();
        let DiophMembership::Member { assignment, .. } = v else { panic!("{v:?}") };
        let lifted = h.lift_zero_branch(&assignment).unwrap();
        assert!(lifted.is_some());
        let mut wrong = assignment.clone();
        wrong[0] = Rat::from(5);
        assert!(h.lift_zero_branch(&wrong).unwrap().is_none());
    }

    #[test]
    fn holomorphy_semantics() {
        let p2 = KochenParams::new(2, 1, 1, false).unwrap();
        assert!(holomorphy_member(&p2, &Rat::from(3), &Rat::one()).unwrap().member);
        assert!(!holomorphy_member(&p2, &Rat::frac(1, 2), &Rat::one()).unwrap().member);
        assert!(holomorphy_member(&p2, &Rat::frac(1, 2), &Rat::frac(1, 2)).unwrap().member);
        assert!(!holomorphy_member(&p2, &Rat::frac(1, 2), &Rat::zero()).unwrap().member);
    }
}
