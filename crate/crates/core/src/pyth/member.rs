//! Bounded membership search with exactly re-verified verdicts.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;

use super::exclusion::exclusion_applies;
use super::{bounded_polys, RingSpec};
use crate::arith::primes::{is_prime, prime_divisors};
use crate::arith::valuation::{val_fin, val_p_unchecked};
use crate::arith::rat::rationals_up_to_height;
use crate::arith::{MPoly, Rat};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::kochen::{gamma_eval, KochenParams};
use crate::numberfield::Tau;

/// Limits of the witness search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SearchBounds {
    /// Largest height of a Kochen argument.
    pub height: u64,
    /// Largest argument height used for coefficients of relations of degree ≥ 2.
    pub pool_height: u64,
    /// Cap on argument tuples per polynomial.
    pub max_tuples: u64,
}

impl Default for SearchBounds {
    fn default() -> Self {
        SearchBounds {
            height: 50,
            pool_height: 3,
            max_tuples: 250_000,
        }
    }
}

/// `value = g(γ(u))/(1 + t·g(γ(w)))`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RingElement {
    pub value: Rat,
    pub u: Vec<Rat>,
    pub w: Vec<Rat>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// `x` itself is a ring element.
    Element { t: Rat, g: MPoly, element: RingElement },
    /// `x^m + c_{m−1}x^{m−1} + … + c_0 = 0` with `m = coefficients.len()`.
    Relation {
        t: Rat,
        g: MPoly,
        coefficients: Vec<RingElement>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoverEntry {
    pub g: MPoly,
    pub t: Rat,
    pub ell: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Obstruction {
    /// `v_p(x) < 0`, while every ring considered lies in `Z_(p)`.
    PValuation { p: u64, valuation: i64 },
    /// The rings lie in `Z_(ℓ)` and `v_ℓ(x) < 0`.
    Exclusion {
        ell: u64,
        valuation: i64,
        residues: Vec<u64>,
    },
    /// Each ring of a union is excluded, by possibly different primes.
    Cover { entries: Vec<CoverEntry> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict")]
pub enum MembershipVerdict {
    Member { witness: Witness },
    NonMember { obstruction: Obstruction },
    Unknown { bounds: SearchBounds },
}

impl MembershipVerdict {
    pub fn is_member(&self) -> bool {
        matches!(self, MembershipVerdict::Member { .. })
    }

    pub fn is_non_member(&self) -> bool {
        matches!(self, MembershipVerdict::NonMember { .. })
    }
}

/// Kochen arguments up to a height with their values for `t = +p`.
///
/// Values for `t = −p` are the negatives, so one table serves both signs.
#[derive(Clone, Debug)]
pub struct KochenTable {
    params: KochenParams,
    args: Vec<Rat>,
    heights: Vec<u64>,
    gammas: Vec<Rat>,
}

impl KochenTable {
    pub fn new(params: &KochenParams, height: u64, exec: Exec) -> Self {
        let params = KochenParams {
            negative_t: false,
            ..*params
        };
        let all = rationals_up_to_height(height);
        let vals = exec.map(&all, |x| gamma_eval(&params, x));
        let mut args = Vec::new();
        let mut gammas = Vec::new();
        for (x, g) in all.into_iter().zip(vals) {
            if let Some(g) = g {
                args.push(x);
                gammas.push(g);
            }
        }
        let heights = args
            .iter()
            .map(|x: &Rat| {
                let h = x.height();
                u64::try_from(h).unwrap_or(u64::MAX)
            })
            .collect();
        KochenTable {
            params,
            args,
            heights,
            gammas,
        }
    }

    pub fn len(&self) -> usize {
        self.args.len()
    }

    pub fn is_empty(&self) -> bool {
        self.args.is_empty()
    }

    fn indices_up_to(&self, h: u64) -> Vec<usize> {
        (0..self.args.len()).filter(|&i| self.heights[i] <= h).collect()
    }
}

/// Element and relation search for one ring `R_{p,g,t}`.
pub struct RingSearcher<'a> {
    table: &'a KochenTable,
    t: Rat,
    negative_t: bool,
    g: MPoly,
    used: Vec<usize>,
    coords: Vec<usize>,
    values: Vec<Rat>,
    index: HashMap<Rat, usize>,
    pool: Vec<(Rat, usize, usize)>,
    pool_index: HashMap<Rat, usize>,
    exec: Exec,
}

fn decode(mut idx: usize, base: usize, k: usize) -> Vec<usize> {
    let mut d = vec![0; k];
    for slot in d.iter_mut().rev() {
        *slot = idx % base;
        idx /= base;
    }
    d
}

impl<'a> RingSearcher<'a> {
    /// Builds the value table of `g` on argument tuples, shrinking the
    /// argument height until at most `cap` tuples remain.
    pub fn new(
        table: &'a KochenTable,
        negative_t: bool,
        g: &MPoly,
        bounds: &SearchBounds,
        cap: u64,
        with_pool: bool,
        exec: Exec,
    ) -> Result<Self> {
        let k_all = g.arity();
        let used: Vec<usize> = (0..k_all).filter(|&i| g.uses_var(i)).collect();
        let k = used.len() as u32;
        let mut h = bounds.height;
        let coords = loop {
            let c = table.indices_up_to(h);
            if (c.len() as u64).checked_pow(k).is_some_and(|n| n <= cap.max(1)) {
                break c;
            }
            if h == 0 {
                return Err(Error::resource(format!(
                    "no argument height fits {cap} tuples for {k} variables"
                )));
            }
            h -= 1;
        };
        let t = if negative_t {
            -Rat::from(table.params.p)
        } else {
            Rat::from(table.params.p)
        };
        let count = coords.len().pow(k);
        let values = exec.map_range(count, |idx| {
            let point = Self::point_of(table, negative_t, &coords, &used, k_all, idx, true);
            g.eval(&point)
        });
        let mut index = HashMap::with_capacity(values.len());
        for (i, v) in values.iter().enumerate() {
            index.entry(v.clone()).or_insert(i);
        }
        let mut s = RingSearcher {
            table,
            t,
            negative_t,
            g: g.clone(),
            used,
            coords,
            values,
            index,
            pool: Vec::new(),
            pool_index: HashMap::new(),
            exec,
        };
        if with_pool {
            s.build_pool(bounds);
        }
        Ok(s)
    }

    /// Kochen values (or arguments when `values` is false) at tuple `idx`.
    fn point_of(
        table: &KochenTable,
        negative_t: bool,
        coords: &[usize],
        used: &[usize],
        arity: usize,
        idx: usize,
        values: bool,
    ) -> Vec<Rat> {
        let mut point = vec![Rat::zero(); arity];
        for (d, &var) in decode(idx, coords.len().max(1), used.len())
            .into_iter()
            .zip(used)
        {
            let j = coords[d];
            point[var] = if !values {
                table.args[j].clone()
            } else if negative_t {
                -&table.gammas[j]
            } else {
                table.gammas[j].clone()
            };
        }
        point
    }

    fn args_of(&self, idx: usize) -> Vec<Rat> {
        Self::point_of(
            self.table,
            self.negative_t,
            &self.coords,
            &self.used,
            self.g.arity(),
            idx,
            false,
        )
    }

    fn element(&self, value: Rat, i: usize, j: usize) -> RingElement {
        RingElement {
            value,
            u: self.args_of(i),
            w: self.args_of(j),
        }
    }

    fn build_pool(&mut self, bounds: &SearchBounds) {
        let small: Vec<usize> = (0..self.values.len())
            .filter(|&idx| {
                decode(idx, self.coords.len().max(1), self.used.len())
                    .iter()
                    .all(|&d| self.table.heights[self.coords[d]] <= bounds.pool_height)
            })
            .collect();
        let mut seen_a: Vec<usize> = Vec::new();
        let mut vals: HashMap<&Rat, ()> = HashMap::new();
        for &i in &small {
            if vals.insert(&self.values[i], ()).is_none() {
                seen_a.push(i);
            }
        }
        let cap = bounds.max_tuples as usize;
        'outer: for &j in &seen_a {
            let den = Rat::one() + &self.t * &self.values[j];
            if den.is_zero() {
                continue;
            }
            for &i in &seen_a {
                let v = &self.values[i] / &den;
                if !self.pool_index.contains_key(&v) {
                    self.pool_index.insert(v.clone(), self.pool.len());
                    self.pool.push((v, i, j));
                    if self.pool.len() >= cap {
                        break 'outer;
                    }
                }
            }
        }
    }

    pub fn t(&self) -> &Rat {
        &self.t
    }

    pub fn g(&self) -> &MPoly {
        &self.g
    }

    /// Number of argument tuples searched.
    pub fn tuples(&self) -> usize {
        self.values.len()
    }

    /// A representation `target = a/(1 + t·b)` with `a, b` in the value
    /// table, joining on `a = target·(1 + t·b)`.
    pub fn find_element(&self, target: &Rat) -> Option<RingElement> {
        let hit = self.exec.find_first_range(self.values.len(), |j| {
            let den = Rat::one() + &self.t * &self.values[j];
            if den.is_zero() {
                return None;
            }
            let a = target * &den;
            self.index.get(&a).map(|&i| (i, j))
        })?;
        Some(self.element(target.clone(), hit.0, hit.1))
    }

    /// A monic relation of degree at most `n` with `x` as a root.
    pub fn find_relation(&self, x: &Rat, n: u32, cap: u64) -> Option<Witness> {
        let wrap = |coefficients| Witness::Relation {
            t: self.t.clone(),
            g: self.g.clone(),
            coefficients,
        };
        if let Some(c0) = self.find_element(&-x) {
            return Some(wrap(vec![c0]));
        }
        let pool_len = self.pool.len();
        for m in 2..=n {
            let free = m - 1;
            let total = match (pool_len as u64).checked_pow(free) {
                Some(c) => c.min(cap),
                None => cap,
            } as usize;
            let hit = self.exec.find_first_range(total, |idx| {
                let digits = decode(idx, pool_len.max(1), free as usize);
                // c_1 … c_{m−1} from the pool, c_0 forced.
                let mut acc = x.pow(m);
                for (i, &d) in digits.iter().enumerate() {
                    acc += &(&self.pool[d].0 * &x.pow(i as u32 + 1));
                }
                let c0 = -acc;
                self.pool_index.get(&c0).map(|&k| (k, digits))
            });
            if let Some((k0, digits)) = hit {
                let mut coeffs = vec![self.pool_element(k0)];
                coeffs.extend(digits.into_iter().map(|d| self.pool_element(d)));
                return Some(wrap(coeffs));
            }
        }
        None
    }

    fn pool_element(&self, k: usize) -> RingElement {
        let (v, i, j) = &self.pool[k];
        self.element(v.clone(), *i, *j)
    }
}

fn params_with_sign(params: &KochenParams, t: &Rat) -> Option<KochenParams> {
    let p = Rat::from(params.p);
    if *t == p {
        Some(KochenParams {
            negative_t: false,
            ..*params
        })
    } else if *t == -p {
        Some(KochenParams {
            negative_t: true,
            ..*params
        })
    } else {
        None
    }
}

fn check_element(params: &KochenParams, g: &MPoly, t: &Rat, e: &RingElement) -> bool {
    let gam = |xs: &[Rat]| -> Option<Vec<Rat>> {
        xs.iter().map(|x| gamma_eval(params, x)).collect()
    };
    if e.u.len() != g.arity() || e.w.len() != g.arity() {
        return false;
    }
    let (Some(gu), Some(gw)) = (gam(&e.u), gam(&e.w)) else {
        return false;
    };
    let den = Rat::one() + t * &g.eval(&gw);
    !den.is_zero() && g.eval(&gu) / den == e.value
}

/// Re-evaluates a witness from scratch: Kochen values, `g`, the quotient
/// and, for relations, the monic polynomial at `x`.
pub fn verify_witness(p: u64, tau: Tau, witness: &Witness, x: &Rat) -> bool {
    let Ok(base) = KochenParams::new(p, tau.e, tau.f, false) else {
        return false;
    };
    match witness {
        Witness::Element { t, g, element } => {
            let Some(params) = params_with_sign(&base, t) else {
                return false;
            };
            element.value == *x && check_element(&params, g, t, element)
        }
        Witness::Relation { t, g, coefficients } => {
            let Some(params) = params_with_sign(&base, t) else {
                return false;
            };
            if coefficients.is_empty() || !coefficients.iter().all(|c| check_element(&params, g, t, c)) {
                return false;
            }
            let m = coefficients.len() as u32;
            let mut acc = x.pow(m);
            for (i, c) in coefficients.iter().enumerate() {
                acc += &(&c.value * &x.pow(i as u32));
            }
            acc.is_zero()
        }
    }
}

/// Primes dividing the denominator of `x`, other than `p`.
fn denominator_primes(x: &Rat, p: u64) -> Vec<u64> {
    let d: &BigInt = x.denom();
    let ps = prime_divisors(d, 1_000_000).unwrap_or_else(|_| {
        (2..10_000u64)
            .filter(|&l| is_prime(l) && (d % BigInt::from(l)).is_zero())
            .collect()
    });
    ps.into_iter().filter(|&l| l != p).collect()
}

fn obstruction(params: &KochenParams, g: &MPoly, x: &Rat, budget: u64) -> Result<Option<Obstruction>> {
    let vp = val_p_unchecked(x, params.p);
    if vp < 0 {
        return Ok(Some(Obstruction::PValuation {
            p: params.p,
            valuation: vp.finite().unwrap(),
        }));
    }
    for ell in denominator_primes(x, params.p) {
        if let Some(residues) = exclusion_applies(params, g, ell, budget)? {
            return Ok(Some(Obstruction::Exclusion {
                ell,
                valuation: val_fin(x, ell),
                residues,
            }));
        }
    }
    Ok(None)
}

/// Membership of `x` in the ring element set `R_{p,g,t}(Q)`.
pub fn member_r_pgt(
    spec: &RingSpec,
    x: &Rat,
    bounds: &SearchBounds,
    budget: u64,
    exec: Exec,
) -> Result<MembershipVerdict> {
    if let Some(ob) = obstruction(&spec.params, &spec.g, x, budget)? {
        return Ok(MembershipVerdict::NonMember { obstruction: ob });
    }
    let table = KochenTable::new(&spec.params, bounds.height, exec);
    let cap = bounds.max_tuples.min(budget);
    let s = RingSearcher::new(&table, spec.params.negative_t, &spec.g, bounds, cap, false, exec)?;
    Ok(match s.find_element(x) {
        Some(element) => MembershipVerdict::Member {
            witness: Witness::Element {
                t: s.t().clone(),
                g: spec.g.clone(),
                element,
            },
        },
        None => MembershipVerdict::Unknown { bounds: *bounds },
    })
}

/// Membership of `x` in `R_{p,g,t,n}(Q)`, the roots of monic relations of
/// degree at most `n` over `R_{p,g,t}(Q)`.
pub fn member_r_pgtn(
    spec: &RingSpec,
    x: &Rat,
    bounds: &SearchBounds,
    budget: u64,
    exec: Exec,
) -> Result<MembershipVerdict> {
    // Z_(p) and Z_(ℓ) are integrally closed, so obstructions pass to the closure.
    if let Some(ob) = obstruction(&spec.params, &spec.g, x, budget)? {
        return Ok(MembershipVerdict::NonMember { obstruction: ob });
    }
    let table = KochenTable::new(&spec.params, bounds.height, exec);
    let cap = bounds.max_tuples.min(budget);
    let s = RingSearcher::new(&table, spec.params.negative_t, &spec.g, bounds, cap, spec.n >= 2, exec)?;
    Ok(match s.find_relation(x, spec.n, cap) {
        Some(witness) => MembershipVerdict::Member { witness },
        None => MembershipVerdict::Unknown { bounds: *bounds },
    })
}

/// The union of `R_{p,g,t,n}(Q)` over `t = ±p` and all `g` of degree and
/// height at most `n`, with searchers built once and reused across queries.
pub struct RingUnion {
    p: u64,
    n: u32,
    bounds: SearchBounds,
    budget: u64,
    cap: u64,
    branches: Vec<(MPoly, KochenParams)>,
    table: KochenTable,
    exec: Exec,
}

impl RingUnion {
    pub fn new(p: u64, tau: Tau, n: u32, bounds: SearchBounds, budget: u64, exec: Exec) -> Result<Self> {
        let base = KochenParams::new(p, tau.e, tau.f, false)?;
        let polys = bounded_polys(p, n, budget)?;
        let branches: Vec<(MPoly, KochenParams)> = polys
            .into_iter()
            .flat_map(|g| [(g.clone(), base), (g, base.flipped())])
            .collect();
        let cap = bounds.max_tuples.min(budget / branches.len() as u64);
        if cap == 0 {
            return Err(Error::resource(format!(
                "{} branches exceed the budget {budget}",
                branches.len()
            )));
        }
        let table = KochenTable::new(&base, bounds.height, exec);
        Ok(RingUnion {
            p,
            n,
            bounds,
            budget,
            cap,
            branches,
            table,
            exec,
        })
    }

    pub fn branches(&self) -> usize {
        self.branches.len()
    }

    fn non_member(&self, x: &Rat) -> Result<Option<Obstruction>> {
        let vp = val_p_unchecked(x, self.p);
        if vp < 0 {
            return Ok(Some(Obstruction::PValuation {
                p: self.p,
                valuation: vp.finite().unwrap(),
            }));
        }
        let ells = denominator_primes(x, self.p);
        if ells.is_empty() {
            return Ok(None);
        }
        // For each ℓ, whether it excludes every branch.
        let mut per_branch: Vec<Option<u64>> = vec![None; self.branches.len()];
        for &ell in &ells {
            let mut all = true;
            let mut residues = None;
            for (k, (g, params)) in self.branches.iter().enumerate() {
                match exclusion_applies(params, g, ell, self.budget)? {
                    Some(r) => {
                        per_branch[k].get_or_insert(ell);
                        residues.get_or_insert(r);
                    }
                    None => all = false,
                }
            }
            if all {
                return Ok(Some(Obstruction::Exclusion {
                    ell,
                    valuation: val_fin(x, ell),
                    residues: residues.unwrap_or_default(),
                }));
            }
        }
        if per_branch.iter().all(Option::is_some) {
            let entries = self
                .branches
                .iter()
                .zip(per_branch)
                .map(|((g, params), ell)| CoverEntry {
                    g: g.clone(),
                    t: params.t(),
                    ell: ell.unwrap(),
                })
                .collect();
            return Ok(Some(Obstruction::Cover { entries }));
        }
        Ok(None)
    }

    pub fn member(&self, x: &Rat) -> Result<MembershipVerdict> {
        if let Some(ob) = self.non_member(x)? {
            return Ok(MembershipVerdict::NonMember { obstruction: ob });
        }
        for (g, params) in &self.branches {
            if obstruction(params, g, x, self.budget)?.is_some() {
                continue;
            }
            let s = RingSearcher::new(
                &self.table,
                params.negative_t,
                g,
                &self.bounds,
                self.cap,
                self.n >= 2,
                self.exec,
            )?;
            if let Some(witness) = s.find_relation(x, self.n, self.cap) {
                return Ok(MembershipVerdict::Member { witness });
            }
        }
        Ok(MembershipVerdict::Unknown {
            bounds: self.bounds,
        })
    }
}

/// Membership in the union `R_{p,n}(Q)` over both uniformizers `±p` and
/// every polynomial of degree and height at most `n`.
pub fn member_r_pn(
    p: u64,
    tau: Tau,
    n: u32,
    x: &Rat,
    bounds: &SearchBounds,
    budget: u64,
    exec: Exec,
) -> Result<MembershipVerdict> {
    RingUnion::new(p, tau, n, *bounds, budget, exec)?.member(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pyth::DEFAULT_BUDGET;

    fn spec(n: u32) -> RingSpec {
        let params = KochenParams::new(3, 1, 1, false).unwrap();
        RingSpec::new(params, MPoly::var(1, 0), n).unwrap()
    }

    fn tau11() -> Tau {
        Tau::new(1, 1).unwrap()
    }

    fn run_pgt(x: Rat) -> MembershipVerdict {
        member_r_pgt(&spec(1), &x, &SearchBounds::default(), DEFAULT_BUDGET, Exec::default()).unwrap()
    }

    #[test]
    fn element_examples() {
        match run_pgt(Rat::frac(2, 35)) {
            MembershipVerdict::Member {
                witness: w @ Witness::Element { .. },
            } => {
                let Witness::Element { element, .. } = &w else { unreachable!() };
                assert_eq!(element.u, vec![Rat::from(2)]);
                assert_eq!(element.w, vec![Rat::zero()]);
                assert!(verify_witness(3, tau11(), &w, &Rat::frac(2, 35)));
            }
            v => panic!("{v:?}"),
        }
        assert!(run_pgt(Rat::zero()).is_member());
        assert_eq!(
            run_pgt(Rat::frac(1, 3)),
            MembershipVerdict::NonMember {
                obstruction: Obstruction::PValuation { p: 3, valuation: -1 }
            }
        );
    }

    #[test]
    fn closure_examples() {
        let b = SearchBounds::default();
        let v = member_r_pgtn(&spec(2), &Rat::frac(2, 35), &b, DEFAULT_BUDGET, Exec::default()).unwrap();
        match &v {
            MembershipVerdict::Member { witness } => {
                assert!(matches!(witness, Witness::Relation { coefficients, .. } if coefficients.len() == 1));
                assert!(verify_witness(3, tau11(), witness, &Rat::frac(2, 35)));
            }
            _ => panic!("{v:?}"),
        }
        let v = member_r_pgtn(&spec(2), &Rat::frac(1, 2), &b, DEFAULT_BUDGET, Exec::default()).unwrap();
        assert!(matches!(
            v,
            MembershipVerdict::NonMember {
                obstruction: Obstruction::Exclusion { ell: 2, valuation: -1, .. }
            }
        ));
        assert!(member_r_pgtn(&spec(1), &Rat::zero(), &b, DEFAULT_BUDGET, Exec::default())
            .unwrap()
            .is_member());
    }

    #[test]
    fn union_examples() {
        let u = RingUnion::new(3, tau11(), 1, SearchBounds::default(), DEFAULT_BUDGET, Exec::default()).unwrap();
        assert_eq!(u.branches(), 18);
        let x = Rat::frac(-2, 35);
        let v = u.member(&x).unwrap();
        let MembershipVerdict::Member { witness } = &v else { panic!("{v:?}") };
        assert!(verify_witness(3, tau11(), witness, &x));
        assert!(u.member(&Rat::frac(1, 3)).unwrap().is_non_member());
        // g = −1 with t = 3 gives −1/(1 − 3) = 1/2.
        let half = Rat::frac(1, 2);
        let v = u.member(&half).unwrap();
        let MembershipVerdict::Member { witness } = &v else { panic!("{v:?}") };
        assert!(verify_witness(3, tau11(), witness, &half));
    }

    #[test]
    fn relations_of_degree_two() {
        // x = √… is never rational, but relations with pool coefficients
        // still certify some rationals; any hit must verify.
        let b = SearchBounds {
            height: 6,
            pool_height: 2,
            max_tuples: 10_000,
        };
        let u = RingUnion::new(3, tau11(), 2, b, DEFAULT_BUDGET, Exec::default());
        assert!(u.is_ok());
        let s = spec(3);
        for x in rationals_up_to_height(5) {
            if let MembershipVerdict::Member { witness } =
                member_r_pgtn(&s, &x, &b, DEFAULT_BUDGET, Exec::default()).unwrap()
            {
                assert!(verify_witness(3, tau11(), &witness, &x));
            }
        }
    }
}
