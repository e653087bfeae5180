//! Depth-first search for auxiliary assignments with linear propagation.
//!
//! A polynomial whose live terms (those not killed by an assigned zero)
//! mention a single unassigned variable, to the first power only, fixes
//! that variable. Everything else is decided by branching.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::arith::fq::Fq;
use crate::arith::mpoly::MPoly;
use crate::arith::rat::Rat;
use crate::error::{Error, Result};

/// Field arithmetic the solver runs over.
pub trait FieldOps: Sync {
    type E: Clone + PartialEq + Send + Sync + std::fmt::Debug;
    fn zero(&self) -> Self::E;
    fn one(&self) -> Self::E;
    fn add(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn mul(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn neg(&self, a: &Self::E) -> Self::E;
    fn inv(&self, a: &Self::E) -> Option<Self::E>;
    fn is_zero(&self, a: &Self::E) -> bool;
    fn from_rat(&self, x: &Rat) -> Result<Self::E>;

    fn pow(&self, a: &Self::E, k: u32) -> Self::E {
        let mut acc = self.one();
        for _ in 0..k {
            acc = self.mul(&acc, a);
        }
        acc
    }
}

/// The rationals.
#[derive(Clone, Copy, Debug, Default)]
pub struct QOps;

impl FieldOps for QOps {
    type E = Rat;
    fn zero(&self) -> Rat {
        Rat::zero()
    }
    fn one(&self) -> Rat {
        Rat::one()
    }
    fn add(&self, a: &Rat, b: &Rat) -> Rat {
        a + b
    }
    fn mul(&self, a: &Rat, b: &Rat) -> Rat {
        a * b
    }
    fn neg(&self, a: &Rat) -> Rat {
        -a
    }
    fn inv(&self, a: &Rat) -> Option<Rat> {
        a.inv()
    }
    fn is_zero(&self, a: &Rat) -> bool {
        a.is_zero()
    }
    fn from_rat(&self, x: &Rat) -> Result<Rat> {
        Ok(x.clone())
    }
    fn pow(&self, a: &Rat, k: u32) -> Rat {
        a.pow(k)
    }
}

impl FieldOps for Fq {
    type E = usize;
    fn zero(&self) -> usize {
        0
    }
    fn one(&self) -> usize {
        1
    }
    fn add(&self, a: &usize, b: &usize) -> usize {
        Fq::add(self, *a, *b)
    }
    fn mul(&self, a: &usize, b: &usize) -> usize {
        Fq::mul(self, *a, *b)
    }
    fn neg(&self, a: &usize) -> usize {
        Fq::neg(self, *a)
    }
    fn inv(&self, a: &usize) -> Option<usize> {
        Fq::inv(self, *a)
    }
    fn is_zero(&self, a: &usize) -> bool {
        *a == 0
    }
    fn from_rat(&self, x: &Rat) -> Result<usize> {
        Fq::from_rat(self, x)
    }
    fn pow(&self, a: &usize, k: u32) -> usize {
        Fq::pow(self, *a, k as u64)
    }
}

struct CPoly<E> {
    terms: Vec<(Vec<(usize, u32)>, E)>,
}

enum Status<E> {
    Conflict,
    Done,
    Fix(usize, E),
    Pending,
}

/// A family's polynomials compiled over a field.
pub struct Solver<'a, F: FieldOps> {
    ops: &'a F,
    arity: usize,
    polys: Vec<CPoly<F::E>>,
}

impl<'a, F: FieldOps> Solver<'a, F> {
    pub fn new(ops: &'a F, arity: usize, polys: &[MPoly]) -> Result<Self> {
        let mut out = Vec::with_capacity(polys.len());
        for f in polys {
            if f.arity() != arity {
                return Err(Error::input("polynomial arity differs from the solver's"));
            }
            let mut terms = Vec::with_capacity(f.num_terms());
            for (m, c) in f.monos() {
                let c = ops.from_rat(c)?;
                if ops.is_zero(&c) {
                    continue;
                }
                let vars = m.pairs().iter().map(|&(i, k)| (i as usize, k)).collect();
                terms.push((vars, c));
            }
            out.push(CPoly { terms });
        }
        Ok(Solver {
            ops,
            arity,
            polys: out,
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Evaluates polynomial `i` at a full assignment.
    pub fn eval(&self, i: usize, x: &[F::E]) -> F::E {
        let ops = self.ops;
        let mut acc = ops.zero();
        for (vars, c) in &self.polys[i].terms {
            let mut t = c.clone();
            for &(v, k) in vars {
                t = ops.mul(&t, &ops.pow(&x[v], k));
            }
            acc = ops.add(&acc, &t);
        }
        acc
    }

    pub fn satisfied(&self, x: &[F::E]) -> bool {
        (0..self.polys.len()).all(|i| self.ops.is_zero(&self.eval(i, x)))
    }

    fn status(&self, p: &CPoly<F::E>, a: &[Option<F::E>], live: &mut Vec<usize>) -> Status<F::E> {
        let ops = self.ops;
        let mut constant = ops.zero();
        let mut linear = ops.zero();
        let mut single: Option<usize> = None;
        let mut nonlinear = false;
        let mark = live.len();
        for (vars, c) in &p.terms {
            let mut t = c.clone();
            let mut free: Option<(usize, u32)> = None;
            let mut many = false;
            for &(v, k) in vars {
                match &a[v] {
                    Some(x) => {
                        t = ops.mul(&t, &ops.pow(x, k));
                        if ops.is_zero(&t) {
                            break;
                        }
                    }
                    None => {
                        if free.is_some() {
                            many = true;
                        }
                        free = Some((v, k));
                    }
                }
            }
            if ops.is_zero(&t) {
                continue;
            }
            match free {
                None => constant = ops.add(&constant, &t),
                Some((v, k)) => {
                    for &(w, _) in vars {
                        if a[w].is_none() {
                            live.push(w);
                        }
                    }
                    if many || k > 1 || single.is_some_and(|s| s != v) {
                        nonlinear = true;
                    }
                    single = Some(v);
                    linear = ops.add(&linear, &t);
                }
            }
        }
        match single {
            None => {
                live.truncate(mark);
                if ops.is_zero(&constant) {
                    Status::Done
                } else {
                    Status::Conflict
                }
            }
            Some(_) if nonlinear => Status::Pending,
            Some(v) => {
                live.truncate(mark);
                match ops.inv(&linear) {
                    Some(il) => Status::Fix(v, ops.neg(&ops.mul(&constant, &il))),
                    None if ops.is_zero(&constant) => Status::Done,
                    None => Status::Conflict,
                }
            }
        }
    }

    /// Propagates to a fixpoint. `None` on conflict; otherwise the
    /// unassigned variables that still occur in undecided polynomials.
    fn propagate(&self, a: &mut [Option<F::E>]) -> Option<Vec<usize>> {
        loop {
            let mut changed = false;
            let mut live = Vec::new();
            for p in &self.polys {
                match self.status(p, a, &mut live) {
                    Status::Conflict => return None,
                    Status::Fix(v, x) => {
                        a[v] = Some(x);
                        changed = true;
                    }
                    Status::Done | Status::Pending => {}
                }
            }
            if !changed {
                live.sort_unstable();
                live.dedup();
                return Some(live);
            }
        }
    }

    /// Searches for a full assignment extending `start`.
    ///
    /// Branching picks the live variable of least `rank` (ties by index) and
    /// tries the values of `domain(var)` in order. Variables that end up in
    /// no undecided polynomial are set to zero. `nodes` counts branch points
    /// against `budget`.
    pub fn solve(
        &self,
        start: Vec<Option<F::E>>,
        rank: &dyn Fn(usize) -> u32,
        domain: &dyn Fn(usize) -> Vec<F::E>,
        nodes: &AtomicU64,
        budget: u64,
    ) -> Result<Option<Vec<F::E>>> {
        assert_eq!(start.len(), self.arity);
        let mut a = start;
        let Some(live) = self.propagate(&mut a) else {
            return Ok(None);
        };
        let Some(&var) = live.iter().min_by_key(|&&v| (rank(v), v)) else {
            let zero = self.ops.zero();
            return Ok(Some(a.into_iter().map(|x| x.unwrap_or_else(|| zero.clone())).collect()));
        };
        for value in domain(var) {
            if nodes.fetch_add(1, Ordering::Relaxed) >= budget {
                return Err(Error::resource(format!(
                    "witness search exceeded {budget} nodes"
                )));
            }
            let mut b = a.clone();
            b[var] = Some(value);
            if let Some(sol) = self.solve(b, rank, domain, nodes, budget)? {
                return Ok(Some(sol));
            }
        }
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::mpoly::parse_poly;

    #[test]
    fn propagation_and_branching() {
        let names = ["x", "y", "z"];
        let polys = vec![
            parse_poly("x*y - 1", &names).unwrap(),
            parse_poly("z^2 - y", &names).unwrap(),
        ];
        let q = QOps;
        let s = Solver::new(&q, 3, &polys).unwrap();
        let dom = |_: usize| (-3..=3).map(Rat::from).collect::<Vec<_>>();
        let nodes = AtomicU64::new(0);
        let start = vec![Some(Rat::frac(1, 4)), None, None];
        let sol = s.solve(start, &|_| 0, &dom, &nodes, 1000).unwrap().unwrap();
        assert_eq!(sol[1], Rat::from(4));
        assert!(s.satisfied(&sol));
        let start = vec![Some(Rat::frac(1, 2)), None, None];
        assert!(s.solve(start, &|_| 0, &dom, &nodes, 1000).unwrap().is_none());
        let f = Fq::new(7).unwrap();
        let s = Solver::new(&f, 3, &polys).unwrap();
        let dom = |_: usize| (0..7).collect::<Vec<usize>>();
        let sol = s.solve(vec![Some(4), None, None], &|_| 0, &dom, &nodes, 1000).unwrap();
        assert!(sol.is_some_and(|x| s.satisfied(&x)));
    }

    #[test]
    fn budget_is_enforced() {
        let names = ["y", "z"];
        let polys = vec![parse_poly("y^2 + z^2 + 1", &names).unwrap()];
        let q = QOps;
        let s = Solver::new(&q, 2, &polys).unwrap();
        let dom = |_: usize| (0..50).map(Rat::from).collect::<Vec<_>>();
        let nodes = AtomicU64::new(0);
        let r = s.solve(vec![None, None], &|_| 0, &dom, &nodes, 100);
        assert!(matches!(r, Err(Error::Resource(_))));
    }
}
