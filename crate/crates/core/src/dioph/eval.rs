use std::sync::atomic::AtomicU64;

use super::solve::Solver;
use super::DiophFamily;
use crate::arith::fq::Fq;
use crate::error::{Error, Result};
use crate::exec::Exec;

/// Default cap on search nodes for finite-field evaluation.
pub const DEFAULT_NODE_BUDGET: u64 = 50_000_000;

/// `D(F_q)` by exhaustive existential search, as sorted tuples of field
/// element indices (the prime field is `0..p`).
///
/// Auxiliary variables fixed by a linear equation are solved rather than
/// enumerated; the remaining ones are branched over all of `F_q`.
pub fn eval_over_fq(d: &DiophFamily, q: u64, budget: u64, exec: Exec) -> Result<Vec<Vec<usize>>> {
    eval_fiber_fq(d, q, &[], budget, exec)
}

/// The points `x` with `(x, tail) ∈ D(F_q)`, where `tail` fixes the last
/// free variables.
pub fn eval_fiber_fq(
    d: &DiophFamily,
    q: u64,
    tail: &[usize],
    budget: u64,
    exec: Exec,
) -> Result<Vec<Vec<usize>>> {
    let field = Fq::new(q)?;
    let q = field.size();
    if tail.len() > d.n || tail.iter().any(|&c| c >= q) {
        return Err(Error::input("fixed coordinates must be field elements within the free block"));
    }
    let n = d.n - tail.len();
    let tuples = (q as u64)
        .checked_pow(n as u32)
        .filter(|&t| t <= budget)
        .ok_or_else(|| Error::resource(format!("{q}^{n} free tuples exceed the budget {budget}")))?;
    let solver = Solver::new(&field, d.arity(), &d.polys)?;
    let nodes = AtomicU64::new(tuples);
    let domain = |_: usize| (0..q).collect::<Vec<usize>>();
    let hits = exec.try_map_range(tuples as usize, |idx| {
        let mut start = vec![None; d.arity()];
        let mut r = idx;
        for slot in start[..n].iter_mut().rev() {
            *slot = Some(r % q);
            r /= q;
        }
        for (slot, &c) in start[n..d.n].iter_mut().zip(tail) {
            *slot = Some(c);
        }
        let found = solver.solve(start.clone(), &|_| 0, &domain, &nodes, budget)?;
        Ok(found.map(|_| start[..n].iter().map(|x| x.unwrap()).collect::<Vec<usize>>()))
    })?;
    Ok(hits.into_iter().flatten().collect())
}
