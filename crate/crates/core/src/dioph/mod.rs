//! Diophantine families: sets `{x ∈ F^n | ∃y ∈ F^m: f_1 = … = f_r = 0}`
//! kept as flat lists of polynomials over Q, with the combinators that
//! build new families from old ones.
//!
//! Combinators never share auxiliary variables between operands: every
//! operand's auxiliary block is shifted into a fresh range.

mod compile;
mod eval;
mod solve;
mod weil;

pub use compile::{
    compile_holomorphy_family, compile_r_family, holomorphy_member, BranchInfo, CompiledFamily,
    DiophMembership, HoloFamily, HoloVerdict,
};
pub use eval::{eval_fiber_fq, eval_over_fq, DEFAULT_NODE_BUDGET};
pub use solve::{FieldOps, QOps, Solver};
pub use weil::{
    power_family, radical_power_check, weil_fiber, weil_oracle, weil_restrict, AlgebraPoint, PolyAlgebra,
    RadicalReport,
};

use serde::{Deserialize, Serialize};

use crate::arith::mpoly::MPoly;
use crate::arith::rat::Rat;
use crate::arith::ratfunc::RatFunc;
use crate::error::{Error, Result};

/// A diophantine family: `n` free variables followed by `m` auxiliary ones.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiophFamily {
    pub n: usize,
    pub m: usize,
    pub polys: Vec<MPoly>,
    /// Role labels of the auxiliary variables, used by the witness search.
    #[serde(default, skip_serializing_if = "names_blank")]
    pub aux_names: Vec<String>,
}

fn names_blank(names: &[String]) -> bool {
    names.iter().all(|s| s.is_empty())
}

/// Size summary of a family.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilySize {
    pub n: usize,
    pub m: usize,
    pub polys: usize,
    pub terms: usize,
    pub max_degree: u32,
}

impl DiophFamily {
    pub fn new(n: usize, m: usize, polys: Vec<MPoly>) -> Result<Self> {
        DiophFamily::with_names(n, m, polys, vec![String::new(); m])
    }

    pub fn with_names(n: usize, m: usize, polys: Vec<MPoly>, aux_names: Vec<String>) -> Result<Self> {
        if let Some(f) = polys.iter().find(|f| f.arity() != n + m) {
            return Err(Error::input(format!(
                "polynomial of arity {} in a family with n+m = {}",
                f.arity(),
                n + m
            )));
        }
        if aux_names.len() != m {
            return Err(Error::input("one name per auxiliary variable"));
        }
        Ok(DiophFamily {
            n,
            m,
            polys,
            aux_names,
        })
    }

    /// Checks the arity invariant after deserialization.
    pub fn validated(mut self) -> Result<Self> {
        if self.aux_names.is_empty() {
            self.aux_names = vec![String::new(); self.m];
        }
        DiophFamily::with_names(self.n, self.m, self.polys, self.aux_names)
    }

    /// `F^n`.
    pub fn full(n: usize) -> Self {
        DiophFamily {
            n,
            m: 0,
            polys: Vec::new(),
            aux_names: Vec::new(),
        }
    }

    /// The zero set of `polys` in `n` variables.
    pub fn zero_set(n: usize, polys: Vec<MPoly>) -> Result<Self> {
        DiophFamily::new(n, 0, polys)
    }

    pub fn arity(&self) -> usize {
        self.n + self.m
    }

    pub fn size(&self) -> FamilySize {
        FamilySize {
            n: self.n,
            m: self.m,
            polys: self.polys.len(),
            terms: self.polys.iter().map(|f| f.num_terms()).sum(),
            max_degree: self.polys.iter().map(|f| f.total_degree()).max().unwrap_or(0),
        }
    }

    /// Whether all polynomials vanish at the full assignment `xy`.
    pub fn satisfied_by(&self, xy: &[Rat]) -> bool {
        xy.len() == self.arity() && self.polys.iter().all(|f| f.eval(xy).is_zero())
    }

    /// Embeds into a ring with the free block placed at `free_at` and the
    /// auxiliary block at `aux_at`.
    fn relocate(&self, arity: usize, free_at: usize, aux_at: usize) -> Vec<MPoly> {
        let map: Vec<usize> = (0..self.n)
            .map(|i| free_at + i)
            .chain((0..self.m).map(|j| aux_at + j))
            .collect();
        self.polys.iter().map(|f| f.embed(arity, &map)).collect()
    }

    fn check_same_n(&self, o: &DiophFamily) -> Result<()> {
        if self.n != o.n {
            return Err(Error::input(format!(
                "free dimensions differ: {} vs {}",
                self.n, o.n
            )));
        }
        Ok(())
    }

    fn joined_names(&self, o: &DiophFamily) -> Vec<String> {
        self.aux_names.iter().chain(&o.aux_names).cloned().collect()
    }

    /// `D₁ ∪ D₂` through all pairwise products `f_i·g_j`.
    pub fn union(&self, o: &DiophFamily) -> Result<DiophFamily> {
        self.check_same_n(o)?;
        let arity = self.n + self.m + o.m;
        let a = self.relocate(arity, 0, self.n);
        let b = o.relocate(arity, 0, self.n + self.m);
        let mut polys = Vec::with_capacity(a.len() * b.len());
        for f in &a {
            for g in &b {
                polys.push(f * g);
            }
        }
        DiophFamily::with_names(self.n, self.m + o.m, polys, self.joined_names(o))
    }

    /// `D₁ ∪ … ∪ D_k` through selector variables `s_i ∈ {0, 1}` with
    /// `Σ s_i = 1`, each operand's equations multiplied by its selector.
    ///
    /// Unlike [`DiophFamily::union`] the size is additive in the operands.
    /// Auxiliary order: the selectors, then each operand's block. Returns the
    /// index of each operand's first auxiliary variable.
    pub fn union_selected(parts: &[DiophFamily]) -> Result<(DiophFamily, Vec<usize>)> {
        let Some(first) = parts.first() else {
            return Err(Error::input("union of no families"));
        };
        for d in parts {
            first.check_same_n(d)?;
        }
        let n = first.n;
        let k = parts.len();
        let m = k + parts.iter().map(|d| d.m).sum::<usize>();
        let arity = n + m;
        let sel = |i: usize| MPoly::var(arity, n + i);
        let mut polys = Vec::new();
        let mut total = MPoly::constant(arity, -Rat::one());
        for i in 0..k {
            total = &total + &sel(i);
            polys.push(&sel(i).pow(2) - &sel(i));
        }
        polys.push(total);
        let mut names: Vec<String> = (0..k).map(|_| "sel".to_string()).collect();
        let mut offsets = Vec::with_capacity(k);
        let mut at = n + k;
        for (i, d) in parts.iter().enumerate() {
            offsets.push(at);
            let s = sel(i);
            polys.extend(d.relocate(arity, 0, at).iter().map(|f| &s * f));
            names.extend(d.aux_names.iter().cloned());
            at += d.m;
        }
        Ok((DiophFamily::with_names(n, m, polys, names)?, offsets))
    }

    /// `D₁ ∩ D₂` by concatenation.
    pub fn intersect(&self, o: &DiophFamily) -> Result<DiophFamily> {
        self.check_same_n(o)?;
        let arity = self.n + self.m + o.m;
        let mut polys = self.relocate(arity, 0, self.n);
        polys.extend(o.relocate(arity, 0, self.n + self.m));
        DiophFamily::with_names(self.n, self.m + o.m, polys, self.joined_names(o))
    }

    /// `D₁ × D₂` with free variables `(x₁, x₂)`.
    pub fn product(&self, o: &DiophFamily) -> DiophFamily {
        let n = self.n + o.n;
        let arity = n + self.m + o.m;
        let mut polys = self.relocate(arity, 0, n);
        polys.extend(o.relocate(arity, self.n, n + self.m));
        DiophFamily {
            n,
            m: self.m + o.m,
            polys,
            aux_names: self.joined_names(o),
        }
    }

    /// Image of `D` under `x ↦ (f_1(x), …, f_k(x))`, restricted to the points
    /// where every denominator is nonzero.
    ///
    /// Variables of the result: the image coordinates `z`, then the old free
    /// variables, the old auxiliaries, and one inverse `w_i` per denominator.
    pub fn rational_image(&self, fs: &[RatFunc]) -> Result<DiophFamily> {
        if let Some(f) = fs.iter().find(|f| f.arity() != self.n) {
            return Err(Error::input(format!(
                "map component of arity {} on a family with n = {}",
                f.arity(),
                self.n
            )));
        }
        for f in fs {
            // Coprimality is the hypothesis that makes the image diophantine
            // with these equations; re-check for hand-built fractions.
            RatFunc::new(f.num().clone(), f.den().clone())?;
        }
        let k = fs.len();
        let arity = k + self.n + self.m + k;
        let x_at = k;
        let w_at = k + self.n + self.m;
        let mut polys = self.relocate(arity, x_at, x_at + self.n);
        let x_map: Vec<usize> = (0..self.n).map(|i| x_at + i).collect();
        for (i, f) in fs.iter().enumerate() {
            let g = f.num().embed(arity, &x_map);
            let h = f.den().embed(arity, &x_map);
            let z = MPoly::var(arity, i);
            let w = MPoly::var(arity, w_at + i);
            polys.push(&g - &(&z * &h));
            polys.push(&(&w * &h) - &MPoly::one(arity));
        }
        let mut names: Vec<String> = (0..self.n).map(|_| "pre".to_string()).collect();
        names.extend(self.aux_names.iter().cloned());
        names.extend((0..k).map(|_| "inv".to_string()));
        DiophFamily::with_names(k, self.n + self.m + k, polys, names)
    }

    /// Fixes the last `r` free variables to `a`.
    pub fn section(&self, a: &[Rat], r: usize) -> Result<DiophFamily> {
        if r >= self.n {
            return Err(Error::input(format!(
                "cannot fix {r} of {} free variables",
                self.n
            )));
        }
        if a.len() != r {
            return Err(Error::input(format!("expected {r} values, got {}", a.len())));
        }
        let keep = self.n - r;
        let arity = keep + self.m;
        let subs: Vec<MPoly> = (0..self.arity())
            .map(|i| {
                if i < keep {
                    MPoly::var(arity, i)
                } else if i < self.n {
                    MPoly::constant(arity, a[i - keep].clone())
                } else {
                    MPoly::var(arity, i - r)
                }
            })
            .collect();
        let polys = self.polys.iter().map(|f| f.compose(&subs)).collect();
        DiophFamily::with_names(keep, self.m, polys, self.aux_names.clone())
    }

    /// Turns the last `k` free variables into auxiliary ones.
    pub fn project(&self, k: usize, name: &str) -> Result<DiophFamily> {
        if k > self.n {
            return Err(Error::input(format!("cannot project {k} of {} variables", self.n)));
        }
        let mut names: Vec<String> = (0..k).map(|_| name.to_string()).collect();
        names.extend(self.aux_names.iter().cloned());
        DiophFamily::with_names(self.n - k, self.m + k, self.polys.clone(), names)
    }

    /// Adds auxiliary variables and polynomials given in the enlarged ring.
    pub fn extend_aux(&self, names: &[&str], extra: Vec<MPoly>) -> Result<DiophFamily> {
        let arity = self.arity() + names.len();
        let mut polys = self.relocate(arity, 0, self.n);
        polys.extend(extra);
        let mut all = self.aux_names.clone();
        all.extend(names.iter().map(|s| s.to_string()));
        DiophFamily::with_names(self.n, self.m + names.len(), polys, all)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::mpoly::parse_poly;
    use crate::exec::Exec;

    fn fam(n: usize, m: usize, polys: &[&str]) -> DiophFamily {
        let names: Vec<String> = (1..=n)
            .map(|i| format!("X{i}"))
            .chain((1..=m).map(|j| format!("Y{j}")))
            .collect();
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let ps = polys.iter().map(|s| parse_poly(s, &refs).unwrap()).collect();
        DiophFamily::new(n, m, ps).unwrap()
    }

    fn eval(d: &DiophFamily, q: u64) -> Vec<Vec<usize>> {
        eval_over_fq(d, q, DEFAULT_NODE_BUDGET, Exec::Sequential).unwrap()
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(eval(&fam(1, 1, &["X1 - Y1^2"]), 3), vec![vec![0], vec![1]]);
        assert!(eval(&fam(1, 0, &["1"]), 7).is_empty());
        assert_eq!(eval(&DiophFamily::full(1), 4).len(), 4);
    }

    #[test]
    fn combinator_examples() {
        let a = fam(1, 0, &["X1"]);
        let b = fam(1, 0, &["X1 - 1"]);
        assert_eq!(eval(&a.union(&b).unwrap(), 5), vec![vec![0], vec![1]]);
        assert!(eval(&a.intersect(&b).unwrap(), 5).is_empty());
        assert_eq!(eval(&a.product(&b), 3), vec![vec![0, 1]]);
        let sq = fam(1, 1, &["X1 - Y1^2"]);
        for q in [2, 3, 4] {
            assert_eq!(eval(&sq.union(&sq).unwrap(), q), eval(&sq, q));
        }
        assert!(a.union(&fam(2, 0, &["X1"])).is_err());
        let c = fam(1, 1, &["X1 - Y1^3"]);
        for q in [2, 3, 4, 5, 7] {
            let (u, _) = DiophFamily::union_selected(&[a.clone(), sq.clone(), c.clone()]).unwrap();
            let pairwise = a.union(&sq).unwrap().union(&c).unwrap();
            assert_eq!(eval(&u, q), eval(&pairwise, q), "q = {q}");
        }
        let cyl = sq.product(&DiophFamily::full(1));
        assert_eq!(eval(&cyl, 5).len(), 3 * 5);
        let c4 = eval(&sq.product(&b), 4).len();
        assert_eq!(c4, eval(&sq, 4).len() * eval(&b, 4).len());
    }

    #[test]
    fn image_and_section() {
        let line = DiophFamily::full(1);
        let x = MPoly::var(1, 0);
        let sq = RatFunc::polynomial(x.pow(2));
        assert_eq!(
            eval(&line.rational_image(&[sq]).unwrap(), 5),
            vec![vec![0], vec![1], vec![4]]
        );
        let inv = RatFunc::new(MPoly::one(1), x.clone()).unwrap();
        assert_eq!(eval(&line.rational_image(&[inv]).unwrap(), 5).len(), 4);
        let empty = fam(1, 0, &["1"]);
        assert!(eval(&empty.rational_image(&[RatFunc::polynomial(x)]).unwrap(), 5).is_empty());

        let d = fam(2, 0, &["X1 - X2"]);
        let s = d.section(&[Rat::from(3)], 1).unwrap();
        assert_eq!(s, fam(1, 0, &["X1 - 3"]));
        assert!(d.section(&[Rat::from(1), Rat::from(2)], 2).is_err());

        let d1 = fam(1, 1, &["X1 - Y1^2"]);
        let d2 = fam(1, 0, &["X1 - 2"]);
        let back = d1.product(&d2).section(&[Rat::from(2)], 1).unwrap();
        assert_eq!(eval(&back, 5), eval(&d1, 5));
    }

    #[test]
    fn json_shape() {
        let d = fam(1, 1, &["X1 - Y1^2"]);
        let v = serde_json::to_value(&d).unwrap();
        assert_eq!(v["n"], 1);
        assert_eq!(v["m"], 1);
        let back: DiophFamily = serde_json::from_value(v).unwrap();
        assert_eq!(back.validated().unwrap(), d);
    }
}
