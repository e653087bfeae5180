//! Weil restriction of a family along `B_z = F[T]/(T^k + Σ z_i T^i)` and the
//! brute-force algebra oracles that check it over finite fields.

use serde::Serialize;

use super::eval::eval_fiber_fq;
use super::DiophFamily;
use crate::arith::fq::Fq;
use crate::arith::mpoly::MPoly;
use crate::error::{Error, Result};
use crate::exec::Exec;

/// `f_s ↦ f_s^l` on every defining polynomial.
pub fn power_family(d: &DiophFamily, l: u32) -> DiophFamily {
    DiophFamily {
        polys: d.polys.iter().map(|f| f.pow(l)).collect(),
        ..d.clone()
    }
}

/// Family with free variables `(x, z_0, …, z_{k−1})` whose points are the
/// `(x, z)` with `x ∈ P_f(B_z)`: some `y ∈ B_z^m` has `f(x, y) = 0` in `B_z`.
///
/// Each `Y_j` becomes `Σ_i U_{i,j} T^i`. Writing `ĥf_s` for the result,
/// `ĥf_s ≡ 0` modulo the monic `g(Z, T)` exactly when `ĥf_s = g·W_s` for a
/// polynomial `W_s` of degree `deg_T ĥf_s − k`, whose coefficients are fresh
/// auxiliaries; the coefficients in `T` of `ĥf_s − g·W_s` are the output.
///
/// Auxiliary order: `U_{i,j}` (row `i`, column `j`), then one `W` block per
/// input polynomial.
pub fn weil_restrict(d: &DiophFamily, k: usize) -> Result<DiophFamily> {
    if k == 0 {
        return Err(Error::input("the algebra degree k must be at least 1"));
    }
    let (n, m) = (d.n, d.m);
    let u_at = n + k;
    let u_count = k * m;
    let u = |i: usize, j: usize| u_at + i * m + j;
    let base = n + k + u_count;
    // Work in base + (W slots) + 1 variables; T is the last one. The W count
    // depends on the T-degrees, so the substitution is done once in a ring
    // with T at `base` and re-embedded afterwards.
    let sub_arity = base + 1;
    let t_sub = base;
    let subs = |i: usize| -> MPoly {
        if i < n {
            MPoly::var(sub_arity, i)
        } else {
            let j = i - n;
            let mut acc = MPoly::zero(sub_arity);
            for r in 0..k {
                acc = &acc + &(&MPoly::var(sub_arity, u(r, j)) * &MPoly::var(sub_arity, t_sub).pow(r as u32));
            }
            acc
        }
    };
    let hats: Vec<MPoly> = d.polys.iter().map(|f| f.compose_sparse(sub_arity, subs)).collect();
    let degrees: Vec<usize> = hats.iter().map(|h| h.degree_in(t_sub) as usize).collect();
    let w_counts: Vec<usize> = hats
        .iter()
        .zip(&degrees)
        .map(|(h, &ds)| if h.is_zero() || ds < k { 0 } else { ds - k + 1 })
        .collect();
    let w_total: usize = w_counts.iter().sum();
    let arity = base + w_total + 1;
    let t = arity - 1;
    let lift: Vec<usize> = (0..base).chain([t]).collect();
    let tv = MPoly::var(arity, t);
    let mut g = tv.pow(k as u32);
    for i in 0..k {
        g = &g + &(&MPoly::var(arity, n + i) * &tv.pow(i as u32));
    }
    let mut polys = Vec::new();
    let mut w_at = base;
    for (s, h) in hats.iter().enumerate() {
        let mut f = h.embed(arity, &lift);
        if w_counts[s] > 0 {
            let mut w = MPoly::zero(arity);
            for l in 0..w_counts[s] {
                w = &w + &(&MPoly::var(arity, w_at + l) * &tv.pow(l as u32));
            }
            f = &f - &(&g * &w);
        }
        w_at += w_counts[s];
        let drop_t: Vec<usize> = (0..arity).map(|i| if i == t { 0 } else { i }).collect();
        for c in f.coefficients_in(t) {
            if !c.is_zero() {
                polys.push(c.embed(arity - 1, &drop_t));
            }
        }
    }
    let mut names = Vec::with_capacity(u_count + w_total);
    for _ in 0..k {
        for j in 0..m {
            names.push(format!("U:{}", d.aux_names.get(j).map(String::as_str).unwrap_or("")));
        }
    }
    names.extend((0..w_total).map(|_| "W".to_string()));
    DiophFamily::with_names(n + k, u_count + w_total, polys, names)
}

/// Parameters of `B_z = F_q[T]/(T^k + Σ z_i T^i)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AlgebraPoint {
    pub z: Vec<usize>,
}

impl AlgebraPoint {
    pub fn algebra<'a>(&self, field: &'a Fq) -> PolyAlgebra<'a> {
        let mut modulus = self.z.clone();
        modulus.push(1);
        PolyAlgebra::new(field, modulus)
    }
}

/// `F_q[T]` modulo a monic polynomial; elements are coefficient vectors of
/// length `deg`.
#[derive(Clone, Debug)]
pub struct PolyAlgebra<'a> {
    field: &'a Fq,
    modulus: Vec<usize>,
}

impl<'a> PolyAlgebra<'a> {
    /// `modulus` lists coefficients from the constant term up, ending in 1.
    pub fn new(field: &'a Fq, modulus: Vec<usize>) -> Self {
        assert_eq!(modulus.last(), Some(&1), "modulus must be monic");
        assert!(modulus.len() >= 2, "modulus must have positive degree");
        PolyAlgebra { field, modulus }
    }

    pub fn dim(&self) -> usize {
        self.modulus.len() - 1
    }

    pub fn size(&self) -> Option<u64> {
        (self.field.size() as u64).checked_pow(self.dim() as u32)
    }

    pub fn element(&self, mut idx: u64) -> Vec<usize> {
        let q = self.field.size() as u64;
        (0..self.dim())
            .map(|_| {
                let c = (idx % q) as usize;
                idx /= q;
                c
            })
            .collect()
    }

    pub fn scalar(&self, c: usize) -> Vec<usize> {
        let mut v = vec![0; self.dim()];
        v[0] = c;
        v
    }

    pub fn add(&self, a: &[usize], b: &[usize]) -> Vec<usize> {
        a.iter().zip(b).map(|(&x, &y)| self.field.add(x, y)).collect()
    }

    pub fn mul(&self, a: &[usize], b: &[usize]) -> Vec<usize> {
        let f = self.field;
        let k = self.dim();
        let mut prod = vec![0; 2 * k - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = f.add(prod[i + j], f.mul(x, y));
            }
        }
        for top in (k..prod.len()).rev() {
            let c = prod[top];
            if c == 0 {
                continue;
            }
            prod[top] = 0;
            for (i, &mi) in self.modulus[..k].iter().enumerate() {
                let idx = top - k + i;
                prod[idx] = f.sub(prod[idx], f.mul(c, mi));
            }
        }
        prod.truncate(k);
        prod
    }

    pub fn is_zero(&self, a: &[usize]) -> bool {
        a.iter().all(|&c| c == 0)
    }

    /// Evaluates `f` at points of the algebra.
    pub fn eval(&self, f: &MPoly, point: &[Vec<usize>]) -> Result<Vec<usize>> {
        let mut acc = vec![0; self.dim()];
        for (m, c) in f.monos() {
            let mut t = self.scalar(self.field.from_rat(c)?);
            for &(i, k) in m.pairs() {
                for _ in 0..k {
                    t = self.mul(&t, &point[i as usize]);
                }
            }
            acc = self.add(&acc, &t);
        }
        Ok(acc)
    }

    /// `F_q^n ∩ P_f(B)`: the `x ∈ F_q^n` with some `y ∈ B^m` making every
    /// polynomial vanish in `B`.
    pub fn points(&self, d: &DiophFamily, budget: u64) -> Result<Vec<Vec<usize>>> {
        let q = self.field.size() as u64;
        let b = self
            .size()
            .ok_or_else(|| Error::resource("algebra too large"))?;
        let xs = q.checked_pow(d.n as u32);
        let ys = b.checked_pow(d.m as u32);
        let total = xs.zip(ys).and_then(|(a, c)| a.checked_mul(c));
        if total.is_none_or(|t| t > budget) {
            return Err(Error::resource(format!(
                "{q}^{} points times {b}^{} witnesses exceed the budget {budget}",
                d.n, d.m
            )));
        }
        let (xs, ys) = (xs.unwrap(), ys.unwrap());
        let mut out = Vec::new();
        for xi in 0..xs {
            let mut r = xi;
            let mut x = vec![0usize; d.n];
            for slot in x.iter_mut().rev() {
                *slot = (r % q) as usize;
                r /= q;
            }
            let mut found = false;
            for yi in 0..ys {
                let mut point: Vec<Vec<usize>> = x.iter().map(|&c| self.scalar(c)).collect();
                let mut r = yi;
                for _ in 0..d.m {
                    point.push(self.element(r % b));
                    r /= b;
                }
                let mut ok = true;
                for f in &d.polys {
                    if !self.is_zero(&self.eval(f, &point)?) {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    found = true;
                    break;
                }
            }
            if found {
                out.push(x);
            }
        }
        Ok(out)
    }
}

/// `{x : ∃y ∈ B_z^m, f(x, y) = 0 in B_z}` by direct algebra arithmetic.
pub fn weil_oracle(d: &DiophFamily, q: u64, z: &AlgebraPoint, budget: u64) -> Result<Vec<Vec<usize>>> {
    let field = Fq::new(q)?;
    z.algebra(&field).points(d, budget)
}

/// Fiber of a Weil restriction over `z`, through the family's own equations.
pub fn weil_fiber(w: &DiophFamily, q: u64, z: &AlgebraPoint, budget: u64, exec: Exec) -> Result<Vec<Vec<usize>>> {
    eval_fiber_fq(w, q, &z.z, budget, exec)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RadicalReport {
    pub l: u32,
    /// Monic irreducible factors of the modulus (coefficients from `T^0`).
    pub maximal_ideals: Vec<Vec<usize>>,
    /// `F^n ∩ P_{f^l}(B)`.
    pub left: Vec<Vec<usize>>,
    /// `∩_m F^n ∩ P_f(B/m)`.
    pub right: Vec<Vec<usize>>,
    pub agree: bool,
}

/// Compares `F^n ∩ P_{f^l}(B)` with `∩_m (F^n ∩ P_f(B/m))` for
/// `B = F_q[T]/(g)`, both by brute force. Disagreement is an invariant
/// violation.
pub fn radical_power_check(d: &DiophFamily, l: u32, q: u64, g: &[usize], budget: u64) -> Result<RadicalReport> {
    let field = Fq::new(q)?;
    if g.len() < 2 || g.last() != Some(&1) || g.iter().any(|&c| c >= field.size()) {
        return Err(Error::input("modulus must be a monic polynomial of positive degree over F_q"));
    }
    let dim = g.len() - 1;
    if dim > l as usize {
        return Err(Error::precondition(format!(
            "dim B = {dim} exceeds l = {l}; the radical need not vanish at power l"
        )));
    }
    let b = PolyAlgebra::new(&field, g.to_vec());
    let left = b.points(&power_family(d, l), budget)?;
    let maximal = irreducible_factors(&field, g);
    let mut right: Option<Vec<Vec<usize>>> = None;
    for phi in &maximal {
        let pts = PolyAlgebra::new(&field, phi.clone()).points(d, budget)?;
        right = Some(match right {
            None => pts,
            Some(r) => r.into_iter().filter(|x| pts.contains(x)).collect(),
        });
    }
    let right = right.unwrap_or_default();
    let agree = left == right;
    if !agree {
        return Err(Error::invariant(format!(
            "F^n ∩ P_(f^{l})(B) = {left:?} but the residue fields give {right:?}"
        )));
    }
    Ok(RadicalReport {
        l,
        maximal_ideals: maximal,
        left,
        right,
        agree,
    })
}

fn poly_rem(f: &Fq, a: &[usize], m: &[usize]) -> Vec<usize> {
    let mut r = a.to_vec();
    let k = m.len() - 1;
    while r.len() > k {
        let c = r.pop().unwrap();
        if c != 0 {
            let top = r.len();
            for i in 0..k {
                let idx = top - k + i;
                r[idx] = f.sub(r[idx], f.mul(c, m[i]));
            }
        }
    }
    r
}

fn divides(f: &Fq, d: &[usize], a: &[usize]) -> bool {
    poly_rem(f, a, d).iter().all(|&c| c == 0)
}

fn monic_polys(f: &Fq, deg: usize) -> impl Iterator<Item = Vec<usize>> + '_ {
    let q = f.size();
    (0..q.pow(deg as u32)).map(move |mut idx| {
        let mut v: Vec<usize> = (0..deg)
            .map(|_| {
                let c = idx % q;
                idx /= q;
                c
            })
            .collect();
        v.push(1);
        v
    })
}

/// Distinct monic irreducible divisors of `g`, by exhaustive trial.
fn irreducible_factors(f: &Fq, g: &[usize]) -> Vec<Vec<usize>> {
    let k = g.len() - 1;
    let mut out = Vec::new();
    for deg in 1..=k {
        for phi in monic_polys(f, deg) {
            let reducible = (1..=deg / 2).any(|e| monic_polys(f, e).any(|psi| divides(f, &psi, &phi)));
            if !reducible && divides(f, &phi, g) {
                out.push(phi);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::mpoly::parse_poly;
    use crate::dioph::{eval_over_fq, DEFAULT_NODE_BUDGET};

    fn sq() -> DiophFamily {
        DiophFamily::new(1, 1, vec![parse_poly("X - Y^2", &["X", "Y"]).unwrap()]).unwrap()
    }

    fn fiber(w: &DiophFamily, q: u64, z: &[usize]) -> Vec<Vec<usize>> {
        let z = AlgebraPoint { z: z.to_vec() };
        weil_fiber(w, q, &z, DEFAULT_NODE_BUDGET, Exec::Sequential).unwrap()
    }

    #[test]
    fn degree_one_is_the_field() {
        let d = DiophFamily::new(1, 1, vec![parse_poly("X - Y", &["X", "Y"]).unwrap()]).unwrap();
        let w = weil_restrict(&d, 1).unwrap();
        assert_eq!(w.n, 2);
        assert_eq!(eval_over_fq(&w, 3, DEFAULT_NODE_BUDGET, Exec::Sequential).unwrap().len(), 9);
    }

    #[test]
    fn squares_in_quadratic_algebras() {
        let w = weil_restrict(&sq(), 2).unwrap();
        // T^2 + 1 is irreducible over F_3: every element of F_3 is a square in F_9.
        assert_eq!(fiber(&w, 3, &[1, 0]), vec![vec![0], vec![1], vec![2]]);
        // T^2: the dual numbers over F_3.
        assert_eq!(fiber(&w, 3, &[0, 0]), vec![vec![0], vec![1]]);
        for z in [[1, 0], [0, 0], [2, 0], [1, 1]] {
            let pt = AlgebraPoint { z: z.to_vec() };
            assert_eq!(fiber(&w, 3, &z), weil_oracle(&sq(), 3, &pt, 1 << 20).unwrap());
        }
    }

    #[test]
    fn radical_examples() {
        let r = radical_power_check(&sq(), 2, 3, &[0, 0, 1], 1 << 20).unwrap();
        assert_eq!(r.left, vec![vec![0], vec![1]]);
        assert_eq!(r.maximal_ideals, vec![vec![0, 1]]);
        let r = radical_power_check(&sq(), 2, 3, &[2, 0, 1], 1 << 20).unwrap();
        assert_eq!(r.maximal_ideals.len(), 2);
        assert!(r.agree);
        let r = radical_power_check(&sq(), 1, 5, &[2, 1], 1 << 20).unwrap();
        assert!(r.agree);
        assert!(matches!(
            radical_power_check(&sq(), 1, 3, &[0, 0, 1], 1 << 20),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn one_quotient_per_equation() {
        // In F_9 = F_3[T]/(T^2 + 1), Y^2 + 1 = 0 forces Y = ±T and then
        // X = Y^2 = 2. The two equations leave quotients 1 and −1 by the
        // modulus, so a single quotient block shared by both loses the point.
        let names = ["X", "Y"];
        let d = DiophFamily::new(
            1,
            1,
            vec![
                parse_poly("Y^2 + 1", &names).unwrap(),
                parse_poly("X - Y^2", &names).unwrap(),
            ],
        )
        .unwrap();
        let w = weil_restrict(&d, 2).unwrap();
        assert_eq!(w.m, 4);
        let pt = AlgebraPoint { z: vec![1, 0] };
        assert_eq!(fiber(&w, 3, &[1, 0]), vec![vec![2]]);
        assert_eq!(weil_oracle(&d, 3, &pt, 1 << 20).unwrap(), vec![vec![2]]);
        let a = w.arity();
        let tie = &MPoly::var(a, a - 2) - &MPoly::var(a, a - 1);
        let mut shared = w.clone();
        shared.polys.push(tie);
        assert!(fiber(&shared, 3, &[1, 0]).is_empty());
    }
}
