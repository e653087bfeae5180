use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::fppoly::{factor_mod_p, FpPoly};
use super::fp::reduce_int;
use super::primes::{inv_mod, is_prime};
use super::rat::Rat;
use crate::error::{Error, Result};

/// Largest degree accepted by [`factor_over_q`].
pub const FACTOR_DEGREE_CAP: usize = 12;

/// Dense univariate polynomial over Q, coefficients low to high with no
/// trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct QPoly {
    c: Vec<Rat>,
}

impl QPoly {
    pub fn new(coeffs: Vec<Rat>) -> Self {
        let mut c = coeffs;
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        QPoly { c }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        QPoly::new(coeffs.iter().map(|&v| Rat::from(v)).collect())
    }

    pub fn from_bigints(coeffs: &[BigInt]) -> Self {
        QPoly::new(coeffs.iter().cloned().map(Rat::from_bigint).collect())
    }

    pub fn zero() -> Self {
        QPoly { c: Vec::new() }
    }

    pub fn one() -> Self {
        QPoly::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Self {
        QPoly::new(vec![c])
    }

    pub fn x() -> Self {
        QPoly::from_ints(&[0, 1])
    }

    /// `c·T^k`.
    pub fn monomial(c: Rat, k: usize) -> Self {
        let mut v = vec![Rat::zero(); k + 1];
        v[k] = c;
        QPoly::new(v)
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.c
    }

    pub fn coeff(&self, i: usize) -> Rat {
        self.c.get(i).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    /// Degree with the zero polynomial mapped to 0.
    pub fn deg0(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn lead(&self) -> Rat {
        self.c.last().cloned().unwrap_or_default()
    }

    pub fn add(&self, o: &QPoly) -> QPoly {
        let n = self.c.len().max(o.c.len());
        QPoly::new((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }

    pub fn neg(&self) -> QPoly {
        QPoly::new(self.c.iter().map(|v| -v).collect())
    }

    pub fn sub(&self, o: &QPoly) -> QPoly {
        let n = self.c.len().max(o.c.len());
        QPoly::new((0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }

    pub fn scale(&self, k: &Rat) -> QPoly {
        QPoly::new(self.c.iter().map(|v| v * k).collect())
    }

    pub fn mul(&self, o: &QPoly) -> QPoly {
        if self.is_zero() || o.is_zero() {
            return QPoly::zero();
        }
        let mut acc = vec![Rat::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                acc[i + j] += &(a * b);
            }
        }
        QPoly::new(acc)
    }

    pub fn pow(&self, e: u32) -> QPoly {
        let mut acc = QPoly::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn divrem(&self, d: &QPoly) -> (QPoly, QPoly) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let dd = d.c.len() - 1;
        if self.c.len() < d.c.len() {
            return (QPoly::zero(), self.clone());
        }
        let inv = d.lead().inv().unwrap();
        let mut r = self.c.clone();
        let mut q = vec![Rat::zero(); r.len() - dd];
        for i in (0..q.len()).rev() {
            let coef = &r[i + dd] * &inv;
            if coef.is_zero() {
                continue;
            }
            for (j, dj) in d.c.iter().enumerate() {
                r[i + j] -= &(&coef * dj);
            }
            q[i] = coef;
        }
        (QPoly::new(q), QPoly::new(r))
    }

    pub fn rem(&self, d: &QPoly) -> QPoly {
        self.divrem(d).1
    }

    /// Exact quotient; `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &QPoly) -> Option<QPoly> {
        let (q, r) = self.divrem(d);
        r.is_zero().then_some(q)
    }

    pub fn monic(&self) -> QPoly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&self.lead().inv().unwrap())
    }

    pub fn gcd(&self, o: &QPoly) -> QPoly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b).monic();
            a = b;
            b = r;
        }
        a.monic()
    }

    /// `(g, s, t)` with `s·self + t·o = g`, `g` the monic gcd.
    pub fn xgcd(&self, o: &QPoly) -> (QPoly, QPoly, QPoly) {
        let (mut r0, mut r1) = (self.clone(), o.clone());
        let (mut s0, mut s1) = (QPoly::one(), QPoly::zero());
        let (mut t0, mut t1) = (QPoly::zero(), QPoly::one());
        while !r1.is_zero() {
            let (q, r) = r0.divrem(&r1);
            r0 = r1;
            r1 = r;
            let s2 = s0.sub(&q.mul(&s1));
            s0 = s1;
            s1 = s2;
            let t2 = t0.sub(&q.mul(&t1));
            t0 = t1;
            t1 = t2;
        }
        if r0.is_zero() {
            return (r0, s0, t0);
        }
        let inv = r0.lead().inv().unwrap();
        (r0.scale(&inv), s0.scale(&inv), t0.scale(&inv))
    }

    pub fn derivative(&self) -> QPoly {
        QPoly::new(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, v)| v * &Rat::from(i as i64))
                .collect(),
        )
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.c.iter().rev() {
            acc = &acc * x + c;
        }
        acc
    }

    /// `self(other(T))`.
    pub fn compose(&self, other: &QPoly) -> QPoly {
        let mut acc = QPoly::zero();
        for c in self.c.iter().rev() {
            acc = acc.mul(other).add(&QPoly::constant(c.clone()));
        }
        acc
    }

    /// Least common denominator of the coefficients.
    pub fn denominator_lcm(&self) -> BigInt {
        self.c
            .iter()
            .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
    }

    /// Primitive integer polynomial with positive leading coefficient that
    /// is a rational multiple of `self`.
    pub fn primitive_part(&self) -> Vec<BigInt> {
        if self.is_zero() {
            return Vec::new();
        }
        let l = self.denominator_lcm();
        let ints: Vec<BigInt> = self
            .c
            .iter()
            .map(|v| v.numer() * (&l / v.denom()))
            .collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
        let sign = if ints.last().unwrap().is_negative() {
            -BigInt::one()
        } else {
            BigInt::one()
        };
        ints.into_iter().map(|v| v / &g * &sign).collect()
    }

    /// Resultant by the Euclidean recurrence.
    pub fn resultant(&self, o: &QPoly) -> Rat {
        if self.is_zero() || o.is_zero() {
            return Rat::zero();
        }
        let (m, n) = (self.deg0(), o.deg0());
        if n == 0 {
            return o.lead().pow(m as u32);
        }
        if m == 0 {
            return self.lead().pow(n as u32);
        }
        let r = self.rem(o);
        if r.is_zero() {
            return Rat::zero();
        }
        let sign = if (m * n) % 2 == 1 { -Rat::one() } else { Rat::one() };
        sign * o.lead().pow((m - r.deg0()) as u32) * o.resultant(&r)
    }

    pub fn discriminant(&self) -> Rat {
        let n = self.deg0();
        let r = self.resultant(&self.derivative());
        let sign = if (n * (n.saturating_sub(1)) / 2) % 2 == 1 {
            -Rat::one()
        } else {
            Rat::one()
        };
        sign * r / self.lead()
    }

    /// Rational roots, ascending.
    pub fn rational_roots(&self) -> Result<Vec<Rat>> {
        let fac = factor_over_q(self)?;
        let mut roots: Vec<Rat> = fac
            .factors
            .iter()
            .filter(|(g, _)| g.deg0() == 1)
            .map(|(g, _)| -g.coeff(0))
            .collect();
        roots.sort();
        Ok(roots)
    }

    pub fn to_string_in(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, c) in self.c.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mono = match i {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{i}"),
            };
            if mono.is_empty() {
                out.push_str(&a.to_string());
            } else if a.is_one() {
                out.push_str(&mono);
            } else {
                out.push_str(&format!("{a}*{mono}"));
            }
        }
        out
    }
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_string_in("T"))
    }
}

impl fmt::Debug for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QPoly({self})")
    }
}

/// Factorization over Q: `unit · Π factor^mult` with monic irreducible
/// factors sorted by degree then coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QFactorization {
    pub unit: Rat,
    pub factors: Vec<(QPoly, u32)>,
}

impl QFactorization {
    pub fn expand(&self) -> QPoly {
        self.factors
            .iter()
            .fold(QPoly::constant(self.unit.clone()), |acc, (g, m)| {
                acc.mul(&g.pow(*m))
            })
    }
}

/// Yun's squarefree decomposition of a nonzero polynomial over Q: monic,
/// squarefree, pairwise coprime `g_i` with `monic(f) = Π g_i^i`.
pub fn squarefree_q(f: &QPoly) -> Vec<(QPoly, u32)> {
    let mut out = Vec::new();
    if f.deg0() == 0 {
        return out;
    }
    let f = f.monic();
    let fp = f.derivative();
    let a0 = f.gcd(&fp);
    let mut b = f.divrem(&a0).0;
    let mut c = fp.divrem(&a0).0;
    let mut d = c.sub(&b.derivative());
    let mut i = 1;
    loop {
        let a = b.gcd(&d);
        if a.deg0() > 0 {
            out.push((a.clone(), i));
        }
        b = b.divrem(&a).0;
        if b.deg0() == 0 {
            break;
        }
        c = d.divrem(&a).0;
        d = c.sub(&b.derivative());
        i += 1;
    }
    out
}

pub fn factor_over_q(f: &QPoly) -> Result<QFactorization> {
    if f.is_zero() {
        return Err(Error::input("cannot factor the zero polynomial"));
    }
    let n = f.deg0();
    if n > FACTOR_DEGREE_CAP {
        return Err(Error::unsupported(format!(
            "degree {n} exceeds the factorization cap {FACTOR_DEGREE_CAP}"
        )));
    }
    let mut factors = Vec::new();
    for (g, m) in squarefree_q(f) {
        for h in factor_squarefree(&g.primitive_part()) {
            factors.push((QPoly::from_bigints(&h).monic(), m));
        }
    }
    factors.sort_by(|a, b| (a.0.deg0(), &a.0, a.1).cmp(&(b.0.deg0(), &b.0, b.1)));
    let out = QFactorization {
        unit: f.lead(),
        factors,
    };
    if &out.expand() != f {
        return Err(Error::invariant(format!(
            "factorization of {f} does not multiply back"
        )));
    }
    Ok(out)
}

pub(crate) fn int_poly_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn to_fp(a: &[BigInt], p: u64) -> FpPoly {
    FpPoly::new(p, a.iter().map(|v| reduce_int(v, p)))
}

fn from_fp(a: &FpPoly) -> Vec<BigInt> {
    a.coeffs().iter().map(|&v| BigInt::from(v)).collect()
}

fn symmetric_mod(a: &[BigInt], m: &BigInt) -> Vec<BigInt> {
    let half = m / 2;
    let mut v: Vec<BigInt> = a
        .iter()
        .map(|x| {
            let r = x.mod_floor(m);
            if r > half {
                r - m
            } else {
                r
            }
        })
        .collect();
    while v.last().is_some_and(|x| x.is_zero()) {
        v.pop();
    }
    v
}

/// Exact division of integer polynomials, `None` if not exact over Z.
fn int_div_exact(a: &[BigInt], b: &[BigInt]) -> Option<Vec<BigInt>> {
    if a.len() < b.len() {
        return if a.iter().all(|x| x.is_zero()) {
            Some(Vec::new())
        } else {
            None
        };
    }
    let lb = b.last().unwrap();
    let mut r = a.to_vec();
    let mut q = vec![BigInt::zero(); a.len() - b.len() + 1];
    for i in (0..q.len()).rev() {
        let top = &r[i + b.len() - 1];
        if !top.is_multiple_of(lb) {
            return None;
        }
        let coef = top / lb;
        for (j, bj) in b.iter().enumerate() {
            r[i + j] -= &coef * bj;
        }
        q[i] = coef;
    }
    r.iter().all(|x| x.is_zero()).then_some(q)
}

/// Lifts `f ≡ g·h (mod p)` with `g` monic to `f ≡ G·H (mod p^k)`, returning `G`.
pub(crate) fn hensel_lift_factor(f: &[BigInt], g: &FpPoly, h: &FpPoly, p: u64, k: u32) -> Vec<BigInt> {
    let (one, s, t) = g.xgcd(h);
    debug_assert!(one.is_one());
    let pb = BigInt::from(p);
    let mut gz = from_fp(g);
    let mut hz = from_fp(h);
    let mut pm = pb.clone();
    for _ in 1..k {
        let prod = int_poly_mul(&gz, &hz);
        let n = f.len().max(prod.len());
        let diff: Vec<BigInt> = (0..n)
            .map(|i| {
                let a = f.get(i).cloned().unwrap_or_default();
                let b = prod.get(i).cloned().unwrap_or_default();
                (a - b) / &pm
            })
            .collect();
        let e = to_fp(&diff, p);
        let (q, dg) = t.mul(&e).divrem(g);
        let dh = s.mul(&e).add(&q.mul(h));
        let dgz = from_fp(&dg);
        let dhz = from_fp(&dh);
        for (i, v) in dgz.iter().enumerate() {
            if i >= gz.len() {
                gz.push(BigInt::zero());
            }
            gz[i] += v * &pm;
        }
        for (i, v) in dhz.iter().enumerate() {
            if i >= hz.len() {
                hz.push(BigInt::zero());
            }
            hz[i] += v * &pm;
        }
        pm *= &pb;
    }
    gz
}

/// Irreducible factors (primitive, positive leading coefficient) of a
/// squarefree primitive integer polynomial, via factorization modulo a
/// good prime, Hensel lifting and subset recombination.
fn factor_squarefree(f: &[BigInt]) -> Vec<Vec<BigInt>> {
    let n = f.len() - 1;
    if n <= 1 {
        return vec![f.to_vec()];
    }
    let lc = f.last().unwrap().clone();
    // Pick the good prime with the fewest modular factors among a few tries.
    let mut best: Option<(u64, Vec<FpPoly>)> = None;
    let mut tried = 0;
    let mut p = 2u64;
    while tried < 6 {
        p += 1;
        if !is_prime(p) || reduce_int(&lc, p) == 0 {
            continue;
        }
        let fp = to_fp(f, p);
        if !fp.gcd(&fp.derivative()).is_one() {
            continue;
        }
        tried += 1;
        let fac = factor_mod_p(&fp).expect("nonzero");
        let gs: Vec<FpPoly> = fac.factors.into_iter().map(|(g, _)| g).collect();
        if gs.len() == 1 {
            return vec![f.to_vec()];
        }
        if best.as_ref().is_none_or(|(_, b)| gs.len() < b.len()) {
            best = Some((p, gs));
        }
    }
    let (p, gs) = best.unwrap();
    // Coefficient bound for factors of lc·f (Mignotte-style, via the 1-norm).
    let norm1: BigInt = f.iter().map(|c| c.abs()).sum();
    let bound = (BigInt::one() << n) * &norm1 * lc.abs() * 2;
    let pb = BigInt::from(p);
    let mut k = 1u32;
    let mut pk = pb.clone();
    while pk <= bound {
        pk *= &pb;
        k += 1;
    }
    let fbar = to_fp(f, p);
    let lifted: Vec<Vec<BigInt>> = gs
        .iter()
        .map(|g| {
            let h = fbar.divrem(g).0;
            hensel_lift_factor(f, g, &h, p, k)
        })
        .collect();

    let mut remaining: Vec<usize> = (0..lifted.len()).collect();
    let mut cur = f.to_vec();
    let mut out = Vec::new();
    let mut size = 1;
    while 2 * size <= remaining.len() {
        let mut found = None;
        for subset in subsets(remaining.len(), size) {
            let lcc = cur.last().unwrap().clone();
            let mut cand = vec![lcc];
            for &i in &subset {
                cand = int_poly_mul(&cand, &lifted[remaining[i]]);
            }
            let cand = symmetric_mod(&cand, &pk);
            let prim = QPoly::from_bigints(&cand).primitive_part();
            if prim.len() < 2 {
                continue;
            }
            if let Some(q) = int_div_exact(&cur, &prim) {
                found = Some((subset, prim, q));
                break;
            }
        }
        match found {
            Some((subset, prim, q)) => {
                out.push(prim);
                cur = q;
                remaining = remaining
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| !subset.contains(i))
                    .map(|(_, &r)| r)
                    .collect();
            }
            None => size += 1,
        }
    }
    out.push(QPoly::from_bigints(&cur).primitive_part());
    out
}

/// All `k`-subsets of `0..n` in lexicographic order.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Irreducibility over Q.
pub fn is_irreducible_q(f: &QPoly) -> Result<bool> {
    let fac = factor_over_q(f)?;
    Ok(f.deg0() >= 1 && fac.factors.len() == 1 && fac.factors[0].1 == 1)
}

/// Reduces a polynomial with p-integral coefficients modulo `p`.
pub fn reduce_qpoly(f: &QPoly, p: u64) -> Result<FpPoly> {
    FpPoly::from_rats(p, f.coeffs())
}

/// Integer lift of an `F_p` polynomial with coefficients in `[0, p)`.
pub fn lift_fppoly(g: &FpPoly) -> QPoly {
    QPoly::new(g.coeffs().iter().map(|&v| Rat::from(v)).collect())
}

#[allow(dead_code)]
fn small_inverse(a: &BigInt, p: u64) -> Option<u64> {
    inv_mod(a.mod_floor(&BigInt::from(p)).to_i128()?, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factors(c: &[i64]) -> Vec<(String, u32)> {
        factor_over_q(&QPoly::from_ints(c))
            .unwrap()
            .factors
            .into_iter()
            .map(|(g, m)| (g.to_string(), m))
            .collect()
    }

    #[test]
    fn spec_examples() {
        assert_eq!(
            factors(&[-1, 0, 0, 0, 1]),
            vec![
                ("T - 1".to_string(), 1),
                ("T + 1".to_string(), 1),
                ("T^2 + 1".to_string(), 1)
            ]
        );
        assert_eq!(factors(&[-2, 0, 1]), vec![("T^2 - 2".to_string(), 1)]);
        let r = factor_over_q(&QPoly::from_ints(&[0, 3])).unwrap();
        assert_eq!(r.unit, Rat::from(3));
        assert_eq!(r.factors, vec![(QPoly::x(), 1)]);
    }

    #[test]
    fn cap_and_zero() {
        let mut c = vec![0i64; 14];
        c[13] = 1;
        c[0] = 1;
        assert!(matches!(
            factor_over_q(&QPoly::from_ints(&c)),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(factor_over_q(&QPoly::zero()), Err(Error::Input(_))));
    }

    #[test]
    fn swinnerton_dyer_style_recombination() {
        // T^4 - 10T^2 + 1 is irreducible over Q but splits modulo every prime.
        assert_eq!(
            factors(&[1, 0, -10, 0, 1]),
            vec![("T^4 - 10*T^2 + 1".to_string(), 1)]
        );
        // (T^2-2)(T^2-3)(T^2+T+1)
        let f = QPoly::from_ints(&[-2, 0, 1])
            .mul(&QPoly::from_ints(&[-3, 0, 1]))
            .mul(&QPoly::from_ints(&[1, 1, 1]));
        let r = factor_over_q(&f).unwrap();
        assert_eq!(r.factors.len(), 3);
    }

    #[test]
    fn repeated_and_rational_factors() {
        // (2T - 1)^2 (T + 3)^3 / 5
        let f = QPoly::from_ints(&[-1, 2])
            .pow(2)
            .mul(&QPoly::from_ints(&[3, 1]).pow(3))
            .scale(&Rat::frac(1, 5));
        let r = factor_over_q(&f).unwrap();
        assert_eq!(r.unit, Rat::frac(4, 5));
        assert_eq!(
            r.factors,
            vec![
                (QPoly::new(vec![Rat::frac(-1, 2), Rat::one()]), 2),
                (QPoly::from_ints(&[3, 1]), 3)
            ]
        );
    }

    #[test]
    fn resultant_and_discriminant() {
        let f = QPoly::from_ints(&[1, 0, 1]);
        assert_eq!(f.discriminant(), Rat::from(-4));
        // Res(T^2+1, T-2) = 5
        assert_eq!(f.resultant(&QPoly::from_ints(&[-2, 1])), Rat::from(5));
        assert_eq!(
            QPoly::from_ints(&[-2, 1]).resultant(&f),
            Rat::from(5)
        );
    }

    #[test]
    fn rational_roots_found() {
        let f = QPoly::from_ints(&[-6, 1, 1]); // (T+3)(T-2)
        assert_eq!(f.rational_roots().unwrap(), vec![Rat::from(-3), Rat::from(2)]);
    }
}
