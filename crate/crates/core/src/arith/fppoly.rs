use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::fp::reduce_rat;
use super::primes::{inv_mod, mul_mod, pow_mod, require_prime};
use super::rat::Rat;
use crate::error::{Error, Result};

/// Dense univariate polynomial over `F_p`, coefficients low to high with no
/// trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FpPoly {
    p: u64,
    c: Vec<u64>,
}

impl FpPoly {
    pub fn new(p: u64, coeffs: impl IntoIterator<Item = u64>) -> Self {
        let mut c: Vec<u64> = coeffs.into_iter().map(|v| v % p).collect();
        while c.last() == Some(&0) {
            c.pop();
        }
        FpPoly { p, c }
    }

    pub fn from_signed(p: u64, coeffs: &[i64]) -> Self {
        FpPoly::new(
            p,
            coeffs.iter().map(|&v| (v as i128).rem_euclid(p as i128) as u64),
        )
    }

    pub fn from_rats(p: u64, coeffs: &[Rat]) -> Result<Self> {
        let c = coeffs
            .iter()
            .map(|r| reduce_rat(r, p))
            .collect::<Result<Vec<_>>>()?;
        Ok(FpPoly::new(p, c))
    }

    pub fn zero(p: u64) -> Self {
        FpPoly { p, c: Vec::new() }
    }

    pub fn one(p: u64) -> Self {
        FpPoly::new(p, [1])
    }

    pub fn x(p: u64) -> Self {
        FpPoly::new(p, [0, 1])
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.c
    }

    pub fn coeff(&self, i: usize) -> u64 {
        self.c.get(i).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.c == [1]
    }

    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn lead(&self) -> u64 {
        self.c.last().copied().unwrap_or(0)
    }

    pub fn add(&self, o: &FpPoly) -> FpPoly {
        let n = self.c.len().max(o.c.len());
        FpPoly::new(
            self.p,
            (0..n).map(|i| (self.coeff(i) + o.coeff(i)) % self.p),
        )
    }

    pub fn neg(&self) -> FpPoly {
        FpPoly::new(self.p, self.c.iter().map(|&v| (self.p - v) % self.p))
    }

    pub fn sub(&self, o: &FpPoly) -> FpPoly {
        self.add(&o.neg())
    }

    pub fn scale(&self, k: u64) -> FpPoly {
        FpPoly::new(self.p, self.c.iter().map(|&v| mul_mod(v, k, self.p)))
    }

    pub fn mul(&self, o: &FpPoly) -> FpPoly {
        if self.is_zero() || o.is_zero() {
            return FpPoly::zero(self.p);
        }
        let p = self.p as u128;
        let mut acc = vec![0u128; self.c.len() + o.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.c.iter().enumerate() {
                acc[i + j] = (acc[i + j] + a as u128 * b as u128) % p;
            }
        }
        FpPoly::new(self.p, acc.into_iter().map(|v| v as u64))
    }

    pub fn pow(&self, mut e: u64) -> FpPoly {
        let mut base = self.clone();
        let mut acc = FpPoly::one(self.p);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    pub fn divrem(&self, d: &FpPoly) -> (FpPoly, FpPoly) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let p = self.p;
        let dd = d.c.len() - 1;
        if self.c.len() < d.c.len() {
            return (FpPoly::zero(p), self.clone());
        }
        let inv = inv_mod(d.lead() as i128, p).expect("leading coefficient invertible");
        let mut r = self.c.clone();
        let mut q = vec![0u64; r.len() - dd];
        for i in (0..q.len()).rev() {
            let coef = mul_mod(r[i + dd], inv, p);
            q[i] = coef;
            if coef == 0 {
                continue;
            }
            for (j, &dj) in d.c.iter().enumerate() {
                let sub = mul_mod(coef, dj, p);
                r[i + j] = (r[i + j] + p - sub) % p;
            }
        }
        (FpPoly::new(p, q), FpPoly::new(p, r))
    }

    pub fn rem(&self, d: &FpPoly) -> FpPoly {
        self.divrem(d).1
    }

    pub fn monic(&self) -> FpPoly {
        if self.is_zero() {
            return self.clone();
        }
        let inv = inv_mod(self.lead() as i128, self.p).unwrap();
        self.scale(inv)
    }

    pub fn gcd(&self, o: &FpPoly) -> FpPoly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// `(g, s, t)` with `s·self + t·o = g`, `g` the monic gcd.
    pub fn xgcd(&self, o: &FpPoly) -> (FpPoly, FpPoly, FpPoly) {
        let p = self.p;
        let (mut r0, mut r1) = (self.clone(), o.clone());
        let (mut s0, mut s1) = (FpPoly::one(p), FpPoly::zero(p));
        let (mut t0, mut t1) = (FpPoly::zero(p), FpPoly::one(p));
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
        let inv = inv_mod(r0.lead() as i128, p).unwrap();
        (r0.scale(inv), s0.scale(inv), t0.scale(inv))
    }

    pub fn powmod(&self, mut e: u64, m: &FpPoly) -> FpPoly {
        let mut base = self.rem(m);
        let mut acc = FpPoly::one(self.p).rem(m);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).rem(m);
            }
            base = base.mul(&base).rem(m);
            e >>= 1;
        }
        acc
    }

    pub fn derivative(&self) -> FpPoly {
        FpPoly::new(
            self.p,
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &v)| mul_mod(v, i as u64 % self.p, self.p)),
        )
    }

    pub fn eval(&self, x: u64) -> u64 {
        self.c
            .iter()
            .rev()
            .fold(0, |acc, &c| (mul_mod(acc, x, self.p) + c) % self.p)
    }

    pub fn roots(&self) -> Vec<u64> {
        (0..self.p).filter(|&x| self.eval(x) == 0).collect()
    }

    /// For `f = g(X^p)`, returns `g` (valid since `a^p = a` on `F_p`).
    fn pth_root(&self) -> FpPoly {
        let p = self.p as usize;
        FpPoly::new(self.p, self.c.iter().step_by(p).copied())
    }
}

impl fmt::Display for FpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &c) in self.c.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match (i, c) {
                (0, _) => write!(f, "{c}")?,
                (1, 1) => write!(f, "T")?,
                (1, _) => write!(f, "{c}*T")?,
                (_, 1) => write!(f, "T^{i}")?,
                _ => write!(f, "{c}*T^{i}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for FpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({self}) mod {}", self.p)
    }
}

/// Factorization over `F_p`: leading coefficient and monic irreducible
/// factors with multiplicities, sorted by degree then coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FpFactorization {
    pub unit: u64,
    pub factors: Vec<(FpPoly, u32)>,
}

impl FpFactorization {
    pub fn expand(&self, p: u64) -> FpPoly {
        self.factors
            .iter()
            .fold(FpPoly::new(p, [self.unit]), |acc, (g, m)| {
                acc.mul(&g.pow(*m as u64))
            })
    }
}

pub fn factor_mod_p(f: &FpPoly) -> Result<FpFactorization> {
    let p = f.modulus();
    require_prime(p)?;
    if f.is_zero() {
        return Err(Error::input("cannot factor the zero polynomial"));
    }
    let unit = f.lead();
    let mut factors = Vec::new();
    for (sq, mult) in squarefree_decomposition(&f.monic()) {
        for (block, d) in distinct_degree(&sq) {
            for g in equal_degree(&block, d) {
                factors.push((g, mult));
            }
        }
    }
    factors.sort_by(|a, b| {
        (a.0.degree(), &a.0.c, a.1).cmp(&(b.0.degree(), &b.0.c, b.1))
    });
    Ok(FpFactorization { unit, factors })
}

/// Squarefree decomposition of a monic polynomial: pairs `(g, m)` with the
/// `g` squarefree, pairwise coprime, and `f = Π g^m`.
pub fn squarefree_decomposition(f: &FpPoly) -> Vec<(FpPoly, u32)> {
    let p = f.modulus();
    let mut out = Vec::new();
    if f.degree().unwrap_or(0) == 0 {
        return out;
    }
    let c0 = f.gcd(&f.derivative());
    let mut w = f.divrem(&c0).0;
    let mut c = c0;
    let mut i = 1u32;
    while !w.is_one() {
        let y = w.gcd(&c);
        let fac = w.divrem(&y).0;
        if fac.degree().unwrap_or(0) > 0 {
            out.push((fac.monic(), i));
        }
        w = y;
        c = c.divrem(&w).0;
        i += 1;
    }
    if c.degree().unwrap_or(0) > 0 {
        let root = c.monic().pth_root();
        for (g, m) in squarefree_decomposition(&root) {
            out.push((g, m * p as u32));
        }
    }
    out
}

/// Splits a squarefree monic polynomial into products of irreducibles of
/// equal degree, returned as `(product, degree)`.
pub fn distinct_degree(f: &FpPoly) -> Vec<(FpPoly, usize)> {
    let p = f.modulus();
    let mut out = Vec::new();
    let mut rest = f.clone();
    let x = FpPoly::x(p);
    let mut h = x.clone();
    let mut i = 1;
    while rest.degree().unwrap_or(0) >= 2 * i {
        h = h.powmod(p, &rest);
        let g = rest.gcd(&h.sub(&x));
        if !g.is_one() {
            rest = rest.divrem(&g).0;
            h = h.rem(&rest);
            out.push((g, i));
        }
        i += 1;
    }
    if rest.degree().unwrap_or(0) > 0 {
        let d = rest.degree().unwrap();
        out.push((rest, d));
    }
    out
}

/// Cantor–Zassenhaus equal-degree splitting with a fixed-seed generator so
/// results are reproducible.
pub fn equal_degree(f: &FpPoly, d: usize) -> Vec<FpPoly> {
    let n = f.degree().unwrap_or(0);
    if n == d {
        return vec![f.monic()];
    }
    let p = f.modulus();
    let mut rng = ChaCha8Rng::seed_from_u64(0x6b6f6368656e ^ (n as u64) ^ (p << 8));
    loop {
        let a = FpPoly::new(p, (0..n).map(|_| rng.gen_range(0..p)));
        if a.degree().unwrap_or(0) == 0 {
            continue;
        }
        let candidate = if p == 2 {
            // Trace from F_{2^d} down to F_2.
            let mut t = a.rem(f);
            let mut acc = t.clone();
            for _ in 1..d {
                t = t.mul(&t).rem(f);
                acc = acc.add(&t);
            }
            acc
        } else {
            // a^{(p^d - 1)/2} = (a^{1 + p + ... + p^{d-1}})^{(p-1)/2}
            let mut t = a.rem(f);
            let mut norm = t.clone();
            for _ in 1..d {
                t = t.powmod(p, f);
                norm = norm.mul(&t).rem(f);
            }
            norm.powmod((p - 1) / 2, f).sub(&FpPoly::one(p))
        };
        let g = f.gcd(&candidate);
        let dg = g.degree().unwrap_or(0);
        if dg > 0 && dg < n {
            let h = f.divrem(&g).0.monic();
            let mut out = equal_degree(&g, d);
            out.extend(equal_degree(&h, d));
            return out;
        }
    }
}

pub fn is_irreducible(f: &FpPoly) -> bool {
    match factor_mod_p(f) {
        Ok(fac) => fac.factors.len() == 1 && fac.factors[0].1 == 1,
        Err(_) => false,
    }
}

/// Generic helper used by residue-field code: `x^(p^k)` style Frobenius.
pub fn frobenius(a: &FpPoly, m: &FpPoly) -> FpPoly {
    a.powmod(a.modulus(), m)
}

#[allow(dead_code)]
fn pow_mod_u(a: u64, e: u64, p: u64) -> u64 {
    pow_mod(a, e, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fac(p: u64, c: &[i64]) -> Vec<(Vec<u64>, u32)> {
        factor_mod_p(&FpPoly::from_signed(p, c))
            .unwrap()
            .factors
            .into_iter()
            .map(|(g, m)| (g.coeffs().to_vec(), m))
            .collect()
    }

    #[test]
    fn t_squared_plus_one() {
        assert_eq!(fac(5, &[1, 0, 1]), vec![(vec![2, 1], 1), (vec![3, 1], 1)]);
        assert_eq!(fac(2, &[1, 0, 1]), vec![(vec![1, 1], 2)]);
        assert_eq!(fac(3, &[1, 0, 1]), vec![(vec![1, 0, 1], 1)]);
    }

    #[test]
    fn zero_is_rejected() {
        assert!(matches!(factor_mod_p(&FpPoly::zero(7)), Err(Error::Input(_))));
    }

    #[test]
    fn inseparable_powers() {
        // (T^3 + 2)^3 = T^9 + 8 = T^9 + 2 over F_3, and T^3+2 = (T+2)^3.
        let f = FpPoly::from_signed(3, &[2, 0, 0, 0, 0, 0, 0, 0, 0, 1]);
        let r = factor_mod_p(&f).unwrap();
        assert_eq!(r.factors, vec![(FpPoly::from_signed(3, &[2, 1]), 9)]);
        assert_eq!(r.expand(3), f);
    }

    #[test]
    fn products_reconstruct() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &p in &[2u64, 3, 5, 7, 13, 101] {
            for _ in 0..40 {
                let n = rng.gen_range(1..10);
                let mut c: Vec<u64> = (0..=n).map(|_| rng.gen_range(0..p)).collect();
                c[n] = rng.gen_range(1..p);
                let f = FpPoly::new(p, c);
                let r = factor_mod_p(&f).unwrap();
                assert_eq!(r.expand(p), f);
                for (g, _) in &r.factors {
                    assert_eq!(g.lead(), 1);
                    // irreducible: no factor of degree <= deg/2 divides it
                    let dg = g.degree().unwrap();
                    let x = FpPoly::x(p);
                    let mut h = x.clone();
                    for _ in 1..=dg / 2 {
                        h = h.powmod(p, g);
                        assert!(g.gcd(&h.sub(&x)).is_one(), "{g:?} reducible");
                    }
                }
            }
        }
    }
}
