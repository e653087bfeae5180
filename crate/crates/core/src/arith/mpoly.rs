use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::qpoly::QPoly;
use super::rat::Rat;
use crate::error::{Error, Result};

/// A monomial stored as `(variable, exponent)` pairs with increasing
/// variable index and nonzero exponents.
///
/// Ordering is lexicographic on the dense exponent vector, which makes it a
/// monomial order independent of the number of variables.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Mono(Vec<(u32, u32)>);

impl Mono {
    pub fn one() -> Self {
        Mono(Vec::new())
    }

    pub fn from_dense(e: &[u32]) -> Self {
        Mono(
            e.iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| (i as u32, k))
                .collect(),
        )
    }

    pub fn var(i: usize, k: u32) -> Self {
        if k == 0 {
            Mono::one()
        } else {
            Mono(vec![(i as u32, k)])
        }
    }

    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.0
    }

    pub fn to_dense(&self, arity: usize) -> Vec<u32> {
        let mut e = vec![0; arity];
        for &(i, k) in &self.0 {
            e[i as usize] = k;
        }
        e
    }

    pub fn exp(&self, i: usize) -> u32 {
        match self.0.binary_search_by_key(&(i as u32), |&(v, _)| v) {
            Ok(pos) => self.0[pos].1,
            Err(_) => 0,
        }
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, k)| k).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul(&self, o: &Mono) -> Mono {
        let (a, b) = (&self.0, &o.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Mono(out)
    }

    /// `self / o` if `o` divides `self`.
    pub fn div(&self, o: &Mono) -> Option<Mono> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut j = 0;
        for &(v, k) in &self.0 {
            if j < o.0.len() && o.0[j].0 < v {
                return None;
            }
            if j < o.0.len() && o.0[j].0 == v {
                let d = o.0[j].1;
                j += 1;
                match k.cmp(&d) {
                    Ordering::Less => return None,
                    Ordering::Equal => continue,
                    Ordering::Greater => out.push((v, k - d)),
                }
            } else {
                out.push((v, k));
            }
        }
        (j == o.0.len()).then_some(Mono(out))
    }

    /// Removes variable `i`, returning its exponent.
    pub fn take(&self, i: usize) -> (Mono, u32) {
        let mut out = self.0.clone();
        match out.binary_search_by_key(&(i as u32), |&(v, _)| v) {
            Ok(pos) => {
                let k = out.remove(pos).1;
                (Mono(out), k)
            }
            Err(_) => (Mono(out), 0),
        }
    }

    /// Renames variables: `i` becomes `map[i]`, merging collisions.
    pub fn remap(&self, map: &[usize]) -> Mono {
        let mut v: Vec<(u32, u32)> = self.0.iter().map(|&(i, k)| (map[i as usize] as u32, k)).collect();
        v.sort_unstable_by_key(|&(i, _)| i);
        let mut out: Vec<(u32, u32)> = Vec::with_capacity(v.len());
        for (i, k) in v {
            match out.last_mut() {
                Some(last) if last.0 == i => last.1 += k,
                _ => out.push((i, k)),
            }
        }
        Mono(out)
    }
}

impl Ord for Mono {
    fn cmp(&self, o: &Self) -> Ordering {
        let (a, b) = (&self.0, &o.0);
        let mut i = 0;
        loop {
            match (a.get(i), b.get(i)) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some(&(va, ka)), Some(&(vb, kb))) => {
                    if va != vb {
                        // The side holding the smaller variable has the larger
                        // exponent at that position of the dense vector.
                        return if va < vb { Ordering::Greater } else { Ordering::Less };
                    }
                    if ka != kb {
                        return ka.cmp(&kb);
                    }
                }
            }
            i += 1;
        }
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Sparse multivariate polynomial over Q with a fixed number of variables.
///
/// Terms live in a `BTreeMap` keyed by sparse monomials, so iteration order
/// (and therefore every printed or serialized form) is deterministic, and
/// polynomials in thousands of variables stay cheap when each term is short.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MPoly {
    arity: usize,
    terms: BTreeMap<Mono, Rat>,
}

impl MPoly {
    pub fn zero(arity: usize) -> Self {
        MPoly {
            arity,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(arity: usize, c: Rat) -> Self {
        let mut p = MPoly::zero(arity);
        p.add_mono(Mono::one(), c);
        p
    }

    pub fn one(arity: usize) -> Self {
        MPoly::constant(arity, Rat::one())
    }

    /// The variable with index `i` (0-based).
    pub fn var(arity: usize, i: usize) -> Self {
        assert!(i < arity, "variable index {i} out of range for arity {arity}");
        let mut p = MPoly::zero(arity);
        p.add_mono(Mono::var(i, 1), Rat::one());
        p
    }

    pub fn monomial(exps: Vec<u32>, c: Rat) -> Self {
        let arity = exps.len();
        MPoly::from_terms(arity, [(exps, c)])
    }

    pub fn from_terms(arity: usize, terms: impl IntoIterator<Item = (Vec<u32>, Rat)>) -> Self {
        let mut p = MPoly::zero(arity);
        for (e, c) in terms {
            assert_eq!(e.len(), arity, "exponent vector length must equal arity");
            p.add_mono(Mono::from_dense(&e), c);
        }
        p
    }

    pub fn from_monos(arity: usize, terms: impl IntoIterator<Item = (Mono, Rat)>) -> Self {
        let mut p = MPoly::zero(arity);
        for (m, c) in terms {
            debug_assert!(m.0.last().is_none_or(|&(v, _)| (v as usize) < arity));
            p.add_mono(m, c);
        }
        p
    }

    pub fn add_mono(&mut self, e: Mono, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(v) => {
                *v += &c;
                if v.is_zero() {
                    self.terms.remove(&e);
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    /// Univariate polynomial in variable `i` of an `arity`-ary ring.
    pub fn from_qpoly(arity: usize, i: usize, f: &QPoly) -> Self {
        MPoly::from_monos(
            arity,
            f.coeffs()
                .iter()
                .enumerate()
                .map(|(k, c)| (Mono::var(i, k as u32), c.clone())),
        )
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Terms with dense exponent vectors.
    pub fn terms(&self) -> impl Iterator<Item = (Vec<u32>, &Rat)> + '_ {
        self.terms.iter().map(|(m, c)| (m.to_dense(self.arity), c))
    }

    pub fn monos(&self) -> impl Iterator<Item = (&Mono, &Rat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.is_one())
    }

    pub fn constant_term(&self) -> Rat {
        self.terms.get(&Mono::one()).cloned().unwrap_or_default()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.degree()).max().unwrap_or(0)
    }

    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|e| e.exp(i)).max().unwrap_or(0)
    }

    pub fn uses_var(&self, i: usize) -> bool {
        self.terms.keys().any(|e| e.exp(i) > 0)
    }

    /// Indices of the variables that occur, in increasing order.
    pub fn vars(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .terms
            .keys()
            .flat_map(|m| m.0.iter().map(|&(i, _)| i as usize))
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Maximum height of the coefficients (0 for the zero polynomial).
    pub fn height(&self) -> BigInt {
        self.terms
            .values()
            .map(|c| c.height())
            .max()
            .unwrap_or_else(BigInt::zero)
    }

    pub fn scale(&self, k: &Rat) -> MPoly {
        if k.is_zero() {
            return MPoly::zero(self.arity);
        }
        MPoly {
            arity: self.arity,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * k)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> MPoly {
        let mut acc = MPoly::one(self.arity);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn eval(&self, x: &[Rat]) -> Rat {
        assert_eq!(x.len(), self.arity);
        let mut acc = Rat::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for &(i, k) in &e.0 {
                t *= &x[i as usize].pow(k);
            }
            acc += &t;
        }
        acc
    }

    /// Evaluation into any commutative ring given by closures.
    pub fn eval_with<T: Clone>(
        &self,
        x: &[T],
        coef: impl Fn(&Rat) -> T,
        zero: T,
        add: impl Fn(&T, &T) -> T,
        mul: impl Fn(&T, &T) -> T,
        one: T,
    ) -> T {
        let mut acc = zero;
        for (e, c) in &self.terms {
            let mut t = coef(c);
            for &(i, k) in &e.0 {
                let mut pw = one.clone();
                for _ in 0..k {
                    pw = mul(&pw, &x[i as usize]);
                }
                t = mul(&t, &pw);
            }
            acc = add(&acc, &t);
        }
        acc
    }

    /// Re-indexes variables into a ring of `new_arity` variables, sending
    /// variable `i` to `map[i]`.
    pub fn embed(&self, new_arity: usize, map: &[usize]) -> MPoly {
        assert_eq!(map.len(), self.arity);
        MPoly::from_monos(new_arity, self.terms.iter().map(|(e, c)| (e.remap(map), c.clone())))
    }

    /// Shifts all variables up by `offset` inside a ring of `new_arity` variables.
    pub fn shift(&self, new_arity: usize, offset: usize) -> MPoly {
        let map: Vec<usize> = (0..self.arity).map(|i| i + offset).collect();
        self.embed(new_arity, &map)
    }

    /// Substitutes every variable: variable `i` becomes `subs[i]`. All
    /// substitutes must share one arity, which becomes the result's arity.
    pub fn compose(&self, subs: &[MPoly]) -> MPoly {
        assert_eq!(subs.len(), self.arity);
        let arity = subs.first().map(|s| s.arity).unwrap_or(0);
        self.compose_sparse(arity, |i| subs[i].clone())
    }

    /// Like [`MPoly::compose`] with substitutes produced on demand, so that
    /// only the variables that occur are built.
    pub fn compose_sparse(&self, arity: usize, sub: impl Fn(usize) -> MPoly) -> MPoly {
        let mut cache: BTreeMap<usize, Vec<MPoly>> = BTreeMap::new();
        let mut acc = MPoly::zero(arity);
        for (e, c) in &self.terms {
            let mut t = MPoly::constant(arity, c.clone());
            for &(i, k) in &e.0 {
                let i = i as usize;
                let pw = cache.entry(i).or_insert_with(|| {
                    let s = sub(i);
                    assert_eq!(s.arity, arity, "substitute arity mismatch");
                    vec![MPoly::one(arity), s]
                });
                while pw.len() <= k as usize {
                    let next = pw.last().unwrap() * &pw[1];
                    pw.push(next);
                }
                t = &t * &pw[k as usize];
            }
            acc.add_assign_poly(&t);
        }
        acc
    }

    fn add_assign_poly(&mut self, o: &MPoly) {
        for (e, c) in &o.terms {
            self.add_mono(e.clone(), c.clone());
        }
    }

    /// Replaces variable `i` by a constant, keeping the arity.
    pub fn partial_eval(&self, i: usize, v: &Rat) -> MPoly {
        let mut out = MPoly::zero(self.arity);
        for (e, c) in &self.terms {
            let (ne, k) = e.take(i);
            out.add_mono(ne, c * &v.pow(k));
        }
        out
    }

    /// Coefficients as a polynomial in variable `i`: entry `k` is the
    /// coefficient of `X_i^k` (with `X_i` absent).
    pub fn coefficients_in(&self, i: usize) -> Vec<MPoly> {
        let d = self.degree_in(i) as usize;
        let mut out = vec![MPoly::zero(self.arity); if self.is_zero() { 0 } else { d + 1 }];
        for (e, c) in &self.terms {
            let (ne, k) = e.take(i);
            out[k as usize].add_mono(ne, c.clone());
        }
        out
    }

    /// Inverse of [`MPoly::coefficients_in`].
    pub fn from_coefficients_in(arity: usize, i: usize, coeffs: &[MPoly]) -> MPoly {
        let mut out = MPoly::zero(arity);
        for (k, c) in coeffs.iter().enumerate() {
            let m = Mono::var(i, k as u32);
            for (e, v) in &c.terms {
                out.add_mono(e.mul(&m), v.clone());
            }
        }
        out
    }

    /// The univariate polynomial in variable `i`, if no other variable occurs.
    pub fn as_qpoly(&self, i: usize) -> Option<QPoly> {
        let mut c = vec![Rat::zero(); self.degree_in(i) as usize + 1];
        for (e, v) in &self.terms {
            if e.0.iter().any(|&(j, _)| j as usize != i) {
                return None;
            }
            c[e.exp(i) as usize] = v.clone();
        }
        Some(QPoly::new(c))
    }

    /// Lexicographically largest term.
    pub fn leading_term(&self) -> Option<(&Mono, &Rat)> {
        self.terms.iter().next_back()
    }

    /// Exact division; `None` if `d` does not divide `self`.
    pub fn div_exact(&self, d: &MPoly) -> Option<MPoly> {
        assert!(!d.is_zero());
        let (de, dc) = d.leading_term().unwrap();
        let mut r = self.clone();
        let mut q = MPoly::zero(self.arity);
        while let Some((re, rc)) = r.leading_term() {
            let e = re.div(de)?;
            let c = rc / dc;
            let t = MPoly::from_monos(self.arity, [(e, c)]);
            r = &r - &(&t * d);
            q = &q + &t;
        }
        Some(q)
    }

    /// Normalizes to leading coefficient 1 (lexicographic leading term).
    pub fn monic(&self) -> MPoly {
        match self.leading_term() {
            Some((_, c)) => self.scale(&c.inv().unwrap()),
            None => self.clone(),
        }
    }

    fn highest_var(&self) -> Option<usize> {
        self.vars().last().copied()
    }

    /// Greatest common divisor over Q, normalized monic; `gcd(0, 0) = 0`.
    pub fn gcd(&self, o: &MPoly) -> MPoly {
        assert_eq!(self.arity, o.arity);
        if self.is_zero() {
            return o.monic();
        }
        if o.is_zero() {
            return self.monic();
        }
        let v = match (self.highest_var(), o.highest_var()) {
            (None, _) | (_, None) => return MPoly::one(self.arity),
            (Some(a), Some(b)) => a.max(b),
        };
        let ca = self.content_in(v);
        let cb = o.content_in(v);
        let c = ca.gcd(&cb);
        if !self.uses_var(v) || !o.uses_var(v) {
            return c;
        }
        let mut a = self.div_exact(&ca).unwrap();
        let mut b = o.div_exact(&cb).unwrap();
        if a.degree_in(v) < b.degree_in(v) {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            let r = a.pseudo_rem(&b, v);
            a = b;
            b = if r.is_zero() {
                r
            } else {
                let cr = r.content_in(v);
                r.div_exact(&cr).unwrap()
            };
        }
        if !a.uses_var(v) {
            return c;
        }
        let pa = a.div_exact(&a.content_in(v)).unwrap();
        (&c * &pa).monic()
    }

    /// Gcd of the coefficients in variable `v`, a polynomial free of `v`.
    pub fn content_in(&self, v: usize) -> MPoly {
        let cs = self.coefficients_in(v);
        let mut g = MPoly::zero(self.arity);
        for c in cs {
            g = g.gcd(&c);
            if g.is_constant() && !g.is_zero() {
                return MPoly::one(self.arity);
            }
        }
        g
    }

    /// Pseudo-remainder with respect to variable `v`.
    pub fn pseudo_rem(&self, d: &MPoly, v: usize) -> MPoly {
        let dd = d.degree_in(v);
        let dcoef = d.coefficients_in(v);
        let lc = dcoef.last().unwrap().clone();
        let mut r = self.clone();
        while !r.is_zero() && r.uses_var(v) && r.degree_in(v) >= dd {
            let rd = r.degree_in(v);
            let rl = r.coefficients_in(v).last().unwrap().clone();
            let shift = MPoly::from_monos(self.arity, [(Mono::var(v, rd - dd), Rat::one())]);
            r = &(&r * &lc) - &(&(&rl * &shift) * d);
        }
        if dd == 0 {
            return MPoly::zero(self.arity);
        }
        r
    }

    pub fn to_string_with(&self, names: &[String]) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (e, c) in self.terms.iter().rev() {
            let neg = c.is_negative();
            let a = c.abs();
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mono: Vec<String> = e
                .0
                .iter()
                .map(|&(i, k)| {
                    if k == 1 {
                        names[i as usize].clone()
                    } else {
                        format!("{}^{k}", names[i as usize])
                    }
                })
                .collect();
            if mono.is_empty() {
                out.push_str(&a.to_string());
            } else if a.is_one() {
                out.push_str(&mono.join("*"));
            } else {
                out.push_str(&format!("{a}*{}", mono.join("*")));
            }
        }
        out
    }
}

/// Default variable names `X1, X2, …`.
pub fn default_names(arity: usize) -> Vec<String> {
    (1..=arity).map(|i| format!("X{i}")).collect()
}

impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_string_with(&default_names(self.arity)))
    }
}

impl fmt::Debug for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MPoly[{}]({self})", self.arity)
    }
}

impl Add for &MPoly {
    type Output = MPoly;
    fn add(self, o: &MPoly) -> MPoly {
        assert_eq!(self.arity, o.arity, "arity mismatch");
        let mut out = self.clone();
        out.add_assign_poly(o);
        out
    }
}

impl Sub for &MPoly {
    type Output = MPoly;
    fn sub(self, o: &MPoly) -> MPoly {
        assert_eq!(self.arity, o.arity, "arity mismatch");
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_mono(e.clone(), -c);
        }
        out
    }
}

impl Mul for &MPoly {
    type Output = MPoly;
    fn mul(self, o: &MPoly) -> MPoly {
        assert_eq!(self.arity, o.arity, "arity mismatch");
        let mut out = MPoly::zero(self.arity);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                out.add_mono(e1.mul(e2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &MPoly {
    type Output = MPoly;
    fn neg(self) -> MPoly {
        self.scale(&-Rat::one())
    }
}

impl Neg for MPoly {
    type Output = MPoly;
    fn neg(self) -> MPoly {
        -&self
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<MPoly> for MPoly {
            type Output = MPoly;
            fn $m(self, o: MPoly) -> MPoly { (&self).$m(&o) }
        }
        impl $tr<&MPoly> for MPoly {
            type Output = MPoly;
            fn $m(self, o: &MPoly) -> MPoly { (&self).$m(o) }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul);

#[derive(Serialize, Deserialize)]
struct TermJson {
    exps: Vec<u32>,
    coef: Rat,
}

#[derive(Serialize, Deserialize)]
struct MPolyJson {
    arity: usize,
    terms: Vec<TermJson>,
}

impl Serialize for MPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MPolyJson {
            arity: self.arity,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| TermJson {
                    exps: e.to_dense(self.arity),
                    coef: c.clone(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = MPolyJson::deserialize(d)?;
        let mut p = MPoly::zero(j.arity);
        for t in j.terms {
            if t.exps.len() != j.arity {
                return Err(serde::de::Error::custom(format!(
                    "exponent vector of length {} in a polynomial of arity {}",
                    t.exps.len(),
                    j.arity
                )));
            }
            p.add_mono(Mono::from_dense(&t.exps), t.coef);
        }
        Ok(p)
    }
}

/// Parses an arithmetic expression over the given variable names.
///
/// Grammar: sums and differences of products, `^` with a nonnegative
/// integer exponent, parentheses, integer literals, and division by
/// nonzero constants. Multiplication may be written with `*` or by
/// juxtaposition of a number and a factor (`3X1`).
pub fn parse_poly(src: &str, names: &[&str]) -> Result<MPoly> {
    let mut p = Parser {
        s: src.as_bytes(),
        i: 0,
        names,
    };
    let out = p.expr()?;
    p.ws();
    if p.i != p.s.len() {
        return Err(Error::input(format!(
            "unexpected '{}' at offset {} in '{src}'",
            p.s[p.i] as char, p.i
        )));
    }
    Ok(out)
}

struct Parser<'a> {
    s: &'a [u8],
    i: usize,
    names: &'a [&'a str],
}

impl Parser<'_> {
    fn arity(&self) -> usize {
        self.names.len()
    }

    fn ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.i).copied()
    }

    fn expr(&mut self) -> Result<MPoly> {
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.i += 1;
                -&self.term()?
            }
            Some(b'+') => {
                self.i += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.i += 1;
                    acc = &acc + &self.term()?;
                }
                Some(b'-') => {
                    self.i += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<MPoly> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.i += 1;
                    acc = &acc * &self.power()?;
                }
                Some(b'/') => {
                    self.i += 1;
                    let d = self.power()?;
                    if !d.is_constant() || d.is_zero() {
                        return Err(Error::input("division only by nonzero constants"));
                    }
                    acc = acc.scale(&d.constant_term().inv().unwrap());
                }
                Some(c) if c == b'(' || c.is_ascii_alphabetic() => {
                    acc = &acc * &self.power()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> Result<MPoly> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.i += 1;
            self.ws();
            let start = self.i;
            while self.i < self.s.len() && self.s[self.i].is_ascii_digit() {
                self.i += 1;
            }
            let e: u32 = std::str::from_utf8(&self.s[start..self.i])
                .unwrap()
                .parse()
                .map_err(|_| Error::input("exponent must be a nonnegative integer"))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<MPoly> {
        match self.peek() {
            Some(b'(') => {
                self.i += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(Error::input("missing ')'"));
                }
                self.i += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.i;
                while self.i < self.s.len() && self.s[self.i].is_ascii_digit() {
                    self.i += 1;
                }
                let n: BigInt = std::str::from_utf8(&self.s[start..self.i])
                    .unwrap()
                    .parse()
                    .unwrap();
                Ok(MPoly::constant(self.arity(), Rat::from_bigint(n)))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.i;
                while self.i < self.s.len()
                    && (self.s[self.i].is_ascii_alphanumeric() || self.s[self.i] == b'_')
                {
                    self.i += 1;
                }
                let name = std::str::from_utf8(&self.s[start..self.i]).unwrap();
                match self.names.iter().position(|n| *n == name) {
                    Some(k) => Ok(MPoly::var(self.arity(), k)),
                    None => Err(Error::input(format!(
                        "unknown variable '{name}' (expected one of {:?})",
                        self.names
                    ))),
                }
            }
            Some(c) => Err(Error::input(format!(
                "unexpected '{}' at offset {}",
                c as char, self.i
            ))),
            None => Err(Error::input("unexpected end of expression")),
        }
    }
}

/// Total degree of a polynomial (0 for the zero polynomial).
pub fn total_degree(g: &MPoly) -> u32 {
    g.total_degree()
}

/// Maximum coefficient height of a polynomial.
pub fn height_poly(g: &MPoly) -> BigInt {
    g.height()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str, n: usize) -> MPoly {
        let names = default_names(n);
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        parse_poly(s, &refs).unwrap()
    }

    #[test]
    fn heights_and_degrees() {
        let g = p("X1^2 - X2/2", 2);
        assert_eq!(g.height(), BigInt::from(2));
        assert_eq!(g.total_degree(), 2);
        assert_eq!(MPoly::constant(3, Rat::from(5)).total_degree(), 0);
        assert_eq!(MPoly::zero(2).total_degree(), 0);
    }

    #[test]
    fn parse_and_print_roundtrip() {
        let g = p("(X1 + 2X2)^2 - 3/4", 2);
        assert_eq!(g.to_string(), "X1^2 + 4*X1*X2 + 4*X2^2 - 3/4");
        assert_eq!(p(&g.to_string(), 2), g);
        assert!(parse_poly("X1 + Z", &["X1"]).is_err());
        assert!(parse_poly("X1 / X1", &["X1"]).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let g = p("X1^2 - X2/2 + 7", 2);
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(
            s,
            r#"{"arity":2,"terms":[{"exps":[0,0],"coef":"7"},{"exps":[0,1],"coef":"-1/2"},{"exps":[2,0],"coef":"1"}]}"#
        );
        let back: MPoly = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<MPoly>(r#"{"arity":2,"terms":[{"exps":[1],"coef":"1"}]}"#).is_err());
    }

    #[test]
    fn compose_and_eval() {
        let g = p("X1*X2 + X1", 2);
        let s = [p("X1 + 1", 1), p("X1^2", 1)];
        let h = g.compose(&s);
        assert_eq!(h, p("X1^3 + X1^2 + X1 + 1", 1));
        let x = Rat::frac(2, 3);
        assert_eq!(h.eval(std::slice::from_ref(&x)), g.eval(&[&x + &Rat::one(), x.pow(2)]));
    }

    #[test]
    fn gcd_multivariate() {
        let a = p("(X1 + X2)*(X1 - 2X2 + 1)", 2);
        let b = p("(X1 + X2)*(X1^2 + X2)", 2);
        assert_eq!(a.gcd(&b), p("X1 + X2", 2).monic());
        assert!(p("X1^2 + 1", 2).gcd(&p("X1 - X2", 2)).is_constant());
        assert_eq!(p("X1*X2", 2).gcd(&p("X2^2", 2)), p("X2", 2));
        let q = a.div_exact(&p("X1 + X2", 2)).unwrap();
        assert_eq!(q, p("X1 - 2X2 + 1", 2));
        assert!(a.div_exact(&p("X1 + 3", 2)).is_none());
    }
}
