use super::fp::reduce_rat;
use super::fppoly::{is_irreducible, FpPoly};
use super::primes::is_prime;
use super::rat::Rat;
use crate::error::{Error, Result};

/// Largest field size with precomputed tables.
pub const MAX_TABLE_Q: usize = 64;

/// `(p, k)` with `q = p^k`, if `q` is a prime power.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let mut r = q;
    let mut k = 0;
    while r.is_multiple_of(p) {
        r /= p;
        k += 1;
    }
    (r == 1 && is_prime(p)).then_some((p, k))
}

/// The finite field `F_q` for `q <= 64`, with full addition and
/// multiplication tables.
///
/// Elements are indices `Σ c_i p^i` of polynomials `Σ c_i T^i` modulo a
/// fixed irreducible polynomial; the prime field is exactly the indices
/// below `p`, so `F_p`-points embed without translation.
#[derive(Clone, Debug)]
pub struct Fq {
    q: usize,
    p: u64,
    k: u32,
    modulus: FpPoly,
    add: Vec<u16>,
    mul: Vec<u16>,
    neg: Vec<u16>,
    inv: Vec<u16>,
}

impl Fq {
    pub fn new(q: u64) -> Result<Self> {
        let (p, k) = prime_power(q)
            .ok_or_else(|| Error::input(format!("{q} is not a prime power")))?;
        if q as usize > MAX_TABLE_Q {
            return Err(Error::resource(format!(
                "field size {q} exceeds the table limit {MAX_TABLE_Q}"
            )));
        }
        let modulus = first_irreducible(p, k as usize);
        let q = q as usize;
        let elems: Vec<FpPoly> = (0..q).map(|i| Self::poly_of(p, k, i)).collect();
        let index = |f: &FpPoly| -> usize {
            let mut idx = 0usize;
            for (i, &c) in f.coeffs().iter().enumerate() {
                idx += c as usize * (p as usize).pow(i as u32);
            }
            idx
        };
        let mut add = vec![0u16; q * q];
        let mut mul = vec![0u16; q * q];
        for a in 0..q {
            for b in 0..q {
                add[a * q + b] = index(&elems[a].add(&elems[b])) as u16;
                mul[a * q + b] = index(&elems[a].mul(&elems[b]).rem(&modulus)) as u16;
            }
        }
        let mut neg = vec![0u16; q];
        let mut inv = vec![0u16; q];
        for a in 0..q {
            neg[a] = (0..q).find(|&b| add[a * q + b] == 0).unwrap() as u16;
            if a != 0 {
                inv[a] = (0..q).find(|&b| mul[a * q + b] == 1).unwrap() as u16;
            }
        }
        Ok(Fq {
            q,
            p,
            k,
            modulus,
            add,
            mul,
            neg,
            inv,
        })
    }

    fn poly_of(p: u64, k: u32, mut i: usize) -> FpPoly {
        let mut c = Vec::with_capacity(k as usize);
        for _ in 0..k {
            c.push((i % p as usize) as u64);
            i /= p as usize;
        }
        FpPoly::new(p, c)
    }

    pub fn size(&self) -> usize {
        self.q
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.k
    }

    pub fn defining_polynomial(&self) -> &FpPoly {
        &self.modulus
    }

    #[inline]
    pub fn add(&self, a: usize, b: usize) -> usize {
        self.add[a * self.q + b] as usize
    }

    #[inline]
    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg[b] as usize)
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.q + b] as usize
    }

    #[inline]
    pub fn neg(&self, a: usize) -> usize {
        self.neg[a] as usize
    }

    pub fn inv(&self, a: usize) -> Option<usize> {
        (a != 0).then(|| self.inv[a] as usize)
    }

    pub fn pow(&self, a: usize, e: u64) -> usize {
        let mut acc = 1;
        let mut base = a;
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Image of a rational whose denominator is prime to `p`.
    pub fn from_rat(&self, x: &Rat) -> Result<usize> {
        Ok(reduce_rat(x, self.p)? as usize)
    }

    /// Whether `a` lies in the prime field.
    pub fn in_prime_field(&self, a: usize) -> bool {
        (a as u64) < self.p
    }

    /// A generator of the field as an algebra over the prime field (`T`).
    pub fn generator(&self) -> usize {
        if self.k == 1 {
            0
        } else {
            self.p as usize
        }
    }
}

fn first_irreducible(p: u64, k: usize) -> FpPoly {
    if k == 1 {
        return FpPoly::x(p);
    }
    let count = (p as usize).pow(k as u32);
    for i in 0..count {
        let mut c = Vec::with_capacity(k + 1);
        let mut r = i;
        for _ in 0..k {
            c.push((r % p as usize) as u64);
            r /= p as usize;
        }
        c.push(1);
        let f = FpPoly::new(p, c);
        if is_irreducible(&f) {
            return f;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_powers() {
        assert_eq!(prime_power(9), Some((3, 2)));
        assert_eq!(prime_power(64), Some((2, 6)));
        assert_eq!(prime_power(12), None);
        assert_eq!(prime_power(1), None);
    }

    #[test]
    fn field_axioms() {
        for q in [2u64, 3, 4, 5, 7, 8, 9, 16, 25, 27, 49, 64] {
            let f = Fq::new(q).unwrap();
            let n = f.size();
            for a in 0..n {
                assert_eq!(f.add(a, 0), a);
                assert_eq!(f.mul(a, 1), a);
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
                    assert_eq!(f.pow(a, q - 1), 1);
                }
                for b in 0..n {
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    let c = (a * 7 + b * 3) % n;
                    assert_eq!(
                        f.mul(a, f.add(b, c)),
                        f.add(f.mul(a, b), f.mul(a, c))
                    );
                }
            }
            // Prime field indices are closed under the operations.
            let p = f.characteristic() as usize;
            for a in 0..p {
                for b in 0..p {
                    assert_eq!(f.add(a, b), (a + b) % p);
                    assert_eq!(f.mul(a, b), (a * b) % p);
                }
            }
        }
        assert!(Fq::new(6).is_err());
        assert!(matches!(Fq::new(128), Err(Error::Resource(_))));
    }
}
