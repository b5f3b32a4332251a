//! F_q[s] and F_q(s): polynomials, canonical rational functions, finite places.

pub mod bivar;
pub mod place;

use std::fmt;
use std::sync::Arc;

use crate::gf::small::Fq;
use crate::gf::{FieldCtx, FieldElem};

pub use bivar::{BiPoly, BivarEntry};
pub use place::{enumerate_places, gauss_valuation, reduce_at, valuation_at, PlaceFin, TPoly, Val};

/// Polynomial in s over F_q, little-endian, no trailing zeros.
#[derive(Clone)]
pub struct Poly {
    f: Arc<Fq>,
    c: Vec<u32>,
}

impl PartialEq for Poly {
    fn eq(&self, o: &Self) -> bool {
        self.f.q() == o.f.q() && self.c == o.c
    }
}

impl Eq for Poly {}

impl std::hash::Hash for Poly {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.c.hash(state);
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.c.is_empty() {
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
                (0, c) => write!(f, "{c}")?,
                (1, 1) => write!(f, "s")?,
                (1, c) => write!(f, "{c}*s")?,
                (i, 1) => write!(f, "s^{i}")?,
                (i, c) => write!(f, "{c}*s^{i}")?,
            }
        }
        Ok(())
    }
}

impl Poly {
    pub fn new(f: &Arc<Fq>, mut c: Vec<u32>) -> Poly {
        while c.last() == Some(&0) {
            c.pop();
        }
        Poly { f: f.clone(), c }
    }

    pub fn zero(f: &Arc<Fq>) -> Poly {
        Poly { f: f.clone(), c: Vec::new() }
    }

    pub fn constant(f: &Arc<Fq>, a: u32) -> Poly {
        Poly::new(f, vec![a])
    }

    pub fn one(f: &Arc<Fq>) -> Poly {
        Poly::constant(f, 1)
    }

    /// The variable s.
    pub fn s(f: &Arc<Fq>) -> Poly {
        Poly::new(f, vec![0, 1])
    }

    /// s − a
    pub fn linear(f: &Arc<Fq>, a: u32) -> Poly {
        Poly::new(f, vec![f.neg(a), 1])
    }

    pub fn field(&self) -> &Arc<Fq> {
        &self.f
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.c
    }

    pub fn coeff(&self, i: usize) -> u32 {
        self.c.get(i).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn lead(&self) -> u32 {
        self.c.last().copied().unwrap_or(0)
    }

    pub fn is_monic(&self) -> bool {
        self.lead() == 1
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.c.len().max(o.c.len());
        let c = (0..n).map(|i| self.f.add(self.coeff(i), o.coeff(i))).collect();
        Poly::new(&self.f, c)
    }

    pub fn neg(&self) -> Poly {
        Poly::new(&self.f, self.c.iter().map(|&a| self.f.neg(a)).collect())
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.neg())
    }

    pub fn scale(&self, a: u32) -> Poly {
        Poly::new(&self.f, self.c.iter().map(|&x| self.f.mul(x, a)).collect())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero(&self.f);
        }
        let mut c = vec![0u32; self.c.len() + o.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.c.iter().enumerate() {
                c[i + j] = self.f.add(c[i + j], self.f.mul(a, b));
            }
        }
        Poly::new(&self.f, c)
    }

    pub fn pow(&self, mut e: u64) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one(&self.f);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Multiplication by s^k.
    pub fn shift(&self, k: usize) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let mut c = vec![0; k];
        c.extend_from_slice(&self.c);
        Poly::new(&self.f, c)
    }

    pub fn divrem(&self, d: &Poly) -> (Poly, Poly) {
        let dd = d.degree().expect("division by zero polynomial");
        let inv = self.f.inv(d.lead()).unwrap();
        let mut r = self.c.clone();
        if r.len() <= dd {
            return (Poly::zero(&self.f), self.clone());
        }
        let mut quot = vec![0u32; r.len() - dd];
        for i in (dd..r.len()).rev() {
            let c = self.f.mul(r[i], inv);
            if c == 0 {
                continue;
            }
            quot[i - dd] = c;
            for (j, &b) in d.c.iter().enumerate() {
                r[i - dd + j] = self.f.sub(r[i - dd + j], self.f.mul(c, b));
            }
        }
        r.truncate(dd);
        (Poly::new(&self.f, quot), Poly::new(&self.f, r))
    }

    pub fn rem(&self, d: &Poly) -> Poly {
        self.divrem(d).1
    }

    pub fn monic(&self) -> Poly {
        match self.f.inv(self.lead()) {
            Some(inv) => self.scale(inv),
            None => self.clone(),
        }
    }

    /// Monic gcd (zero if both are zero).
    pub fn gcd(&self, o: &Poly) -> Poly {
        let mut a = self.clone();
        let mut b = o.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn eval(&self, x: u32) -> u32 {
        self.c.iter().rev().fold(0, |acc, &c| self.f.add(self.f.mul(acc, x), c))
    }

    /// Evaluates at a point of an extension field of F_q.
    pub fn eval_in(&self, x: &FieldElem) -> FieldElem {
        let ctx = x.ctx();
        self.c.iter().rev().fold(ctx.zero(), |acc, &c| acc.mul(x).add(&self.f.embed(ctx, c)))
    }

    /// Coefficientwise image in an extension field.
    pub fn embed_coeffs(&self, ctx: &Arc<FieldCtx>) -> Vec<FieldElem> {
        self.c.iter().map(|&c| self.f.embed(ctx, c)).collect()
    }

    /// s ↦ s^k.
    pub fn compose_power(&self, k: usize) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let mut c = vec![0; (self.c.len() - 1) * k + 1];
        for (i, &a) in self.c.iter().enumerate() {
            c[i * k] = a;
        }
        Poly::new(&self.f, c)
    }

    /// The Frobenius φ_q on F_q[s]: coefficients are fixed, s ↦ s^q.
    pub fn phi(&self) -> Poly {
        self.compose_power(self.f.q() as usize)
    }

    /// Multiplicity of the irreducible `pi` in self (self nonzero), and the cofactor.
    pub fn strip(&self, pi: &Poly) -> (u32, Poly) {
        let mut k = 0;
        let mut cur = self.clone();
        loop {
            let (q, r) = cur.divrem(pi);
            if !r.is_zero() {
                return (k, cur);
            }
            k += 1;
            cur = q;
        }
    }

    /// Irreducibility over F_q (Ben-Or: gcd(π, s^(q^j) − s) = 1 for j ≤ deg/2).
    pub fn is_irreducible(&self) -> bool {
        let Some(d) = self.degree() else { return false };
        if d == 0 {
            return false;
        }
        if d == 1 {
            return true;
        }
        let q = self.f.q() as u64;
        let s = Poly::s(&self.f);
        let mut h = s.clone();
        for _ in 1..=d / 2 {
            h = h.powmod(q, self);
            if h.sub(&s).gcd(self).degree() != Some(0) {
                return false;
            }
        }
        true
    }

    pub fn powmod(&self, mut e: u64, m: &Poly) -> Poly {
        let mut base = self.rem(m);
        let mut acc = Poly::one(&self.f).rem(m);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).rem(m);
            }
            base = base.mul(&base).rem(m);
            e >>= 1;
        }
        acc
    }
}

/// Element of F_q(s) in canonical form: monic denominator, coprime numerator.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.degree() == Some(0) {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

impl RatFunc {
    /// Canonical fraction num/den; `None` if den = 0.
    pub fn new(num: Poly, den: Poly) -> Option<RatFunc> {
        if den.is_zero() {
            return None;
        }
        let f = num.field().clone();
        if num.is_zero() {
            return Some(RatFunc { num, den: Poly::one(&f) });
        }
        let g = num.gcd(&den);
        let (num, _) = num.divrem(&g);
        let (den, _) = den.divrem(&g);
        let inv = f.inv(den.lead()).unwrap();
        Some(RatFunc { num: num.scale(inv), den: den.scale(inv) })
    }

    pub fn from_poly(p: Poly) -> RatFunc {
        let f = p.field().clone();
        RatFunc { num: p, den: Poly::one(&f) }
    }

    pub fn zero(f: &Arc<Fq>) -> RatFunc {
        RatFunc::from_poly(Poly::zero(f))
    }

    pub fn one(f: &Arc<Fq>) -> RatFunc {
        RatFunc::from_poly(Poly::one(f))
    }

    pub fn constant(f: &Arc<Fq>, a: u32) -> RatFunc {
        RatFunc::from_poly(Poly::constant(f, a))
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn field(&self) -> &Arc<Fq> {
        self.num.field()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, o: &RatFunc) -> RatFunc {
        if self.den == o.den {
            return RatFunc::new(self.num.add(&o.num), self.den.clone()).unwrap();
        }
        RatFunc::new(self.num.mul(&o.den).add(&o.num.mul(&self.den)), self.den.mul(&o.den)).unwrap()
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, o: &RatFunc) -> RatFunc {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &RatFunc) -> RatFunc {
        RatFunc::new(self.num.mul(&o.num), self.den.mul(&o.den)).unwrap()
    }

    pub fn inv(&self) -> Option<RatFunc> {
        RatFunc::new(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, o: &RatFunc) -> Option<RatFunc> {
        Some(self.mul(&o.inv()?))
    }

    pub fn pow(&self, e: i64) -> Option<RatFunc> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let e = e.unsigned_abs();
        Some(RatFunc { num: base.num.pow(e), den: base.den.pow(e) })
    }

    /// s ↦ s^q.
    pub fn phi(&self) -> RatFunc {
        RatFunc { num: self.num.phi(), den: self.den.phi() }
    }
}
