//! The constant field F_q with elements numbered 0..q, for code that works
//! directly over F_q (polynomials in s, finite matrix groups).
//!
//! Element codes are the base-p digits of the coefficient vector over the
//! canonical modulus of F_q, so for q = p the code is the residue itself.

use std::sync::Arc;

use super::{build_extension, FieldCtx, FieldElem};
use crate::error::{Error, Result};

/// Largest non-prime q for which addition/multiplication tables are built.
pub const MAX_TABLE_ORDER: u32 = 1024;

#[derive(Debug)]
pub struct Fq {
    p: u32,
    e: usize,
    q: u32,
    ctx: Arc<FieldCtx>,
    tables: Option<Tables>,
}

#[derive(Debug)]
struct Tables {
    add: Vec<u32>,
    mul: Vec<u32>,
    neg: Vec<u32>,
    inv: Vec<u32>,
}

impl Fq {
    pub fn new(p: u32, e: usize) -> Result<Arc<Fq>> {
        let ctx = build_extension(p, e, 1)?;
        let q64 = (p as u64).pow(e as u32);
        if e > 1 && q64 > MAX_TABLE_ORDER as u64 {
            return Err(Error::Precondition(format!("q = {q64} too large for table arithmetic")));
        }
        let q = q64 as u32;
        let tables = (e > 1).then(|| {
            let elems: Vec<FieldElem> = (0..q).map(|c| ctx.from_base_code(c)).collect();
            let code = |x: &FieldElem| x.coeffs().iter().rev().fold(0u32, |acc, &d| acc * p + d);
            let qs = q as usize;
            let mut add = vec![0; qs * qs];
            let mut mul = vec![0; qs * qs];
            for a in 0..qs {
                for b in 0..qs {
                    add[a * qs + b] = code(&elems[a].add(&elems[b]));
                    mul[a * qs + b] = code(&elems[a].mul(&elems[b]));
                }
            }
            let neg = elems.iter().map(|x| code(&x.neg())).collect();
            let inv = elems.iter().map(|x| x.inv().map(|y| code(&y)).unwrap_or(0)).collect();
            Tables { add, mul, neg, inv }
        });
        Ok(Arc::new(Fq { p, e, q, ctx, tables }))
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn e(&self) -> usize {
        self.e
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        match &self.tables {
            None => {
                let s = a + b;
                if s >= self.p {
                    s - self.p
                } else {
                    s
                }
            }
            Some(t) => t.add[(a * self.q + b) as usize],
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        match &self.tables {
            None => (self.p - a) % self.p,
            Some(t) => t.neg[a as usize],
        }
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        match &self.tables {
            None => ((a as u64 * b as u64) % self.p as u64) as u32,
            Some(t) => t.mul[(a * self.q + b) as usize],
        }
    }

    pub fn inv(&self, a: u32) -> Option<u32> {
        if a == 0 {
            return None;
        }
        Some(match &self.tables {
            None => super::fp_poly::inv_mod(a, self.p),
            Some(t) => t.inv[a as usize],
        })
    }

    pub fn pow(&self, a: u32, mut e: u64) -> u32 {
        let mut base = a;
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// The image of an integer under Z → F_q.
    pub fn from_int(&self, v: i64) -> u32 {
        v.rem_euclid(self.p as i64) as u32
    }

    /// Multiplicative order of a nonzero element.
    pub fn order(&self, a: u32) -> Option<u64> {
        if a == 0 {
            return None;
        }
        let n = self.q as u64 - 1;
        let mut best = n;
        for d in (1..=n).filter(|d| n % d == 0) {
            if self.pow(a, d) == 1 {
                best = d;
                break;
            }
        }
        Some(best)
    }

    /// Embeds the element with code `a` into `target` (any extension of F_q).
    pub fn embed(&self, target: &Arc<FieldCtx>, a: u32) -> FieldElem {
        target.from_base_code(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f4_tables() {
        let f = Fq::new(2, 2).unwrap();
        assert_eq!(f.q(), 4);
        for a in 1..4 {
            assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
            assert_eq!(f.add(a, a), 0);
        }
        // x has order 3 in F_4
        assert_eq!(f.order(2), Some(3));
    }

    #[test]
    fn prime_field_direct() {
        let f = Fq::new(5, 1).unwrap();
        assert_eq!(f.mul(2, 3), 1);
        assert_eq!(f.order(2), Some(4));
        assert_eq!(f.neg(0), 0);
    }
}
