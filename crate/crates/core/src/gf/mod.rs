//! Finite-field towers F_p ⊆ F_q ⊆ F_{q^M}, realized as a single quotient
//! F_p[x]/(f) with deg f = e·M, plus the Frobenius x ↦ x^q as an F_p-linear map.

pub(crate) mod fp_poly;
pub mod linalg;
pub mod mat;
pub mod semilinear;
pub mod small;

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use linalg::{Echelon, FpMatrix};

pub const DEFAULT_DEGREE_BOUND: usize = 64;
pub const MAX_CHARACTERISTIC: u32 = 1 << 16;

/// The field F_{q^M} with q = p^e, represented over F_p by `modulus`.
pub struct FieldCtx {
    p: u32,
    e: usize,
    m: usize,
    k: usize,
    modulus: Vec<u32>,
    tail: Vec<(usize, u64)>,
    /// Column j is x^(q·j) mod f.
    frob: Vec<Vec<u32>>,
    base_gen: OnceLock<Vec<u32>>,
    frob_inv: OnceLock<Echelon>,
    embeddings: Mutex<HashMap<usize, Arc<Embedding>>>,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldCtx")
            .field("p", &self.p)
            .field("e", &self.e)
            .field("M", &self.m)
            .field("modulus", &self.modulus)
            .finish()
    }
}

/// Serializable description of a context.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CtxDescriptor {
    pub p: u32,
    pub e: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub modulus: Vec<u32>,
}

fn registry() -> &'static Mutex<HashMap<(u32, usize, usize), Arc<FieldCtx>>> {
    static REG: OnceLock<Mutex<HashMap<(u32, usize, usize), Arc<FieldCtx>>>> = OnceLock::new();
    REG.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Builds (or fetches the cached) context for F_{q^M}, q = p^e, with the default degree bound.
pub fn build_extension(p: u32, e: usize, m: usize) -> Result<Arc<FieldCtx>> {
    build_extension_bounded(p, e, m, DEFAULT_DEGREE_BOUND)
}

pub fn build_extension_bounded(p: u32, e: usize, m: usize, bound: usize) -> Result<Arc<FieldCtx>> {
    if !fp_poly::is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if p >= MAX_CHARACTERISTIC {
        return Err(Error::PrimeTooLarge(p));
    }
    if e == 0 || m == 0 {
        return Err(Error::Precondition("extension degrees must be positive".into()));
    }
    let k = e * m;
    if k > bound {
        return Err(Error::DegreeOverflow { degree: k, bound });
    }
    if let Some(ctx) = registry().lock().unwrap().get(&(p, e, m)) {
        return Ok(ctx.clone());
    }
    // built outside the lock; a racing builder produces the identical context
    let ctx = Arc::new(FieldCtx::new(p, e, m));
    let mut reg = registry().lock().unwrap();
    Ok(reg.entry((p, e, m)).or_insert(ctx).clone())
}

impl FieldCtx {
    fn new(p: u32, e: usize, m: usize) -> Self {
        let k = e * m;
        let modulus = fp_poly::smallest_irreducible(p, k);
        assert!(fp_poly::is_irreducible(&modulus, p));
        let tail =
            modulus[..k].iter().enumerate().filter(|(_, &c)| c != 0).map(|(i, &c)| (i, (p - c) as u64)).collect();
        let q = (p as usize).pow(e as u32);
        let frob = fp_poly::power_columns(&modulus, q, p);
        FieldCtx {
            p,
            e,
            m,
            k,
            modulus,
            tail,
            frob,
            base_gen: OnceLock::new(),
            frob_inv: OnceLock::new(),
            embeddings: Mutex::new(HashMap::new()),
        }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn e(&self) -> usize {
        self.e
    }

    /// Degree over F_q.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Degree over F_p.
    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn q(&self) -> u64 {
        (self.p as u64).pow(self.e as u32)
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn descriptor(&self) -> CtxDescriptor {
        CtxDescriptor { p: self.p, e: self.e, m: self.m, modulus: self.modulus.clone() }
    }

    pub fn same_field(&self, other: &FieldCtx) -> bool {
        self.p == other.p && self.e == other.e && self.m == other.m
    }

    /// Columns of x ↦ x^q over F_p.
    pub fn frobenius_columns(&self) -> &[Vec<u32>] {
        &self.frob
    }

    pub fn zero(self: &Arc<Self>) -> FieldElem {
        FieldElem { ctx: self.clone(), c: vec![0; self.k] }
    }

    pub fn one(self: &Arc<Self>) -> FieldElem {
        self.from_int(1)
    }

    pub fn from_int(self: &Arc<Self>, v: i64) -> FieldElem {
        let mut c = vec![0; self.k];
        c[0] = v.rem_euclid(self.p as i64) as u32;
        FieldElem { ctx: self.clone(), c }
    }

    /// The class of x, which generates the field over F_p.
    pub fn generator(self: &Arc<Self>) -> FieldElem {
        let mut z = self.zero();
        if self.k == 1 {
            z.c[0] = self.p - self.modulus[0] % self.p;
            z.c[0] %= self.p;
        } else {
            z.c[1] = 1;
        }
        z
    }

    pub fn from_coeffs(self: &Arc<Self>, coeffs: &[u32]) -> Result<FieldElem> {
        if coeffs.len() > self.k {
            return Err(Error::Parse(format!("element has {} coefficients, field degree is {}", coeffs.len(), self.k)));
        }
        let mut c = vec![0; self.k];
        for (slot, &v) in c.iter_mut().zip(coeffs) {
            if v >= self.p {
                return Err(Error::Parse(format!("coefficient {v} not reduced mod {}", self.p)));
            }
            *slot = v;
        }
        Ok(FieldElem { ctx: self.clone(), c })
    }

    /// Element from an arbitrary polynomial in x, reduced modulo the modulus.
    pub fn from_poly(self: &Arc<Self>, poly: &[u32]) -> FieldElem {
        let p = self.p as u64;
        let mut acc: Vec<u64> = poly.iter().map(|&v| v as u64 % p).collect();
        if acc.len() < self.k {
            acc.resize(self.k, 0);
        }
        fp_poly::reduce_in_place(&mut acc, self.k, &self.tail, self.p);
        FieldElem { ctx: self.clone(), c: acc[..self.k].iter().map(|&v| (v % p) as u32).collect() }
    }

    /// All field elements in lexicographic coefficient order (only sensible for tiny fields).
    pub fn elements(self: &Arc<Self>) -> impl Iterator<Item = FieldElem> + '_ {
        let size = (self.p as u64).pow(self.k as u32);
        (0..size).map(move |mut idx| {
            let mut c = vec![0; self.k];
            for slot in c.iter_mut() {
                *slot = (idx % self.p as u64) as u32;
                idx /= self.p as u64;
            }
            FieldElem { ctx: self.clone(), c }
        })
    }

    pub(crate) fn mul_raw(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        let k = self.k;
        let p = self.p as u64;
        let mut acc = vec![0u64; 2 * k - 1];
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            let ai = ai as u64;
            for (slot, &bj) in acc[i..i + k].iter_mut().zip(b) {
                *slot += ai * bj as u64;
            }
        }
        fp_poly::reduce_in_place(&mut acc, k, &self.tail, self.p);
        acc.truncate(k);
        acc.into_iter().map(|v| (v % p) as u32).collect()
    }

    pub(crate) fn frob_raw(&self, a: &[u32]) -> Vec<u32> {
        fp_poly::apply_columns(&self.frob, a, self.p)
    }

    /// Image of the generator of F_q = F_p[y]/(g_e) inside this field.
    pub(crate) fn base_generator(&self) -> &[u32] {
        self.base_gen.get_or_init(|| {
            if self.e == 1 {
                return Vec::new();
            }
            let g = fp_poly::smallest_irreducible(self.p, self.e);
            if self.m == 1 {
                let mut v = vec![0; self.k];
                v[1] = 1;
                return v;
            }
            let basis = self.subfield_basis(1);
            self.first_root_in(&basis, &g, |_| true).expect("F_q must embed")
        })
    }

    /// F_p-basis of the subfield F_{q^d} (kernel of Frob^d − 1).
    pub(crate) fn subfield_basis(&self, d: usize) -> Vec<Vec<u32>> {
        let k = self.k;
        let p = self.p;
        let mut mat = FpMatrix::zeros(p, k, k);
        let mut col: Vec<Vec<u32>> = (0..k)
            .map(|j| {
                let mut v = vec![0u32; k];
                v[j] = 1;
                v
            })
            .collect();
        for _ in 0..d {
            col = col.iter().map(|v| self.frob_raw(v)).collect();
        }
        for (j, v) in col.iter().enumerate() {
            let mut v = v.clone();
            v[j] = (v[j] + p - 1) % p;
            mat.set_col(j, &v);
        }
        mat.factor().nullspace()
    }

    /// First element (in lexicographic order over `basis`) that is a root of the
    /// F_p-polynomial `g` and satisfies `accept`.
    fn first_root_in(&self, basis: &[Vec<u32>], g: &[u32], accept: impl Fn(&[u32]) -> bool) -> Option<Vec<u32>> {
        let p = self.p as u64;
        let dim = basis.len();
        let total = p.checked_pow(dim as u32)?;
        for idx in 0..total {
            let mut digits = idx;
            let mut v = vec![0u64; self.k];
            for b in basis {
                let c = digits % p;
                digits /= p;
                if c != 0 {
                    for (slot, &x) in v.iter_mut().zip(b) {
                        *slot += c * x as u64;
                    }
                }
            }
            let v: Vec<u32> = v.into_iter().map(|x| (x % p) as u32).collect();
            if self.eval_fp_poly(g, &v).iter().all(|&c| c == 0) && accept(&v) {
                return Some(v);
            }
        }
        None
    }

    fn eval_fp_poly(&self, g: &[u32], v: &[u32]) -> Vec<u32> {
        let mut acc = vec![0u32; self.k];
        for &c in g.iter().rev() {
            acc = self.mul_raw(&acc, v);
            acc[0] = (acc[0] + c) % self.p;
        }
        acc
    }

    /// Embedding of F_{q^d} (canonical context) into this field; requires d | M.
    pub fn embedding_from(self: &Arc<Self>, d: usize) -> Result<Arc<Embedding>> {
        if self.m % d != 0 {
            return Err(Error::Precondition(format!("F_q^{d} does not embed in F_q^{}", self.m)));
        }
        if let Some(emb) = self.embeddings.lock().unwrap().get(&d) {
            return Ok(emb.clone());
        }
        let small = build_extension_bounded(self.p, self.e, d, usize::MAX)?;
        let emb = Arc::new(Embedding::new(&small, self));
        self.embeddings.lock().unwrap().insert(d, emb.clone());
        Ok(emb)
    }

    fn frob_inverse(&self) -> &Echelon {
        self.frob_inv.get_or_init(|| {
            let mut mat = FpMatrix::zeros(self.p, self.k, self.k);
            for (j, col) in self.frob.iter().enumerate() {
                mat.set_col(j, col);
            }
            mat.factor()
        })
    }
}

/// A field embedding F_{q^d} ↪ F_{q^M}, stored as the images of the powers of the
/// source generator.
#[derive(Debug)]
pub struct Embedding {
    source: Arc<FieldCtx>,
    images: Vec<Vec<u32>>,
}

impl Embedding {
    fn new(small: &Arc<FieldCtx>, big: &Arc<FieldCtx>) -> Self {
        let ks = small.degree();
        if small.same_field(big) {
            let images = (0..ks)
                .map(|j| {
                    let mut v = vec![0; ks];
                    v[j] = 1;
                    v
                })
                .collect();
            return Embedding { source: small.clone(), images };
        }
        let basis = big.subfield_basis(small.m());
        let small_base = small.base_generator().to_vec();
        let big_base = big.base_generator().to_vec();
        let root = big
            .first_root_in(&basis, small.modulus(), |y| {
                if small.e() == 1 {
                    return true;
                }
                // the image of F_q under y must agree with the fixed base embedding
                let mut acc = vec![0u32; big.degree()];
                let mut pw = vec![0u32; big.degree()];
                pw[0] = 1;
                for &c in &small_base {
                    for (slot, &x) in acc.iter_mut().zip(&pw) {
                        *slot = ((*slot as u64 + c as u64 * x as u64) % big.p() as u64) as u32;
                    }
                    pw = big.mul_raw(&pw, y);
                }
                acc == big_base
            })
            .expect("subfield must contain a compatible root");
        let mut images = Vec::with_capacity(ks);
        let mut pw = vec![0u32; big.degree()];
        pw[0] = 1;
        for _ in 0..ks {
            images.push(pw.clone());
            pw = big.mul_raw(&pw, &root);
        }
        Embedding { source: small.clone(), images }
    }

    pub fn source(&self) -> &Arc<FieldCtx> {
        &self.source
    }

    pub fn apply(&self, target: &Arc<FieldCtx>, x: &FieldElem) -> FieldElem {
        debug_assert!(x.ctx.same_field(&self.source));
        let c = fp_poly::apply_columns(&self.images, &x.c, target.p());
        FieldElem { ctx: target.clone(), c }
    }
}

/// An element of F_{q^M}, as coefficients over F_p in the power basis of the modulus.
#[derive(Clone)]
pub struct FieldElem {
    ctx: Arc<FieldCtx>,
    c: Vec<u32>,
}

impl PartialEq for FieldElem {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.same_field(&other.ctx) && self.c == other.c
    }
}

impl Eq for FieldElem {}

impl std::hash::Hash for FieldElem {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.c.hash(state);
    }
}

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.c)
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ctx.k == 1 {
            return write!(f, "{}", self.c[0]);
        }
        write!(f, "[")?;
        let last = self.c.iter().rposition(|&v| v != 0).unwrap_or(0);
        for (i, v) in self.c[..=last].iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")
    }
}

impl FieldElem {
    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.c
    }

    /// Coefficient list with trailing zeros dropped.
    pub fn to_vec(&self) -> Vec<u32> {
        let mut v = self.c.clone();
        fp_poly::trim(&mut v);
        v
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&v| v == 0)
    }

    pub fn is_one(&self) -> bool {
        self.c[0] == 1 && self.c[1..].iter().all(|&v| v == 0)
    }

    pub fn neg(&self) -> FieldElem {
        let p = self.ctx.p;
        let c = self.c.iter().map(|&v| if v == 0 { 0 } else { p - v }).collect();
        FieldElem { ctx: self.ctx.clone(), c }
    }

    pub fn add(&self, o: &FieldElem) -> FieldElem {
        let p = self.ctx.p;
        let c = self
            .c
            .iter()
            .zip(&o.c)
            .map(|(&a, &b)| {
                let s = a + b;
                if s >= p {
                    s - p
                } else {
                    s
                }
            })
            .collect();
        FieldElem { ctx: self.ctx.clone(), c }
    }

    pub fn sub(&self, o: &FieldElem) -> FieldElem {
        let p = self.ctx.p;
        let c = self.c.iter().zip(&o.c).map(|(&a, &b)| if a >= b { a - b } else { a + p - b }).collect();
        FieldElem { ctx: self.ctx.clone(), c }
    }

    pub fn mul(&self, o: &FieldElem) -> FieldElem {
        debug_assert!(self.ctx.same_field(&o.ctx));
        FieldElem { ctx: self.ctx.clone(), c: self.ctx.mul_raw(&self.c, &o.c) }
    }

    pub fn scale(&self, s: u32) -> FieldElem {
        let p = self.ctx.p as u64;
        let s = s as u64 % p;
        let c = self.c.iter().map(|&v| (v as u64 * s % p) as u32).collect();
        FieldElem { ctx: self.ctx.clone(), c }
    }

    pub fn inv(&self) -> Option<FieldElem> {
        if self.is_zero() {
            return None;
        }
        let inv = fp_poly::inv_modulo(&self.c, &self.ctx.modulus, self.ctx.p)?;
        let mut c = inv;
        c.resize(self.ctx.k, 0);
        Some(FieldElem { ctx: self.ctx.clone(), c })
    }

    pub fn pow(&self, mut exp: u64) -> FieldElem {
        let mut base = self.clone();
        let mut acc = self.ctx.one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            exp >>= 1;
        }
        acc
    }

    /// x^(q^k).
    pub fn frobenius(&self, k: usize) -> FieldElem {
        let k = k % self.ctx.m;
        let mut c = self.c.clone();
        for _ in 0..k {
            c = self.ctx.frob_raw(&c);
        }
        FieldElem { ctx: self.ctx.clone(), c }
    }

    /// The inverse Frobenius x^(q^(M−1)).
    pub fn frobenius_inv(&self) -> FieldElem {
        if self.ctx.m == 1 {
            return self.clone();
        }
        let c = self.ctx.frob_inverse().solve(&self.c).expect("Frobenius is bijective");
        FieldElem { ctx: self.ctx.clone(), c }
    }

    /// Whether the element lies in F_q (is fixed by x ↦ x^q).
    pub fn is_phi_fixed(&self) -> bool {
        self.ctx.frob_raw(&self.c) == self.c
    }

    /// If this element lies in F_q, its code in the small-field numbering
    /// (base-p digits of the coefficients over the F_q modulus).
    pub fn to_base_code(&self) -> Option<u32> {
        if !self.is_phi_fixed() {
            return None;
        }
        let e = self.ctx.e;
        if e == 1 {
            return Some(self.c[0]);
        }
        let base = self.ctx.base_generator();
        let p = self.ctx.p as u64;
        let total = p.pow(e as u32);
        // F_q is tiny; scan for the matching combination of powers of the base generator
        let mut powers = Vec::with_capacity(e);
        let mut pw = vec![0u32; self.ctx.k];
        pw[0] = 1;
        for _ in 0..e {
            powers.push(pw.clone());
            pw = self.ctx.mul_raw(&pw, base);
        }
        (0..total).find_map(|code| {
            let mut digits = code;
            let mut v = vec![0u64; self.ctx.k];
            for pw in &powers {
                let d = digits % p;
                digits /= p;
                for (slot, &x) in v.iter_mut().zip(pw) {
                    *slot += d * x as u64;
                }
            }
            v.iter().zip(&self.c).all(|(&a, &b)| (a % p) as u32 == b).then_some(code as u32)
        })
    }
}

impl FieldCtx {
    /// The F_q element with small-field code `code` (base-p digits over the F_q modulus).
    pub fn from_base_code(self: &Arc<Self>, code: u32) -> FieldElem {
        let p = self.p;
        if self.e == 1 {
            return self.from_int(code as i64);
        }
        let base = self.base_generator().to_vec();
        let mut acc = self.zero();
        let mut pw = self.one();
        let g = FieldElem { ctx: self.clone(), c: base };
        let mut digits = code;
        for _ in 0..self.e {
            let d = digits % p;
            digits /= p;
            acc = acc.add(&pw.scale(d));
            pw = pw.mul(&g);
        }
        acc
    }
}

impl std::ops::Add for &FieldElem {
    type Output = FieldElem;
    fn add(self, o: &FieldElem) -> FieldElem {
        FieldElem::add(self, o)
    }
}

impl std::ops::Sub for &FieldElem {
    type Output = FieldElem;
    fn sub(self, o: &FieldElem) -> FieldElem {
        FieldElem::sub(self, o)
    }
}

impl std::ops::Mul for &FieldElem {
    type Output = FieldElem;
    fn mul(self, o: &FieldElem) -> FieldElem {
        FieldElem::mul(self, o)
    }
}

impl std::ops::Neg for &FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        FieldElem::neg(self)
    }
}

/// Free-function form of the Frobenius: x ↦ x^(q^k).
pub fn frobenius(x: &FieldElem, k: usize) -> FieldElem {
    x.frobenius(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f25_modulus_and_frobenius() {
        let ctx = build_extension(5, 1, 2).unwrap();
        assert_eq!(ctx.modulus(), &[2, 0, 1]);
        let x = ctx.generator();
        let f = x.frobenius(1);
        assert_eq!(f, x.pow(5));
        assert_ne!(f, x);
        assert_eq!(f.frobenius(1), x);
    }

    #[test]
    fn prime_field_case() {
        let ctx = build_extension(5, 1, 1).unwrap();
        assert_eq!(ctx.degree(), 1);
        let two = ctx.from_int(2);
        assert_eq!(two.frobenius(3), two);
        assert_eq!(two.mul(&two.inv().unwrap()), ctx.one());
        assert_eq!(ctx.generator(), ctx.zero());
    }

    #[test]
    fn errors() {
        assert_eq!(build_extension(6, 1, 1).unwrap_err(), Error::NotPrime(6));
        assert!(matches!(build_extension(5, 1, 65), Err(Error::DegreeOverflow { .. })));
    }

    #[test]
    fn base_field_embedding_in_f81() {
        // F_9 inside F_81: the base generator is a root of the F_9 modulus
        let ctx = build_extension(3, 2, 2).unwrap();
        let g = fp_poly::smallest_irreducible(3, 2);
        let b = ctx.base_generator().to_vec();
        assert!(ctx.eval_fp_poly(&g, &b).iter().all(|&c| c == 0));
        for code in 0..9 {
            let x = ctx.from_base_code(code);
            assert!(x.is_phi_fixed());
            assert_eq!(x.to_base_code(), Some(code));
        }
    }

    #[test]
    fn embedding_is_a_homomorphism() {
        let small = build_extension(5, 1, 2).unwrap();
        let big = build_extension(5, 1, 6).unwrap();
        let emb = big.embedding_from(2).unwrap();
        let elems: Vec<_> = small.elements().collect();
        for a in elems.iter().step_by(3) {
            for b in elems.iter().step_by(5) {
                let lhs = emb.apply(&big, &a.mul(b));
                let rhs = emb.apply(&big, a).mul(&emb.apply(&big, b));
                assert_eq!(lhs, rhs);
            }
            // the image of F_25 is fixed by Frob^2
            assert_eq!(emb.apply(&big, a).frobenius(2), emb.apply(&big, a));
        }
    }

    #[test]
    fn inverse_frobenius() {
        let ctx = build_extension(5, 1, 4).unwrap();
        let x = ctx.generator().add(&ctx.from_int(3));
        assert_eq!(x.frobenius_inv().frobenius(1), x);
        assert_eq!(x.frobenius_inv(), x.frobenius(3));
    }
}
