//! Finite places of F_q(s), discrete valuations and reduction maps.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Poly, RatFunc};
use crate::error::{Error, Result};
use crate::gf::small::Fq;
use crate::gf::{build_extension_bounded, FieldCtx, FieldElem};

/// A valuation value; `Infinity` is the valuation of zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Val {
    Finite(i64),
    Infinity,
}

impl Val {
    pub fn finite(self) -> Option<i64> {
        match self {
            Val::Finite(v) => Some(v),
            Val::Infinity => None,
        }
    }
}

impl fmt::Display for Val {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Val::Finite(v) => write!(f, "{v}"),
            Val::Infinity => write!(f, "inf"),
        }
    }
}

/// A finite place: monic irreducible π of degree d and a chosen root α ∈ F_{q^d}.
#[derive(Clone)]
pub struct PlaceFin {
    pi: Poly,
    d: usize,
    root: FieldElem,
}

impl fmt::Debug for PlaceFin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.pi)
    }
}

impl PartialEq for PlaceFin {
    fn eq(&self, o: &Self) -> bool {
        self.pi == o.pi
    }
}

impl Eq for PlaceFin {}

/// JSON form of a place.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaceJson {
    pub pi: Vec<u32>,
    pub d: usize,
}

impl PlaceFin {
    /// Place of a monic irreducible; the root is the smallest one in the canonical F_{q^d}.
    pub fn new(pi: Poly) -> Result<PlaceFin> {
        let d = pi.degree().filter(|&d| d > 0).ok_or(Error::NotIrreducible)?;
        if !pi.is_monic() || !pi.is_irreducible() {
            return Err(Error::NotIrreducible);
        }
        let f = pi.field();
        let ctx = build_extension_bounded(f.p(), f.e(), d, usize::MAX)?;
        let root = ctx
            .elements()
            .find(|x| pi.eval_in(x).is_zero())
            .expect("irreducible polynomial splits in its residue field");
        Ok(PlaceFin { pi, d, root })
    }

    /// The degree-one place (s − a).
    pub fn linear(f: &Arc<Fq>, a: u32) -> PlaceFin {
        PlaceFin::new(Poly::linear(f, a)).unwrap()
    }

    pub fn pi(&self) -> &Poly {
        &self.pi
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn root(&self) -> &FieldElem {
        &self.root
    }

    pub fn residue_ctx(&self) -> &Arc<FieldCtx> {
        self.root.ctx()
    }

    pub fn to_json(&self) -> PlaceJson {
        PlaceJson { pi: self.pi.coeffs().to_vec(), d: self.d }
    }

    pub fn from_json(f: &Arc<Fq>, j: &PlaceJson) -> Result<PlaceFin> {
        let pi = Poly::new(f, j.pi.clone());
        if pi.degree() != Some(j.d) {
            return Err(Error::Parse("place degree does not match polynomial".into()));
        }
        PlaceFin::new(pi)
    }

    /// Reduction of a rational function with an explicitly chosen root of π.
    pub(crate) fn reduce_with_root(pi: &Poly, root: &FieldElem, f: &RatFunc) -> Result<FieldElem> {
        if f.is_zero() {
            return Ok(root.ctx().zero());
        }
        let (vn, num) = f.num().strip(pi);
        let (vd, den) = f.den().strip(pi);
        if vn < vd {
            return Err(Error::NotIntegral);
        }
        if vn > vd {
            return Ok(root.ctx().zero());
        }
        let d = den.eval_in(root).inv().expect("cofactor is a unit at the place");
        Ok(num.eval_in(root).mul(&d))
    }
}

/// All places of degree d, i.e. monic irreducibles in lexicographic order
/// (coefficient of s^(d−1) most significant, constant term least).
pub fn enumerate_places(f: &Arc<Fq>, d: usize) -> Result<Vec<PlaceFin>> {
    if d == 0 {
        return Err(Error::Precondition("place degree must be positive".into()));
    }
    let q = f.q() as u64;
    let total = q.checked_pow(d as u32).ok_or_else(|| Error::Precondition("too many candidate polynomials".into()))?;
    let mut out = Vec::new();
    for idx in 0..total {
        let mut c = Vec::with_capacity(d + 1);
        let mut x = idx;
        for _ in 0..d {
            c.push((x % q) as u32);
            x /= q;
        }
        c.push(1);
        let pi = Poly::new(f, c);
        if pi.is_irreducible() {
            out.push(PlaceFin::new(pi)?);
        }
    }
    Ok(out)
}

/// Number of monic irreducibles of degree d over F_q: (1/d) Σ_{m|d} μ(m) q^(d/m).
pub fn necklace_count(q: u64, d: usize) -> u64 {
    let mut total: i128 = 0;
    for m in (1..=d).filter(|m| d % m == 0) {
        let mu = mobius(m);
        total += mu as i128 * (q as i128).pow((d / m) as u32);
    }
    (total / d as i128) as u64
}

fn mobius(mut n: usize) -> i32 {
    let mut result = 1;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            result = -result;
        }
        p += 1;
    }
    if n > 1 {
        result = -result;
    }
    result
}

pub fn valuation_at(place: &PlaceFin, f: &RatFunc) -> Val {
    if f.is_zero() {
        return Val::Infinity;
    }
    let (vn, _) = f.num().strip(&place.pi);
    let (vd, _) = f.den().strip(&place.pi);
    Val::Finite(vn as i64 - vd as i64)
}

/// κ: valuation ring → F_{q^d}, s ↦ α.
pub fn reduce_at(place: &PlaceFin, f: &RatFunc) -> Result<FieldElem> {
    PlaceFin::reduce_with_root(&place.pi, &place.root, f)
}

/// Σ c_i t^i with c_i ∈ F_q(s).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TPoly {
    pub coeffs: Vec<RatFunc>,
}

impl TPoly {
    pub fn new(mut coeffs: Vec<RatFunc>) -> TPoly {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        TPoly { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

/// Gauss extension ν_t(Σ a_i t^i) = min_i ν(a_i).
pub fn gauss_valuation(place: &PlaceFin, g: &TPoly) -> Result<i64> {
    g.coeffs.iter().map(|c| valuation_at(place, c)).min().and_then(Val::finite).ok_or(Error::ZeroInput)
}
