//! Truncated power series in t over a finite field, and square matrices of them.
//!
//! Matrices are stored by t-degree: `coeffs[l]` is the n×n coefficient of t^l,
//! which is the shape the fundamental-matrix recursion works in.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function_field::{reduce_at, valuation_at, BivarEntry, PlaceFin, Poly, Val};
use crate::gf::mat::Mat;
use crate::gf::{Embedding, FieldCtx, FieldElem};

/// c_0 + c_1 t + … + c_{N−1} t^{N−1} mod t^N.
#[derive(Clone, PartialEq, Eq)]
pub struct TruncSeries {
    coeffs: Vec<FieldElem>,
}

impl std::fmt::Debug for TruncSeries {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

impl TruncSeries {
    pub fn new(coeffs: Vec<FieldElem>) -> TruncSeries {
        assert!(!coeffs.is_empty(), "precision must be positive");
        TruncSeries { coeffs }
    }

    pub fn zero(ctx: &Arc<FieldCtx>, prec: usize) -> TruncSeries {
        TruncSeries { coeffs: vec![ctx.zero(); prec] }
    }

    pub fn one(ctx: &Arc<FieldCtx>, prec: usize) -> TruncSeries {
        let mut s = TruncSeries::zero(ctx, prec);
        s.coeffs[0] = ctx.one();
        s
    }

    pub fn prec(&self) -> usize {
        self.coeffs.len()
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        self.coeffs[0].ctx()
    }

    pub fn coeffs(&self) -> &[FieldElem] {
        &self.coeffs
    }

    pub fn coeff(&self, l: usize) -> &FieldElem {
        &self.coeffs[l]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, o: &TruncSeries) -> TruncSeries {
        TruncSeries { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.add(b)).collect() }
    }

    pub fn sub(&self, o: &TruncSeries) -> TruncSeries {
        TruncSeries { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.sub(b)).collect() }
    }

    pub fn neg(&self) -> TruncSeries {
        TruncSeries { coeffs: self.coeffs.iter().map(|a| a.neg()).collect() }
    }

    pub fn mul(&self, o: &TruncSeries) -> TruncSeries {
        let n = self.prec().min(o.prec());
        let ctx = self.ctx().clone();
        let mut out = vec![ctx.zero(); n];
        for (i, a) in self.coeffs[..n].iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs[..n - i].iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] = out[i + j].add(&a.mul(b));
                }
            }
        }
        TruncSeries { coeffs: out }
    }

    pub fn inv(&self) -> Option<TruncSeries> {
        let c0 = self.coeffs[0].inv()?;
        let n = self.prec();
        let mut out: Vec<FieldElem> = Vec::with_capacity(n);
        out.push(c0.clone());
        for l in 1..n {
            let mut acc = self.ctx().zero();
            for j in 1..=l {
                acc = acc.add(&self.coeffs[j].mul(&out[l - j]));
            }
            out.push(acc.mul(&c0).neg());
        }
        Some(TruncSeries { coeffs: out })
    }

    pub fn phi(&self, k: usize) -> TruncSeries {
        TruncSeries { coeffs: self.coeffs.iter().map(|c| c.frobenius(k)).collect() }
    }

    pub fn truncate(&self, prec: usize) -> TruncSeries {
        TruncSeries { coeffs: self.coeffs[..prec.min(self.prec())].to_vec() }
    }
}

/// Expansion of a bivariate entry at a place: s ↦ α, denominator inverted as a
/// unit power series, to precision `prec`.
pub fn expand_at_place(e: &BivarEntry, place: &PlaceFin, prec: usize) -> Result<TruncSeries> {
    let coeffs = e.t_expansion(prec);
    let mut out = Vec::with_capacity(prec);
    for c in &coeffs {
        if valuation_at(place, c) < Val::Finite(0) {
            return Err(Error::NotIntegral);
        }
        out.push(reduce_at(place, c)?);
    }
    Ok(TruncSeries { coeffs: out })
}

/// Same as [`expand_at_place`] but with an explicit root of the irreducible `pi`.
pub(crate) fn expand_with_root(e: &BivarEntry, pi: &Poly, root: &FieldElem, prec: usize) -> Result<TruncSeries> {
    let coeffs =
        e.t_expansion(prec).iter().map(|c| PlaceFin::reduce_with_root(pi, root, c)).collect::<Result<Vec<_>>>()?;
    Ok(TruncSeries { coeffs })
}

/// An n×n matrix of truncated series, stored as its t-coefficient matrices.
#[derive(Clone, PartialEq, Eq)]
pub struct TruncSeriesMatrix {
    coeffs: Vec<Mat>,
}

impl std::fmt::Debug for TruncSeriesMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (l, c) in self.coeffs.iter().enumerate() {
            if l > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c:?}·t^{l}")?;
        }
        Ok(())
    }
}

impl TruncSeriesMatrix {
    pub fn from_coeffs(coeffs: Vec<Mat>) -> TruncSeriesMatrix {
        assert!(!coeffs.is_empty());
        TruncSeriesMatrix { coeffs }
    }

    pub fn identity(ctx: &Arc<FieldCtx>, n: usize, prec: usize) -> TruncSeriesMatrix {
        let mut coeffs = vec![Mat::zeros(ctx, n, n); prec];
        coeffs[0] = Mat::identity(ctx, n);
        TruncSeriesMatrix { coeffs }
    }

    pub fn zeros(ctx: &Arc<FieldCtx>, n: usize, prec: usize) -> TruncSeriesMatrix {
        TruncSeriesMatrix { coeffs: vec![Mat::zeros(ctx, n, n); prec] }
    }

    /// A constant matrix viewed as a series.
    pub fn constant(m: &Mat, prec: usize) -> TruncSeriesMatrix {
        let mut coeffs = vec![Mat::zeros(m.ctx(), m.rows(), m.cols()); prec];
        coeffs[0] = m.clone();
        TruncSeriesMatrix { coeffs }
    }

    pub fn from_entries(n: usize, entries: &[TruncSeries]) -> TruncSeriesMatrix {
        assert_eq!(entries.len(), n * n);
        let prec = entries[0].prec();
        let coeffs = (0..prec).map(|l| Mat::from_fn(n, n, |i, j| entries[i * n + j].coeff(l).clone())).collect();
        TruncSeriesMatrix { coeffs }
    }

    pub fn n(&self) -> usize {
        self.coeffs[0].rows()
    }

    pub fn prec(&self) -> usize {
        self.coeffs.len()
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        self.coeffs[0].ctx()
    }

    pub fn coeff(&self, l: usize) -> &Mat {
        &self.coeffs[l]
    }

    pub fn coeffs(&self) -> &[Mat] {
        &self.coeffs
    }

    pub fn constant_term(&self) -> &Mat {
        &self.coeffs[0]
    }

    pub fn entry(&self, i: usize, j: usize) -> TruncSeries {
        TruncSeries { coeffs: self.coeffs.iter().map(|m| m.get(i, j).clone()).collect() }
    }

    pub fn add(&self, o: &TruncSeriesMatrix) -> TruncSeriesMatrix {
        TruncSeriesMatrix { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.add(b)).collect() }
    }

    pub fn sub(&self, o: &TruncSeriesMatrix) -> TruncSeriesMatrix {
        TruncSeriesMatrix { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.sub(b)).collect() }
    }

    pub fn mul(&self, o: &TruncSeriesMatrix) -> TruncSeriesMatrix {
        let prec = self.prec().min(o.prec());
        let n = self.n();
        let ctx = self.ctx().clone();
        let coeffs = (0..prec)
            .map(|l| {
                let mut acc = Mat::zeros(&ctx, n, n);
                for j in 0..=l {
                    if self.coeffs[j].is_zero() || o.coeffs[l - j].is_zero() {
                        continue;
                    }
                    acc = acc.add(&self.coeffs[j].mul(&o.coeffs[l - j]));
                }
                acc
            })
            .collect();
        TruncSeriesMatrix { coeffs }
    }

    /// Left multiplication by a constant matrix.
    pub fn left_mul_const(&self, m: &Mat) -> TruncSeriesMatrix {
        TruncSeriesMatrix { coeffs: self.coeffs.iter().map(|c| m.mul(c)).collect() }
    }

    pub fn right_mul_const(&self, m: &Mat) -> TruncSeriesMatrix {
        TruncSeriesMatrix { coeffs: self.coeffs.iter().map(|c| c.mul(m)).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        self.coeffs[0].is_identity() && self.coeffs[1..].iter().all(|c| c.is_zero())
    }

    /// Coefficientwise x ↦ x^(q^k).
    pub fn apply_phi(&self, k: usize) -> TruncSeriesMatrix {
        TruncSeriesMatrix { coeffs: self.coeffs.iter().map(|c| c.frobenius(k)).collect() }
    }

    pub fn apply_phi_inv(&self) -> TruncSeriesMatrix {
        TruncSeriesMatrix { coeffs: self.coeffs.iter().map(|c| c.frobenius_inv()).collect() }
    }

    pub fn is_phi_fixed(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_phi_fixed())
    }

    pub fn embed(&self, emb: &Embedding, target: &Arc<FieldCtx>) -> TruncSeriesMatrix {
        TruncSeriesMatrix { coeffs: self.coeffs.iter().map(|c| c.embed(emb, target)).collect() }
    }

    pub fn truncate(&self, prec: usize) -> TruncSeriesMatrix {
        TruncSeriesMatrix { coeffs: self.coeffs[..prec.min(self.prec())].to_vec() }
    }

    /// Inverse to the working precision; requires an invertible constant term.
    pub fn invert(&self) -> Result<TruncSeriesMatrix> {
        let a0_inv = self.coeffs[0].inv().ok_or(Error::SingularConstantTerm)?;
        let n = self.n();
        let ctx = self.ctx().clone();
        let mut out: Vec<Mat> = Vec::with_capacity(self.prec());
        out.push(a0_inv.clone());
        for l in 1..self.prec() {
            let mut acc = Mat::zeros(&ctx, n, n);
            for j in 1..=l {
                if !self.coeffs[j].is_zero() {
                    acc = acc.add(&self.coeffs[j].mul(&out[l - j]));
                }
            }
            out.push(a0_inv.mul(&acc).neg());
        }
        Ok(TruncSeriesMatrix { coeffs: out })
    }

    /// x⁻¹·self·x.
    pub fn conjugate_by(&self, x: &TruncSeriesMatrix) -> Result<TruncSeriesMatrix> {
        Ok(x.invert()?.mul(self).mul(x))
    }

    /// Characteristic polynomial det(X·I − A) with series coefficients, low degree first.
    pub fn charpoly(&self) -> Vec<TruncSeries> {
        let n = self.n();
        let prec = self.prec();
        let ctx = self.ctx().clone();
        let entry: Vec<TruncSeries> = (0..n * n).map(|idx| self.entry(idx / n, idx % n)).collect();
        let at = |i: usize, j: usize| &entry[i * n + j];
        let one = TruncSeries::one(&ctx, prec);
        let zero = TruncSeries::zero(&ctx, prec);
        let mut v = vec![one.clone()];
        for r in 0..n {
            let mut toeplitz = vec![one.neg(), at(r, r).clone()];
            let mut pw: Vec<TruncSeries> = (0..r).map(|i| at(i, r).clone()).collect();
            for _ in 0..r {
                let val = (0..r).fold(zero.clone(), |acc, i| acc.add(&at(r, i).mul(&pw[i])));
                toeplitz.push(val);
                pw = (0..r).map(|i| (0..r).fold(zero.clone(), |acc, l| acc.add(&at(i, l).mul(&pw[l])))).collect();
            }
            let mut nv = Vec::with_capacity(r + 2);
            for i in 0..r + 2 {
                let mut acc = zero.clone();
                for (j, vj) in v.iter().enumerate() {
                    if i >= j && i - j < toeplitz.len() {
                        acc = acc.add(&toeplitz[i - j].mul(vj));
                    }
                }
                nv.push(acc);
            }
            v = nv;
        }
        if n % 2 == 1 {
            v = v.iter().map(|x| x.neg()).collect();
        }
        v.reverse();
        v
    }

    pub fn det(&self) -> TruncSeries {
        let cp = self.charpoly();
        if self.n() % 2 == 1 {
            cp[0].neg()
        } else {
            cp[0].clone()
        }
    }
}

/// JSON form of a series: coefficient lists over F_p.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesJson {
    pub prec: usize,
    pub coeffs: Vec<Vec<u32>>,
}

impl SeriesJson {
    pub fn from_series(s: &TruncSeries) -> SeriesJson {
        SeriesJson { prec: s.prec(), coeffs: s.coeffs().iter().map(|c| c.to_vec()).collect() }
    }

    pub fn to_series(&self, ctx: &Arc<FieldCtx>) -> Result<TruncSeries> {
        if self.coeffs.len() != self.prec || self.prec == 0 {
            return Err(Error::Parse("series length does not match precision".into()));
        }
        let coeffs = self.coeffs.iter().map(|c| ctx.from_coeffs(c)).collect::<Result<Vec<_>>>()?;
        Ok(TruncSeries::new(coeffs))
    }
}

/// Series matrix as nested entries.
pub fn matrix_to_json(m: &TruncSeriesMatrix) -> Vec<Vec<SeriesJson>> {
    let n = m.n();
    (0..n).map(|i| (0..n).map(|j| SeriesJson::from_series(&m.entry(i, j))).collect()).collect()
}

pub fn matrix_from_json(ctx: &Arc<FieldCtx>, rows: &[Vec<SeriesJson>]) -> Result<TruncSeriesMatrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Parse("series matrix must be square and nonempty".into()));
    }
    let entries = rows.iter().flatten().map(|s| s.to_series(ctx)).collect::<Result<Vec<_>>>()?;
    let prec = entries[0].prec();
    if entries.iter().any(|e| e.prec() != prec) {
        return Err(Error::Parse("entries have different precisions".into()));
    }
    Ok(TruncSeriesMatrix::from_entries(n, &entries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function_field::PlaceFin;
    use crate::gf::build_extension;
    use crate::gf::small::Fq;

    #[test]
    fn geometric_series_at_any_place() {
        let f = Fq::new(5, 1).unwrap();
        let e = BivarEntry::parse(&f, "1", "1-t").unwrap();
        let place = PlaceFin::linear(&f, 3);
        let s = expand_at_place(&e, &place, 4).unwrap();
        assert!(s.coeffs().iter().all(|c| c.is_one()));
    }

    #[test]
    fn substitution_and_inverse_expansion() {
        let f = Fq::new(5, 1).unwrap();
        let place = PlaceFin::linear(&f, 2);
        let e = BivarEntry::parse(&f, "1+s*t", "1").unwrap();
        let s = expand_at_place(&e, &place, 3).unwrap();
        let ctx = place.residue_ctx();
        assert_eq!(s.coeffs(), &[ctx.from_int(1), ctx.from_int(2), ctx.from_int(0)]);
        let e = BivarEntry::parse(&f, "1", "1+s*t").unwrap();
        let s = expand_at_place(&e, &place, 3).unwrap();
        assert_eq!(s.coeffs(), &[ctx.from_int(1), ctx.from_int(3), ctx.from_int(4)]);
        let prod = s.mul(&TruncSeries::new(vec![ctx.from_int(1), ctx.from_int(2), ctx.zero()]));
        assert_eq!(prod, TruncSeries::one(ctx, 3));
    }

    #[test]
    fn not_integral() {
        let f = Fq::new(5, 1).unwrap();
        let place = PlaceFin::linear(&f, 2);
        let e = BivarEntry::new(
            crate::function_field::BiPoly::constant(&f, 1),
            crate::function_field::BiPoly::from_s(Poly::linear(&f, 2)),
        )
        .unwrap();
        assert_eq!(expand_at_place(&e, &place, 2).unwrap_err(), Error::NotIntegral);
    }

    #[test]
    fn diag_inverse() {
        let ctx = build_extension(5, 1, 1).unwrap();
        let mut m = TruncSeriesMatrix::identity(&ctx, 2, 3);
        m.coeffs[1].set(0, 0, ctx.one());
        let inv = m.invert().unwrap();
        assert_eq!(inv.entry(0, 0).coeffs(), &[ctx.from_int(1), ctx.from_int(-1), ctx.from_int(1)]);
        assert!(m.mul(&inv).is_identity());
    }

    #[test]
    fn det_of_diag() {
        let ctx = build_extension(7, 1, 1).unwrap();
        let mut m = TruncSeriesMatrix::identity(&ctx, 3, 4);
        m.coeffs[1].set(0, 0, ctx.from_int(2));
        m.coeffs[1].set(1, 1, ctx.from_int(3));
        let d = m.det();
        // (1+2t)(1+3t) = 1 + 5t + 6t^2
        assert_eq!(d.coeffs(), &[ctx.from_int(1), ctx.from_int(5), ctx.from_int(6), ctx.zero()]);
    }
}
