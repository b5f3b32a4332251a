//! Fundamental matrices at residue level: the Lang step D₀·Y₀^(q) = Y₀, the
//! layer recursion D₀Y_l^(q) + Σ_{j≥1} D_j Y_{l−j}^(q) = Y_l, SL_n normalization,
//! witness extraction and conjugator descent.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::function_field::PlaceFin;
use crate::gf::mat::Mat;
use crate::gf::semilinear::SemilinearOperator;
use crate::gf::{build_extension_bounded, FieldCtx, FieldElem};
use crate::module::{frobenius_product, reduce_module_at, FrobModule, ReducedModule};
use crate::series::TruncSeriesMatrix;

/// Default cap on the splitting degree over F_q.
pub const DEFAULT_M_MAX: usize = 1024;

/// Lexicographic candidates tried before falling back to random combinations.
const LEX_SCAN_CAP: u64 = 1 << 14;

#[derive(Debug, Clone)]
pub struct LangSolution {
    pub m: usize,
    pub y0: Mat,
    /// F_p-dimension of {Z : D₀·Z^(q) = Z}.
    pub homogeneous_dim: usize,
}

/// Ybar with Dbar·φ_q(Ybar) = Ybar over F_{q^M}, to the precision of Dbar.
#[derive(Debug, Clone)]
pub struct TruncatedSolution {
    pub m: usize,
    pub ybar: TruncSeriesMatrix,
}

/// Multiplicative order of an invertible matrix, if it is at most `cap`.
pub fn matrix_order(a: &Mat, cap: u64) -> Option<u64> {
    let mut acc = a.clone();
    for k in 1..=cap {
        if acc.is_identity() {
            return Some(k);
        }
        acc = acc.mul(a);
    }
    None
}

/// Product D₀·φ(D₀)⋯φ^(d−1)(D₀) of a constant matrix over F_{q^d}.
fn constant_frobenius_product(d0: &Mat) -> Mat {
    let d = d0.ctx().m();
    let mut acc = d0.clone();
    let mut cur = d0.clone();
    for _ in 1..d {
        cur = cur.frobenius(1);
        acc = acc.mul(&cur);
    }
    acc
}

fn divisors(n: u64) -> Vec<u64> {
    (1..=n).filter(|k| n % k == 0).collect()
}

fn rng_for(seed: Option<u64>) -> Option<ChaCha8Rng> {
    seed.map(ChaCha8Rng::seed_from_u64)
}

/// Lang step at a fixed M. Returns `None` when F_{q^M} carries no invertible solution.
fn lang_at(d0: &Mat, m: usize, rng: &mut Option<ChaCha8Rng>) -> Result<Option<(LangSolution, SemilinearOperator)>> {
    let src = d0.ctx();
    let ctx = build_extension_bounded(src.p(), src.e(), m, usize::MAX)?;
    let emb = ctx.embedding_from(src.m())?;
    let a = d0.embed(&emb, &ctx);
    let op = SemilinearOperator::new(&a)?;
    let n = a.rows();
    let basis = op.column_kernel();
    if basis.len() < n * src.e() {
        return Ok(None);
    }
    let y0 = choose_invertible(&ctx, n, &basis, rng).ok_or(Error::SplittingDegreeExceeded(m))?;
    let homogeneous_dim = basis.len() * n;
    Ok(Some((LangSolution { m, y0, homogeneous_dim }, op)))
}

fn combine(ctx: &Arc<FieldCtx>, basis: &[Vec<FieldElem>], digits: &[u32], n: usize) -> Vec<FieldElem> {
    let mut col = vec![ctx.zero(); n];
    for (b, &c) in basis.iter().zip(digits) {
        if c != 0 {
            for (slot, x) in col.iter_mut().zip(b) {
                *slot = slot.add(&x.scale(c));
            }
        }
    }
    col
}

fn matrix_from_digits(ctx: &Arc<FieldCtx>, n: usize, basis: &[Vec<FieldElem>], digits: &[u32]) -> Mat {
    let dim = basis.len();
    let cols: Vec<Vec<FieldElem>> = (0..n).map(|j| combine(ctx, basis, &digits[j * dim..(j + 1) * dim], n)).collect();
    Mat::from_fn(n, n, |i, j| cols[j][i].clone())
}

/// First invertible matrix whose columns run through the span of `basis` in
/// counter order, or a random one when a generator is supplied.
fn choose_invertible(
    ctx: &Arc<FieldCtx>,
    n: usize,
    basis: &[Vec<FieldElem>],
    rng: &mut Option<ChaCha8Rng>,
) -> Option<Mat> {
    let p = ctx.p();
    let len = n * basis.len();
    if let Some(r) = rng.as_mut() {
        loop {
            let digits: Vec<u32> = (0..len).map(|_| r.gen_range(0..p)).collect();
            let y = matrix_from_digits(ctx, n, basis, &digits);
            if !y.det().is_zero() {
                return Some(y);
            }
        }
    }
    let total = (p as u64).checked_pow(len as u32).unwrap_or(u64::MAX);
    for idx in 1..total.min(LEX_SCAN_CAP) {
        let mut x = idx;
        let digits: Vec<u32> = (0..len)
            .map(|_| {
                let c = (x % p as u64) as u32;
                x /= p as u64;
                c
            })
            .collect();
        let y = matrix_from_digits(ctx, n, basis, &digits);
        if !y.det().is_zero() {
            return Some(y);
        }
    }
    let mut fallback = Some(ChaCha8Rng::seed_from_u64(0));
    choose_invertible(ctx, n, basis, &mut fallback)
}

/// Invertible Y₀ over F_{q^M} with D₀·Y₀^(q) = Y₀; D₀ lives over F_{q^d}.
///
/// M runs through d·j for j dividing the order of D₀·φ(D₀)⋯φ^(d−1)(D₀): a solution over
/// F_{q^M} forces that order to divide M/d, and it always suffices.
pub fn lang_solve(d0: &Mat, m_max: usize, seed: Option<u64>) -> Result<LangSolution> {
    let mut rng = rng_for(seed);
    lang_search(d0, m_max, &mut rng).map(|(sol, _)| sol)
}

fn lang_search(d0: &Mat, m_max: usize, rng: &mut Option<ChaCha8Rng>) -> Result<(LangSolution, SemilinearOperator)> {
    if d0.det().is_zero() {
        return Err(Error::Precondition("D0 must be invertible".into()));
    }
    let d = d0.ctx().m();
    let cap = (m_max / d) as u64;
    let order = matrix_order(&constant_frobenius_product(d0), cap).ok_or(Error::SplittingDegreeExceeded(m_max))?;
    for j in divisors(order) {
        if let Some(found) = lang_at(d0, d * j as usize, rng)? {
            return Ok(found);
        }
    }
    Err(Error::Invariant("no Lang solution at the predicted splitting degree".into()))
}

/// Solves Dbar·φ_q(Ybar) = Ybar layer by layer. When a layer is inconsistent the
/// residual unipotent part of the Frobenius product has order divisible by p, and M is
/// multiplied by p. With a seed, Y₀ and every layer receive random homogeneous parts.
pub fn solve_truncated(r: &ReducedModule, m_max: usize, seed: Option<u64>) -> Result<TruncatedSolution> {
    if r.level != 1 {
        return Err(Error::Precondition("solver expects a level-1 module".into()));
    }
    let mut rng = rng_for(seed);
    let dbar = &r.dbar;
    let src = dbar.ctx().clone();
    let (mut lang, mut op) = lang_search(dbar.constant_term(), m_max, &mut rng)?;
    loop {
        let ctx = op.ctx().clone();
        let emb = ctx.embedding_from(src.m())?;
        let dm = dbar.embed(&emb, &ctx);
        match layers(&dm, &op, &lang.y0, &mut rng) {
            Ok(coeffs) => {
                return Ok(TruncatedSolution { m: lang.m, ybar: TruncSeriesMatrix::from_coeffs(coeffs) });
            }
            Err(Error::Inconsistent) => {
                let next = lang.m * src.p() as usize;
                if next > m_max {
                    return Err(Error::SplittingDegreeExceeded(m_max));
                }
                let (l2, o2) = lang_at(dbar.constant_term(), next, &mut rng)?
                    .ok_or_else(|| Error::Invariant("Lang solution lost after raising M".into()))?;
                lang = l2;
                op = o2;
            }
            Err(e) => return Err(e),
        }
    }
}

fn layers(dm: &TruncSeriesMatrix, op: &SemilinearOperator, y0: &Mat, rng: &mut Option<ChaCha8Rng>) -> Result<Vec<Mat>> {
    let ctx = op.ctx().clone();
    let n = y0.rows();
    let kernel = if rng.is_some() { op.column_kernel() } else { Vec::new() };
    let mut ys: Vec<Mat> = vec![y0.clone()];
    let mut frob: Vec<Mat> = vec![y0.frobenius(1)];
    for l in 1..dm.prec() {
        let mut b = Mat::zeros(&ctx, n, n);
        for j in 1..=l {
            if !dm.coeff(j).is_zero() {
                b = b.add(&dm.coeff(j).mul(&frob[l - j]));
            }
        }
        let mut y = op.solve_particular(&b)?;
        if let Some(r) = rng.as_mut() {
            let p = ctx.p();
            for c in 0..n {
                let digits: Vec<u32> = (0..kernel.len()).map(|_| r.gen_range(0..p)).collect();
                for (i, v) in combine(&ctx, &kernel, &digits, n).into_iter().enumerate() {
                    let cur = y.get(i, c).add(&v);
                    y.set(i, c, cur);
                }
            }
        }
        frob.push(y.frobenius(1));
        ys.push(y);
    }
    Ok(ys)
}

/// Right-multiplies by diag(det⁻¹, 1, …, 1); det(Ybar) must have φ_q-fixed coefficients.
pub fn normalize_to_sl(ybar: &TruncSeriesMatrix) -> Result<TruncSeriesMatrix> {
    let det = ybar.det();
    if !det.coeffs().iter().all(|c| c.is_phi_fixed()) {
        return Err(Error::DeterminantNotPhiFixed);
    }
    let inv = det.inv().ok_or(Error::SingularConstantTerm)?;
    let n = ybar.n();
    let ctx = ybar.ctx().clone();
    let prec = ybar.prec();
    let mut diag_coeffs = Vec::with_capacity(prec);
    for l in 0..prec {
        let mut m = if l == 0 { Mat::identity(&ctx, n) } else { Mat::zeros(&ctx, n, n) };
        m.set(0, 0, inv.coeff(l).clone());
        diag_coeffs.push(m);
    }
    Ok(ybar.mul(&TruncSeriesMatrix::from_coeffs(diag_coeffs)))
}

/// Matrix over F_{q^M} with φ-fixed entries, rewritten over the canonical F_q.
pub fn descend_to_base(m: &Mat, base: &Arc<FieldCtx>) -> Result<Mat> {
    let entries = m
        .entries()
        .iter()
        .map(|x| x.to_base_code().map(|c| base.from_base_code(c)).ok_or(Error::PhiFixednessViolated))
        .collect::<Result<Vec<_>>>()?;
    let n = m.cols();
    Ok(Mat::from_fn(m.rows(), n, |i, j| entries[i * n + j].clone()))
}

pub fn series_to_base(s: &TruncSeriesMatrix, base: &Arc<FieldCtx>) -> Result<TruncSeriesMatrix> {
    Ok(TruncSeriesMatrix::from_coeffs(s.coeffs().iter().map(|c| descend_to_base(c, base)).collect::<Result<_>>()?))
}

#[derive(Debug, Clone)]
pub struct WitnessChecks {
    pub phi_fixed: bool,
    pub det_one: bool,
    pub fundamental_identity: bool,
    pub charpoly_matches_product: bool,
}

#[derive(Debug, Clone)]
pub struct Witness {
    pub place: PlaceFin,
    pub m: usize,
    pub prec: usize,
    pub ybar: TruncSeriesMatrix,
    /// Frobenius product at the place, over F_{q^d}.
    pub dhat: TruncSeriesMatrix,
    /// h over the canonical F_q.
    pub h: TruncSeriesMatrix,
    pub h0: Mat,
    pub checks: WitnessChecks,
}

impl Witness {
    pub fn charpoly_h0(&self) -> Vec<FieldElem> {
        self.h0.charpoly()
    }
}

fn det_is_one(m: &TruncSeriesMatrix) -> bool {
    let d = m.det();
    d.coeff(0).is_one() && d.coeffs()[1..].iter().all(|c| c.is_zero())
}

/// reduce → solve → normalize → h = Ybar⁻¹·D̂·Ybar, with h φ_q-fixed.
pub fn extract_witness(
    m: &FrobModule,
    place: &PlaceFin,
    prec: usize,
    m_max: usize,
    seed: Option<u64>,
) -> Result<Witness> {
    let r = reduce_module_at(m, place, prec)?;
    let sl = det_is_one(&r.dbar);
    let sol = solve_truncated(&r, m_max, seed)?;
    let ybar = if sl { normalize_to_sl(&sol.ybar)? } else { sol.ybar };
    let ctx = ybar.ctx().clone();
    let emb = ctx.embedding_from(place.degree())?;
    let fundamental_identity = r.dbar.embed(&emb, &ctx).mul(&ybar.apply_phi(1)).sub(&ybar).is_zero();
    if !fundamental_identity {
        return Err(Error::Invariant("Dbar·φ(Ybar) ≠ Ybar".into()));
    }
    let dhat = frobenius_product(&r);
    let h_big = dhat.embed(&emb, &ctx).conjugate_by(&ybar)?;
    if !h_big.is_phi_fixed() {
        return Err(Error::PhiFixednessViolated);
    }
    let f = m.field();
    let base = build_extension_bounded(f.p(), f.e(), 1, usize::MAX)?;
    let h = series_to_base(&h_big, &base)?;
    let h0 = h.constant_term().clone();
    let det_one = det_is_one(&h);
    if sl && !det_one {
        return Err(Error::Invariant("det h ≢ 1".into()));
    }
    let base_emb = place.residue_ctx().embedding_from(1)?;
    let cp_h0: Vec<FieldElem> = h0.charpoly().iter().map(|c| base_emb.apply(place.residue_ctx(), c)).collect();
    let charpoly_matches_product = cp_h0 == dhat.constant_term().charpoly();
    Ok(Witness {
        place: place.clone(),
        m: sol.m,
        prec,
        ybar,
        dhat,
        h,
        h0,
        checks: WitnessChecks { phi_fixed: true, det_one, fundamental_identity, charpoly_matches_product },
    })
}

/// Given g^A = h (g^A = A⁻¹gA) with g₀ regular diagonal, returns A' = y⁻¹A with y
/// diagonal such that A'₀ is φ_q-fixed and g^(A') = h. Each y_i solves the
/// one-dimensional Lang equation c_i·y^q = y with c = A₀·φ(A₀)⁻¹.
pub fn descend_conjugator(
    g: &TruncSeriesMatrix,
    h: &TruncSeriesMatrix,
    a: &TruncSeriesMatrix,
) -> Result<TruncSeriesMatrix> {
    let n = g.n();
    let g0 = g.constant_term();
    for i in 0..n {
        for j in 0..n {
            if i != j && !g0.get(i, j).is_zero() {
                return Err(Error::CentralizerNotTorus);
            }
            if i < j && g0.get(i, i) == g0.get(j, j) {
                return Err(Error::CentralizerNotTorus);
            }
        }
    }
    if g.conjugate_by(a)? != *h {
        return Err(Error::Precondition("A does not conjugate g to h".into()));
    }
    let a0 = a.constant_term();
    let c = a0.mul(&a0.frobenius(1).inv().ok_or(Error::SingularConstantTerm)?);
    let ctx = a.ctx().clone();
    let mut y_inv = Mat::zeros(&ctx, n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j && !c.get(i, j).is_zero() {
                return Err(Error::NoRationalDescent);
            }
        }
        let op = SemilinearOperator::new(&Mat::diag(&[c.get(i, i).clone()]))?;
        let y = op.column_kernel().into_iter().next().ok_or(Error::NoRationalDescent)?;
        y_inv.set(i, i, y[0].inv().ok_or(Error::NoRationalDescent)?);
    }
    let out = a.left_mul_const(&y_inv);
    if !out.constant_term().is_phi_fixed() || g.conjugate_by(&out)? != *h {
        return Err(Error::NoRationalDescent);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function_field::Poly;
    use crate::gf::build_extension;
    use crate::series::TruncSeries;

    #[test]
    fn identity_lang() {
        let ctx = build_extension(5, 1, 1).unwrap();
        let sol = lang_solve(&Mat::identity(&ctx, 2), 24, None).unwrap();
        assert_eq!(sol.m, 1);
        assert!(!sol.y0.det().is_zero());
        assert_eq!(sol.homogeneous_dim, 4);
    }

    #[test]
    fn scalar_two_needs_m4() {
        // 2z⁵ = z: z⁴ = 3 has no root in F_5 or F_25
        let ctx = build_extension(5, 1, 1).unwrap();
        let d0 = Mat::from_ints(&ctx, &[&[2]]);
        let sol = lang_solve(&d0, 24, None).unwrap();
        assert_eq!(sol.m, 4);
        let y = sol.y0.get(0, 0);
        assert!(y.pow(5).scale(2) == *y && !y.is_zero());
    }

    #[test]
    fn torsor_in_lang() {
        let ctx = build_extension(5, 1, 1).unwrap();
        let d0 = Mat::from_ints(&ctx, &[&[0, 4], &[1, 0]]);
        let a = lang_solve(&d0, 24, Some(1)).unwrap();
        let b = lang_solve(&d0, 24, Some(2)).unwrap();
        assert_eq!(a.m, b.m);
        assert!(a.y0.inv().unwrap().mul(&b.y0).is_phi_fixed());
    }

    #[test]
    fn artin_schreier_layer_raises_m() {
        let f = crate::gf::small::Fq::new(5, 1).unwrap();
        let ctx = build_extension(5, 1, 1).unwrap();
        let one_t = TruncSeries::new(vec![ctx.one(), ctx.one(), ctx.zero()]);
        let inv = one_t.inv().unwrap();
        let zero = TruncSeries::zero(&ctx, 3);
        let dbar = TruncSeriesMatrix::from_entries(2, &[one_t, zero.clone(), zero, inv]);
        let place = PlaceFin::new(Poly::s(&f)).unwrap();
        let r = ReducedModule { place, dbar: dbar.clone(), level: 1 };
        let sol = solve_truncated(&r, 100, None).unwrap();
        assert_eq!(sol.m, 5);
        let emb = sol.ybar.ctx().embedding_from(1).unwrap();
        let lhs = dbar.embed(&emb, sol.ybar.ctx()).mul(&sol.ybar.apply_phi(1));
        assert_eq!(lhs, sol.ybar);
    }

    #[test]
    fn normalize_scalar() {
        let ctx = build_extension(5, 1, 1).unwrap();
        let y = TruncSeriesMatrix::constant(&Mat::from_ints(&ctx, &[&[2, 0], &[0, 1]]), 2);
        let out = normalize_to_sl(&y).unwrap();
        assert!(out.is_identity());
    }

    #[test]
    fn descent_of_scalar_conjugator() {
        let ctx = build_extension(5, 1, 2).unwrap();
        let g = TruncSeriesMatrix::constant(&Mat::from_ints(&ctx, &[&[2, 0], &[0, 3]]), 2);
        let alpha = ctx.generator();
        let a = TruncSeriesMatrix::constant(&Mat::diag(&[alpha.clone(), alpha.pow(7)]), 2);
        let out = descend_conjugator(&g, &g, &a).unwrap();
        assert!(out.constant_term().is_phi_fixed());
    }
}
