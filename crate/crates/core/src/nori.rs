//! The explicit SL_n instance: g₀ = diag(ζ, ζ², …, ζ^(n−1), ζ^(−n(n−1)/2)), the
//! companion matrix D₀ with entries f_i ∈ F_q[s], the conjugator x with g₀^x = D̄₀,
//! and D = D₀·diag(p̃₁, …, p̃_{n−1}, (p̃₁⋯p̃_{n−1})⁻¹)^x with p̃_j = 1 + ζ^j(s/α)t.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function_field::{BiPoly, BivarEntry, PlaceFin, Poly, RatFunc};
use crate::gf::small::Fq;
use crate::group::{self, SmallMat};
use crate::module::{check_existence_hypothesis, reduce_module_at, BivarMatrix, FrobModule};
use crate::series::TruncSeriesMatrix;

/// Parameters of an instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceParams {
    pub q: u32,
    pub n: usize,
    pub zeta: u32,
    pub alpha: u32,
    pub alphas: Vec<u32>,
    pub betas: Vec<u32>,
}

/// A fully built instance with every intermediate object.
#[derive(Debug, Clone)]
pub struct SlInstance {
    pub params: InstanceParams,
    pub f: Arc<Fq>,
    pub g0: SmallMat,
    /// f_i as polynomials in s.
    pub fs: Vec<Poly>,
    pub gammas: Vec<u32>,
    pub d0: BivarMatrix,
    pub d0bar: SmallMat,
    pub x: SmallMat,
    pub place_p: PlaceFin,
    pub place_q: PlaceFin,
    pub module: FrobModule,
    pub assertions: Vec<(String, bool)>,
}

/// Field F_q for a prime power q.
pub fn field_for(q: u32) -> Result<Arc<Fq>> {
    if q < 2 {
        return Err(Error::NotPrime(q));
    }
    let p = (2..=q).find(|d| q % d == 0).unwrap();
    let mut e = 0;
    let mut r = q;
    while r % p == 0 {
        r /= p;
        e += 1;
    }
    if r != 1 {
        return Err(Error::NotPrime(q));
    }
    Fq::new(p, e)
}

fn check_size(q: u32, n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Precondition("n must be at least 2".into()));
    }
    if (q as usize) * 2 <= n * (n + 1) {
        return Err(Error::Precondition(format!("q = {q} must exceed n(n+1)/2 = {}", n * (n + 1) / 2)));
    }
    Ok(())
}

pub fn build_g0(f: &Fq, n: usize, zeta: u32) -> Result<SmallMat> {
    check_size(f.q(), n)?;
    if f.order(zeta) != Some(f.q() as u64 - 1) {
        return Err(Error::NotPrimitiveRoot);
    }
    let mut diag: Vec<u32> = (1..n).map(|j| f.pow(zeta, j as u64)).collect();
    let prod = diag.iter().fold(1, |acc, &d| f.mul(acc, d));
    diag.push(f.inv(prod).expect("nonzero"));
    let mut g0 = vec![0; n * n];
    for (i, &d) in diag.iter().enumerate() {
        g0[i * n + i] = d;
    }
    if !group::is_regular_diagonal(n, &g0) {
        return Err(Error::EigenvalueCollision);
    }
    debug_assert_eq!(group::det(f, n, &g0), 1);
    Ok(g0)
}

/// γ_i such that the companion matrix with first row (γ₁, …, γ_{n−1}, (−1)^(n−1))
/// has the characteristic polynomial of g₀; γ_i = (−1)^(i+1)·e_i(eigenvalues).
pub fn companion_row(f: &Fq, n: usize, g0: &[u32]) -> Vec<u32> {
    let cp = group::charpoly(f, n, g0);
    // cp = X^n + Σ cp[n−i] X^(n−i), and the companion row is c_i = −cp[n−i]
    (1..n).map(|i| f.neg(cp[n - i])).collect()
}

/// f_i = sα_i + (1−s)β_i + s(s−1)/(α(α−1))·(γ_i − αα_i − (1−α)β_i).
pub fn build_fs(f: &Arc<Fq>, alpha: u32, alphas: &[u32], betas: &[u32], gammas: &[u32]) -> Result<Vec<Poly>> {
    if alpha == 0 || alpha == 1 {
        return Err(Error::BadAlpha);
    }
    if alphas.len() != gammas.len() || betas.len() != gammas.len() {
        return Err(Error::Precondition(format!("expected {} alphas and betas", gammas.len())));
    }
    let one_minus_alpha = f.sub(1, alpha);
    let denom = f.inv(f.mul(alpha, f.sub(alpha, 1))).expect("alpha not in {0,1}");
    let s = Poly::s(f);
    let one_minus_s = Poly::one(f).sub(&s);
    let s_s1 = s.mul(&s.sub(&Poly::one(f)));
    Ok((0..gammas.len())
        .map(|i| {
            let corr = f.sub(f.sub(gammas[i], f.mul(alpha, alphas[i])), f.mul(one_minus_alpha, betas[i]));
            s.scale(alphas[i]).add(&one_minus_s.scale(betas[i])).add(&s_s1.scale(f.mul(denom, corr)))
        })
        .collect())
}

/// The companion-shaped D₀ over F_q[s].
pub fn build_d0(f: &Arc<Fq>, n: usize, fs: &[Poly]) -> BivarMatrix {
    let sign = if n % 2 == 1 { 1 } else { f.neg(1) };
    let entries = (0..n * n)
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            if i == 0 && j < n - 1 {
                BivarEntry::from_poly(BiPoly::from_s(fs[j].clone()))
            } else if i == 0 {
                BivarEntry::constant(f, sign)
            } else if j + 1 == i {
                BivarEntry::one(f)
            } else {
                BivarEntry::zero(f)
            }
        })
        .collect();
    BivarMatrix::new(n, entries)
}

/// x ∈ SL_n(F_q) with x⁻¹·g₀·x = D̄₀. Row i of x is a left eigenvector of the companion
/// matrix for the i-th diagonal entry of g₀; the first row is then scaled into SL_n.
pub fn build_conjugator(f: &Fq, n: usize, g0: &[u32], d0bar: &[u32]) -> Result<SmallMat> {
    if !group::is_regular_diagonal(n, g0) {
        return Err(Error::Precondition("g0 must be regular diagonal".into()));
    }
    let c: Vec<u32> = (0..n).map(|j| d0bar[j]).collect();
    let mut x = vec![0; n * n];
    for i in 0..n {
        let lambda = g0[i * n + i];
        let mut r = 1;
        for j in 0..n {
            x[i * n + j] = r;
            if j + 1 < n {
                r = f.sub(f.mul(lambda, r), c[j]);
            }
        }
    }
    let d = group::det(f, n, &x);
    let dinv = f.inv(d).ok_or(Error::ConjugationFailed)?;
    for j in 0..n {
        x[j] = f.mul(x[j], dinv);
    }
    if group::mat_mul(f, n, g0, &x) != group::mat_mul(f, n, &x, d0bar) || group::det(f, n, &x) != 1 {
        return Err(Error::ConjugationFailed);
    }
    Ok(x)
}

fn inverse_small(f: &Fq, n: usize, a: &[u32]) -> Result<SmallMat> {
    let ctx = f.ctx();
    let inv = group::to_mat(ctx, n, a).inv().ok_or(Error::ConjugationFailed)?;
    group::from_mat(&inv)
}

fn constant_matrix(f: &Arc<Fq>, n: usize, a: &[u32]) -> BivarMatrix {
    BivarMatrix::new(n, a.iter().map(|&c| BivarEntry::constant(f, c)).collect())
}

/// diag(p̃₁, …, p̃_{n−1}, (p̃₁⋯p̃_{n−1})⁻¹) with p̃_j = 1 + ζ^j(s/α)t.
pub fn build_twisted_torus(f: &Arc<Fq>, n: usize, zeta: u32, alpha: u32) -> Result<BivarMatrix> {
    let ainv = f.inv(alpha).ok_or(Error::BadAlpha)?;
    let pts: Vec<BivarEntry> = (1..n)
        .map(|j| {
            let c = f.mul(f.pow(zeta, j as u64), ainv);
            BivarEntry::from_poly(BiPoly::constant(f, 1).add(&BiPoly::monomial(f, c, 1, 1)))
        })
        .collect();
    let prod = pts.iter().fold(BivarEntry::one(f), |acc, p| acc.mul(p));
    let last = prod.inv()?;
    let entries = (0..n * n)
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            match (i == j, i + 1 == n) {
                (false, _) => BivarEntry::zero(f),
                (true, false) => pts[i].clone(),
                (true, true) => last.clone(),
            }
        })
        .collect();
    Ok(BivarMatrix::new(n, entries))
}

/// Builds the instance and checks every stated identity; a failed identity is an error
/// naming it.
pub fn build_instance(params: &InstanceParams, prec: usize) -> Result<SlInstance> {
    let f = field_for(params.q)?;
    let n = params.n;
    let g0 = build_g0(&f, n, params.zeta)?;
    let gammas = companion_row(&f, n, &g0);
    let fs = build_fs(&f, params.alpha, &params.alphas, &params.betas, &gammas)?;
    let d0 = build_d0(&f, n, &fs);
    let place_p = PlaceFin::linear(&f, params.alpha);
    let place_q = PlaceFin::new(Poly::s(&f))?;
    let d0bar: SmallMat = d0
        .entries()
        .iter()
        .map(|e| {
            let v = crate::function_field::reduce_at(&place_p, &e.at_t0())?;
            v.to_base_code().ok_or(Error::NotIntegral)
        })
        .collect::<Result<_>>()?;
    let x = build_conjugator(&f, n, &g0, &d0bar)?;
    let xinv = inverse_small(&f, n, &x)?;
    let torus = build_twisted_torus(&f, n, params.zeta, params.alpha)?;
    let conj = constant_matrix(&f, n, &xinv).mul(&torus).mul(&constant_matrix(&f, n, &x));
    let d = d0.mul(&conj);
    let module = FrobModule::new(&f, 1, d)?;

    let mut assertions: Vec<(String, bool)> = Vec::new();
    let fi_values = fs.iter().enumerate().all(|(i, fi)| {
        fi.eval(params.alpha) == gammas[i] && fi.eval(1) == params.alphas[i] && fi.eval(0) == params.betas[i]
    });
    assertions.push(("f_i(alpha) = gamma_i, f_i(1) = alpha_i, f_i(0) = beta_i".into(), fi_values));
    let det_d0 = crate::module::ratfunc_det(n, &d0.at_t0());
    assertions.push(("det D0 = 1".into(), det_d0 == RatFunc::one(&f)));
    let conj_ok = group::det(&f, n, &x) == 1 && group::mat_mul(&f, n, &group::mat_mul(&f, n, &xinv, &g0), &x) == d0bar;
    assertions.push(("det x = 1 and g0^x = D0bar".into(), conj_ok));
    let mod_t = module.matrix().at_t0() == d0.at_t0();
    assertions.push(("D ≡ D₀ mod t".into(), mod_t));
    let reduced = reduce_module_at(&module, &place_p, prec)?;
    let expected = expected_reduction(&f, n, &g0, &x, params.zeta, prec)?;
    assertions.push(("reduction of D at (s - alpha) = (g0 g)^x".into(), reduced.dbar == expected));
    let existence = check_existence_hypothesis(&module, &place_q, prec)?;
    assertions.push(("existence hypothesis at (s)".into(), existence.ok));
    if let Some((name, _)) = assertions.iter().find(|(_, ok)| !ok) {
        return Err(Error::Invariant(name.clone()));
    }
    Ok(SlInstance { params: params.clone(), f, g0, fs, gammas, d0, d0bar, x, place_p, place_q, module, assertions })
}

/// (g₀·g)^x with g = diag(1 + ζ^j t, …) to precision `prec`, over F_q.
pub fn expected_reduction(
    f: &Arc<Fq>,
    n: usize,
    g0: &[u32],
    x: &[u32],
    zeta: u32,
    prec: usize,
) -> Result<TruncSeriesMatrix> {
    let ctx = f.ctx();
    let (g, _) = group::torus_element(f, n, &group::default_torus_polys(f, n, zeta), prec)?;
    let g0g = g.left_mul_const(&group::to_mat(ctx, n, g0));
    let xs = TruncSeriesMatrix::constant(&group::to_mat(ctx, n, x), prec);
    g0g.conjugate_by(&xs)
}

impl SlInstance {
    pub fn field(&self) -> &Arc<Fq> {
        &self.f
    }

    /// The torus factor g = diag(1 + ζ^j t, …) at the place (s − α).
    pub fn torus(&self, prec: usize) -> Result<TruncSeriesMatrix> {
        let polys = group::default_torus_polys(&self.f, self.params.n, self.params.zeta);
        Ok(group::torus_element(&self.f, self.params.n, &polys, prec)?.0)
    }
}
