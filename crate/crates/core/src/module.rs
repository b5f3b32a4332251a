//! Frobenius modules over F_q(s,t): representing matrices D with Dφ_q(Y) = Y,
//! their reductions at places, Frobenius products, level raising, the exact
//! t-adic existence hypothesis, and the pre-t-motive change of variables.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function_field::{valuation_at, BivarEntry, PlaceFin, Poly, RatFunc, Val};
use crate::gf::small::Fq;
use crate::gf::FieldElem;
use crate::series::{expand_at_place, expand_with_root, TruncSeries, TruncSeriesMatrix};

/// Square matrix with bivariate-rational entries, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BivarMatrix {
    n: usize,
    entries: Vec<BivarEntry>,
}

impl BivarMatrix {
    pub fn new(n: usize, entries: Vec<BivarEntry>) -> BivarMatrix {
        assert_eq!(entries.len(), n * n);
        BivarMatrix { n, entries }
    }

    pub fn identity(f: &Arc<Fq>, n: usize) -> BivarMatrix {
        let entries =
            (0..n * n).map(|idx| if idx / n == idx % n { BivarEntry::one(f) } else { BivarEntry::zero(f) }).collect();
        BivarMatrix { n, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &BivarEntry {
        &self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[BivarEntry] {
        &self.entries
    }

    pub fn field(&self) -> &Arc<Fq> {
        self.entries[0].field()
    }

    pub fn mul(&self, o: &BivarMatrix) -> BivarMatrix {
        let n = self.n;
        let f = self.field().clone();
        let entries = (0..n * n)
            .map(|idx| {
                let (i, j) = (idx / n, idx % n);
                (0..n).fold(BivarEntry::zero(&f), |acc, l| acc.add(&self.get(i, l).mul(o.get(l, j))))
            })
            .collect();
        BivarMatrix { n, entries }
    }

    pub fn phi(&self) -> BivarMatrix {
        BivarMatrix { n: self.n, entries: self.entries.iter().map(|e| e.phi()).collect() }
    }

    pub fn map(&self, f: impl Fn(&BivarEntry) -> Result<BivarEntry>) -> Result<BivarMatrix> {
        Ok(BivarMatrix { n: self.n, entries: self.entries.iter().map(f).collect::<Result<_>>()? })
    }

    /// Matrix of values at t = 0.
    pub fn at_t0(&self) -> Vec<RatFunc> {
        self.entries.iter().map(|e| e.at_t0()).collect()
    }
}

/// Determinant of a small square matrix over F_q(s), by cofactor expansion.
pub fn ratfunc_det(n: usize, m: &[RatFunc]) -> RatFunc {
    if n == 1 {
        return m[0].clone();
    }
    let f = m[0].field().clone();
    let mut acc = RatFunc::zero(&f);
    for j in 0..n {
        if m[j].is_zero() {
            continue;
        }
        let minor: Vec<RatFunc> = (1..n)
            .flat_map(|i| (0..n).filter(move |&c| c != j).map(move |c| (i, c)))
            .map(|(i, c)| m[i * n + c].clone())
            .collect();
        let term = m[j].mul(&ratfunc_det(n - 1, &minor));
        acc = if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
    }
    acc
}

/// A difference module over (F_q(s,t), φ_{q^level}) given by its representing matrix.
#[derive(Debug, Clone)]
pub struct FrobModule {
    f: Arc<Fq>,
    level: usize,
    d: BivarMatrix,
}

impl PartialEq for FrobModule {
    fn eq(&self, o: &Self) -> bool {
        self.level == o.level && self.d == o.d
    }
}

impl Eq for FrobModule {}

impl FrobModule {
    pub fn new(f: &Arc<Fq>, level: usize, d: BivarMatrix) -> Result<FrobModule> {
        if level == 0 {
            return Err(Error::Precondition("level must be at least 1".into()));
        }
        let det0 = ratfunc_det(d.n(), &d.at_t0());
        if det0.is_zero() {
            return Err(Error::Invariant("D is not invertible at t = 0".into()));
        }
        Ok(FrobModule { f: f.clone(), level, d })
    }

    pub fn field(&self) -> &Arc<Fq> {
        &self.f
    }

    pub fn q(&self) -> u32 {
        self.f.q()
    }

    pub fn n(&self) -> usize {
        self.d.n()
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn matrix(&self) -> &BivarMatrix {
        &self.d
    }

    /// Determinant of D at t = 0.
    pub fn det_at_t0(&self) -> RatFunc {
        ratfunc_det(self.n(), &self.d.at_t0())
    }
}

/// κ(D) at a place, to precision N, over the residue field F_{q^d}.
#[derive(Debug, Clone)]
pub struct ReducedModule {
    pub place: PlaceFin,
    pub dbar: TruncSeriesMatrix,
    pub level: usize,
}

impl ReducedModule {
    pub fn prec(&self) -> usize {
        self.dbar.prec()
    }
}

pub fn reduce_module_at(m: &FrobModule, place: &PlaceFin, prec: usize) -> Result<ReducedModule> {
    let n = m.n();
    let entries =
        m.d.entries().iter().map(|e| expand_at_place(e, place, prec)).collect::<Result<Vec<TruncSeries>>>()?;
    let dbar = TruncSeriesMatrix::from_entries(n, &entries);
    if dbar.constant_term().det().is_zero() {
        return Err(Error::SingularReduction);
    }
    Ok(ReducedModule { place: place.clone(), dbar, level: m.level })
}

/// D̂ = D̄·φ(D̄)⋯φ^(d−1)(D̄) for a place of degree d, where φ = φ_q^level.
pub fn frobenius_product(r: &ReducedModule) -> TruncSeriesMatrix {
    let d = r.place.degree();
    let mut acc = r.dbar.clone();
    let mut cur = r.dbar.clone();
    for _ in 1..d {
        cur = cur.apply_phi(r.level);
        acc = acc.mul(&cur);
    }
    acc
}

/// The module over (F_q(s,t), φ_q^i) with matrix D·φ(D)⋯φ^(i−1)(D).
pub fn raise_level(m: &FrobModule, i: usize) -> Result<FrobModule> {
    if i == 0 {
        return Err(Error::Precondition("level factor must be at least 1".into()));
    }
    let mut acc = m.d.clone();
    let mut cur = m.d.clone();
    for _ in 1..i {
        for _ in 0..m.level {
            cur = cur.phi();
        }
        acc = acc.mul(&cur);
    }
    FrobModule::new(&m.f, m.level * i, acc)
}

/// Per-coefficient valuations of D = Σ D_l t^l at a place.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExistenceReport {
    pub ok: bool,
    pub first_failure: Option<usize>,
    /// min over entries of v(D_l); `None` when D_l = 0.
    pub valuations: Vec<Option<i64>>,
}

/// Checks v(D_l) ≥ l for all l < N, the exact form of ‖D_l‖ ≤ δ^l.
pub fn check_existence_hypothesis(m: &FrobModule, place: &PlaceFin, prec: usize) -> Result<ExistenceReport> {
    let mut mins = vec![Val::Infinity; prec];
    for e in m.d.entries() {
        for (l, c) in e.t_expansion(prec).iter().enumerate() {
            mins[l] = mins[l].min(valuation_at(place, c));
        }
    }
    if mins.iter().any(|v| *v < Val::Finite(0)) {
        return Err(Error::NotIntegral);
    }
    let first_failure = mins.iter().enumerate().position(|(l, v)| *v < Val::Finite(l as i64));
    Ok(ExistenceReport {
        ok: first_failure.is_none(),
        first_failure,
        valuations: mins.iter().map(|v| v.finite()).collect(),
    })
}

/// Φ in θ-coordinates, s = θ⁻¹ + α, with σ = φ_q⁻¹ and Ψ = φ_q(Y).
#[derive(Debug, Clone)]
pub struct PreTMotive {
    pub alpha: u32,
    pub phi: BivarMatrix,
    pub convention: MotiveConvention,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MotiveConvention {
    pub variable: String,
    pub substitution: String,
    pub sigma: String,
    pub psi: String,
    pub identity: String,
}

pub fn export_pre_t_motive(m: &FrobModule, place: &PlaceFin) -> Result<PreTMotive> {
    if place.degree() != 1 {
        return Err(Error::DegreeNotOne);
    }
    let f = m.field();
    let alpha = f.neg(place.pi().coeff(0));
    // s = (1 + α·θ)/θ
    let phi = m.d.map(|e| e.substitute_mobius((1, alpha), (0, 1)))?;
    Ok(PreTMotive {
        alpha,
        phi,
        convention: MotiveConvention {
            variable: "theta".into(),
            substitution: format!("s = 1/theta + {alpha}"),
            sigma: "inverse of phi_q".into(),
            psi: "phi_q(Y)".into(),
            identity: "Phi * Psi = sigma(Psi)".into(),
        },
    })
}

impl PreTMotive {
    /// Back-substitution θ = 1/(s − α).
    pub fn to_s_coordinates(&self) -> Result<BivarMatrix> {
        let f = self.phi.field().clone();
        self.phi.map(|e| e.substitute_mobius((1, 0), (f.neg(self.alpha), 1)))
    }

    /// Φ reduced at the θ-place lying under the s-place `place` (which must differ
    /// from s = α): θ ↦ 1/(β − α) with β the chosen root of `place`.
    pub fn reduce_at(&self, place: &PlaceFin, prec: usize) -> Result<TruncSeriesMatrix> {
        let f = self.phi.field().clone();
        let beta = place.root();
        let ctx = beta.ctx();
        let shifted = beta.sub(&f.embed(ctx, self.alpha));
        let theta_root: FieldElem = shifted.inv().ok_or(Error::NotIntegral)?;
        // minimal polynomial of θ: θ^d·π(θ⁻¹ + α), made monic
        let d = place.degree();
        let lin_num = Poly::new(&f, vec![1, self.alpha]);
        let mut pi_theta = Poly::zero(&f);
        for (i, &c) in place.pi().coeffs().iter().enumerate() {
            let term = lin_num.pow(i as u64).shift(d - i).scale(c);
            pi_theta = pi_theta.add(&term);
        }
        let pi_theta = pi_theta.monic();
        let n = self.phi.n();
        let entries = self
            .phi
            .entries()
            .iter()
            .map(|e| expand_with_root(e, &pi_theta, &theta_root, prec))
            .collect::<Result<Vec<_>>>()?;
        Ok(TruncSeriesMatrix::from_entries(n, &entries))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function_field::BiPoly;

    fn f5() -> Arc<Fq> {
        Fq::new(5, 1).unwrap()
    }

    fn entry(f: &Arc<Fq>, num: &str, den: &str) -> BivarEntry {
        BivarEntry::parse(f, num, den).unwrap()
    }

    #[test]
    fn identity_module_reduces_to_identity() {
        let f = f5();
        let m = FrobModule::new(&f, 1, BivarMatrix::identity(&f, 2)).unwrap();
        for place in crate::function_field::enumerate_places(&f, 2).unwrap().iter().take(3) {
            let r = reduce_module_at(&m, place, 4).unwrap();
            assert!(r.dbar.is_identity());
        }
    }

    #[test]
    fn pole_is_not_integral() {
        let f = f5();
        let bad = BivarEntry::new(BiPoly::constant(&f, 1), BiPoly::from_s(Poly::linear(&f, 2))).unwrap();
        let d = BivarMatrix::new(2, vec![bad, BivarEntry::zero(&f), BivarEntry::zero(&f), BivarEntry::one(&f)]);
        let m = FrobModule::new(&f, 1, d).unwrap();
        assert_eq!(reduce_module_at(&m, &PlaceFin::linear(&f, 2), 3).unwrap_err(), Error::NotIntegral);
    }

    #[test]
    fn raise_level_of_diagonal() {
        let f = f5();
        let s = entry(&f, "s", "1");
        let d = BivarMatrix::new(2, vec![s.clone(), BivarEntry::zero(&f), BivarEntry::zero(&f), s.inv().unwrap()]);
        let m = FrobModule::new(&f, 1, d).unwrap();
        let m2 = raise_level(&m, 2).unwrap();
        assert_eq!(m2.matrix().get(0, 0), &entry(&f, "s^6", "1"));
        assert_eq!(m2.matrix().get(1, 1), &entry(&f, "1", "s^6"));
        assert_eq!(m2.level(), 2);
    }

    #[test]
    fn existence_hypothesis_examples() {
        let f = f5();
        let z = BivarEntry::zero(&f);
        let one = BivarEntry::one(&f);
        let place = PlaceFin::linear(&f, 0);
        let good = BivarMatrix::new(2, vec![entry(&f, "1+s*t", "1"), z.clone(), z.clone(), one.clone()]);
        let rep = check_existence_hypothesis(&FrobModule::new(&f, 1, good).unwrap(), &place, 8).unwrap();
        assert!(rep.ok);
        let bad = BivarMatrix::new(2, vec![entry(&f, "1+t", "1"), z.clone(), z, one]);
        let rep = check_existence_hypothesis(&FrobModule::new(&f, 1, bad).unwrap(), &place, 8).unwrap();
        assert_eq!(rep.first_failure, Some(1));
    }

    #[test]
    fn motive_roundtrip() {
        let f = f5();
        let d = BivarMatrix::new(1, vec![entry(&f, "s+3*s^2*t", "1+s*t")]);
        let m = FrobModule::new(&f, 1, d).unwrap();
        let mot = export_pre_t_motive(&m, &PlaceFin::linear(&f, 2)).unwrap();
        assert_eq!(&mot.to_s_coordinates().unwrap(), m.matrix());
        assert_eq!(
            export_pre_t_motive(&m, &PlaceFin::new(Poly::new(&f, vec![2, 0, 1])).unwrap()).unwrap_err(),
            Error::DegreeNotOne
        );
    }
}
