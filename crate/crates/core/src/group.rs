//! Finite matrix groups over F_q: closures, centralizers, the torus element with its
//! density certificate, and subgroup-lattice oracles for SL_2(F_q).

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function_field::Poly;
use crate::gf::mat::Mat;
use crate::gf::small::Fq;
use crate::gf::FieldCtx;
use crate::series::{TruncSeries, TruncSeriesMatrix};

/// Row-major n×n matrix of F_q element codes.
pub type SmallMat = Vec<u32>;

/// Largest q for which SL_2(F_q) subgroup lattices are enumerated.
pub const ORACLE_MAX_Q: u32 = 9;

pub fn identity(n: usize) -> SmallMat {
    (0..n * n).map(|i| u32::from(i / n == i % n)).collect()
}

pub fn mat_mul(f: &Fq, n: usize, a: &[u32], b: &[u32]) -> SmallMat {
    let mut out = vec![0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0;
            for l in 0..n {
                acc = f.add(acc, f.mul(a[i * n + l], b[l * n + j]));
            }
            out[i * n + j] = acc;
        }
    }
    out
}

pub fn det(f: &Fq, n: usize, a: &[u32]) -> u32 {
    let mut m = a.to_vec();
    let mut d = 1;
    for c in 0..n {
        let Some(piv) = (c..n).find(|&r| m[r * n + c] != 0) else {
            return 0;
        };
        if piv != c {
            for j in 0..n {
                m.swap(piv * n + j, c * n + j);
            }
            d = f.neg(d);
        }
        let pv = m[c * n + c];
        d = f.mul(d, pv);
        let inv = f.inv(pv).expect("nonzero pivot");
        for r in c + 1..n {
            let factor = f.mul(m[r * n + c], inv);
            if factor != 0 {
                for j in c..n {
                    let v = f.mul(factor, m[c * n + j]);
                    m[r * n + j] = f.sub(m[r * n + j], v);
                }
            }
        }
    }
    d
}

pub fn is_scalar(n: usize, a: &[u32]) -> bool {
    (0..n * n).all(|i| if i / n == i % n { a[i] == a[0] } else { a[i] == 0 })
}

/// Characteristic polynomial det(X·I − A), low degree first, as F_q codes.
pub fn charpoly(f: &Fq, n: usize, a: &[u32]) -> Vec<u32> {
    let ctx = f.ctx();
    to_mat(ctx, n, a).charpoly().iter().map(|c| c.to_base_code().expect("coefficient in F_q")).collect()
}

pub fn to_mat(ctx: &Arc<FieldCtx>, n: usize, a: &[u32]) -> Mat {
    Mat::from_fn(n, n, |i, j| ctx.from_base_code(a[i * n + j]))
}

/// Codes of a matrix whose entries lie in F_q.
pub fn from_mat(m: &Mat) -> Result<SmallMat> {
    m.entries().iter().map(|x| x.to_base_code().ok_or(Error::PhiFixednessViolated)).collect()
}

pub fn sl_order(q: u64, n: usize) -> u64 {
    gl_order(q, n) / (q - 1)
}

pub fn gl_order(q: u64, n: usize) -> u64 {
    let qn = q.pow(n as u32);
    (0..n).map(|i| qn - q.pow(i as u32)).product()
}

#[derive(Debug, Clone)]
pub struct FqMatrixGroupGens {
    pub f: Arc<Fq>,
    pub n: usize,
    pub gens: Vec<SmallMat>,
}

impl FqMatrixGroupGens {
    pub fn new(f: &Arc<Fq>, n: usize, gens: Vec<SmallMat>) -> Result<Self> {
        for g in &gens {
            if g.len() != n * n || g.iter().any(|&c| c >= f.q()) {
                return Err(Error::Precondition("malformed generator".into()));
            }
            if det(f, n, g) == 0 {
                return Err(Error::Precondition("generator is not invertible".into()));
            }
        }
        Ok(FqMatrixGroupGens { f: f.clone(), n, gens })
    }
}

/// Breadth-first closure under right multiplication by the generators, starting at I.
pub fn group_closure(g: &FqMatrixGroupGens, cap: usize) -> Result<Vec<SmallMat>> {
    let n = g.n;
    let start = identity(n);
    let mut seen: HashSet<SmallMat> = HashSet::from([start.clone()]);
    let mut order = vec![start.clone()];
    let mut queue = VecDeque::from([start]);
    while let Some(x) = queue.pop_front() {
        for gen in &g.gens {
            let y = mat_mul(&g.f, n, &x, gen);
            if seen.insert(y.clone()) {
                if seen.len() > cap {
                    return Err(Error::CapExceeded(cap));
                }
                order.push(y.clone());
                queue.push_back(y);
            }
        }
    }
    Ok(order)
}

pub fn centralizer(f: &Fq, n: usize, g: &[u32], ambient: &[SmallMat]) -> Vec<SmallMat> {
    ambient.iter().filter(|x| mat_mul(f, n, x, g) == mat_mul(f, n, g, x)).cloned().collect()
}

/// All of SL_n(F_q) in counter order of the codes (first entry least significant).
pub fn enumerate_sl(f: &Fq, n: usize, budget: u64) -> Result<Vec<SmallMat>> {
    let q = f.q() as u64;
    let total = q.checked_pow((n * n) as u32).filter(|&t| t <= budget).ok_or(Error::BudgetExceeded)?;
    let mut out = Vec::with_capacity(sl_order(q, n) as usize);
    let mut cur = vec![0u32; n * n];
    for _ in 0..total {
        if det(f, n, &cur) == 1 {
            out.push(cur.clone());
        }
        for c in cur.iter_mut() {
            *c += 1;
            if *c < f.q() {
                break;
            }
            *c = 0;
        }
    }
    Ok(out)
}

/// A regular diagonal element has the diagonal torus as centralizer.
pub fn is_regular_diagonal(n: usize, g: &[u32]) -> bool {
    let diag_only = (0..n * n).all(|i| i / n == i % n || g[i] == 0);
    let mut d: Vec<u32> = (0..n).map(|i| g[i * n + i]).collect();
    d.sort_unstable();
    d.dedup();
    diag_only && d.len() == n
}

/// Evidence that diag(p₁,…,p_{n−1},(p₁⋯p_{n−1})⁻¹) generates a dense subgroup of the torus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityCertificate {
    /// p_j as coefficient lists in t, low degree first.
    pub polys: Vec<Vec<u32>>,
    /// Each p_j is irreducible, nonconstant, with constant term 1, and no two coincide,
    /// so Π p_j^(m_j − m_n) is constant only for m_1 = … = m_n.
    pub pairwise_coprime_irreducible: bool,
    pub dense: bool,
}

/// The polynomials 1 + ζ^j·t, j = 1..n−1.
pub fn default_torus_polys(f: &Arc<Fq>, n: usize, zeta: u32) -> Vec<Poly> {
    (1..n).map(|j| Poly::new(f, vec![1, f.pow(zeta, j as u64)])).collect()
}

pub fn torus_element(
    f: &Arc<Fq>,
    n: usize,
    pj: &[Poly],
    prec: usize,
) -> Result<(TruncSeriesMatrix, DensityCertificate)> {
    if pj.len() + 1 != n {
        return Err(Error::Precondition(format!("expected {} polynomials", n - 1)));
    }
    for p in pj {
        if p.coeff(0) != 1 {
            return Err(Error::ConstantTermNotOne);
        }
        if p.degree().unwrap_or(0) == 0 || !p.monic().is_irreducible() {
            return Err(Error::NotIrreducible);
        }
    }
    for (i, a) in pj.iter().enumerate() {
        if pj[..i].contains(a) {
            return Err(Error::NotDistinct);
        }
    }
    let ctx = f.ctx();
    let series = |p: &Poly| TruncSeries::new((0..prec).map(|l| ctx.from_base_code(p.coeff(l))).collect());
    let mut diag: Vec<TruncSeries> = pj.iter().map(series).collect();
    let prod = diag.iter().fold(TruncSeries::one(ctx, prec), |acc, s| acc.mul(s));
    diag.push(prod.inv().expect("constant term 1"));
    let zero = TruncSeries::zero(ctx, prec);
    let entries: Vec<TruncSeries> =
        (0..n * n).map(|i| if i / n == i % n { diag[i / n].clone() } else { zero.clone() }).collect();
    let cert = DensityCertificate {
        polys: pj.iter().map(|p| p.coeffs().to_vec()).collect(),
        pairwise_coprime_irreducible: true,
        dense: true,
    };
    Ok((TruncSeriesMatrix::from_entries(n, &entries), cert))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Full,
    Proper,
    Inconclusive,
}

/// Conjugacy-class data visible without knowing the conjugator: the characteristic
/// polynomial and whether the element is scalar.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ClassKey {
    pub charpoly: Vec<u32>,
    pub scalar: bool,
}

impl ClassKey {
    pub fn of(f: &Fq, n: usize, a: &[u32]) -> ClassKey {
        ClassKey { charpoly: charpoly(f, n, a), scalar: is_scalar(n, a) }
    }
}

/// SL_2(F_q) with its Cayley table and the list of all subgroups as bitsets.
pub struct Sl2Lattice {
    pub elements: Vec<SmallMat>,
    index: HashMap<SmallMat, usize>,
    table: Vec<u16>,
    pub subgroups: Vec<Vec<u64>>,
    charpoly_id: Vec<usize>,
    class_id: Vec<usize>,
    charpolys: Vec<Vec<u32>>,
    classes: Vec<ClassKey>,
}

fn bit(set: &[u64], i: usize) -> bool {
    set[i / 64] >> (i % 64) & 1 == 1
}

fn set_bit(set: &mut [u64], i: usize) {
    set[i / 64] |= 1 << (i % 64);
}

fn popcount(set: &[u64]) -> usize {
    set.iter().map(|w| w.count_ones() as usize).sum()
}

impl Sl2Lattice {
    fn build(f: &Fq) -> Result<Sl2Lattice> {
        if f.q() > ORACLE_MAX_Q {
            return Err(Error::BudgetExceeded);
        }
        let elements = enumerate_sl(f, 2, u64::MAX)?;
        let size = elements.len();
        let index: HashMap<SmallMat, usize> = elements.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        let mut table = vec![0u16; size * size];
        for (i, a) in elements.iter().enumerate() {
            for (j, b) in elements.iter().enumerate() {
                table[i * size + j] = index[&mat_mul(f, 2, a, b)] as u16;
            }
        }
        let mut charpolys: Vec<Vec<u32>> = Vec::new();
        let mut classes: Vec<ClassKey> = Vec::new();
        let mut charpoly_id = Vec::with_capacity(size);
        let mut class_id = Vec::with_capacity(size);
        for a in &elements {
            let key = ClassKey::of(f, 2, a);
            let cp = key.charpoly.clone();
            charpoly_id.push(charpolys.iter().position(|c| *c == cp).unwrap_or_else(|| {
                charpolys.push(cp);
                charpolys.len() - 1
            }));
            class_id.push(classes.iter().position(|c| *c == key).unwrap_or_else(|| {
                classes.push(key);
                classes.len() - 1
            }));
        }
        let mut lat =
            Sl2Lattice { elements, index, table, subgroups: Vec::new(), charpoly_id, class_id, charpolys, classes };
        lat.subgroups = lat.enumerate_subgroups();
        Ok(lat)
    }

    /// SL_2(F_q) for q ≤ 9, cached per field.
    pub fn get(f: &Arc<Fq>) -> Result<Arc<Sl2Lattice>> {
        static CACHE: OnceLock<Mutex<HashMap<(u32, usize), Arc<Sl2Lattice>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let key = (f.p(), f.e());
        if let Some(l) = cache.lock().unwrap().get(&key) {
            return Ok(l.clone());
        }
        let lat = Arc::new(Sl2Lattice::build(f)?);
        cache.lock().unwrap().insert(key, lat.clone());
        Ok(lat)
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn index_of(&self, m: &[u32]) -> Option<usize> {
        self.index.get(m).copied()
    }

    fn words(&self) -> usize {
        self.order().div_ceil(64)
    }

    /// Subgroup generated by elements given by index.
    pub fn closure(&self, gens: &[usize]) -> Vec<u64> {
        let size = self.order();
        let mut set = vec![0u64; self.words()];
        let e = self.index[&identity(2)];
        set_bit(&mut set, e);
        let mut queue = VecDeque::from([e]);
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = self.table[x * size + g] as usize;
                if !bit(&set, y) {
                    set_bit(&mut set, y);
                    queue.push_back(y);
                }
            }
        }
        set
    }

    /// All subgroups as closures of at most two elements; pairs are taken over cyclic
    /// subgroups since ⟨a, b⟩ depends only on ⟨a⟩ and ⟨b⟩.
    fn enumerate_subgroups(&self) -> Vec<Vec<u64>> {
        let mut cyclic: Vec<(usize, Vec<u64>)> = Vec::new();
        let mut seen: HashSet<Vec<u64>> = HashSet::new();
        for a in 0..self.order() {
            let c = self.closure(&[a]);
            if seen.insert(c.clone()) {
                cyclic.push((a, c));
            }
        }
        let mut all: Vec<Vec<u64>> = cyclic.iter().map(|(_, c)| c.clone()).collect();
        for i in 0..cyclic.len() {
            for j in i + 1..cyclic.len() {
                let (a, ca) = &cyclic[i];
                let (b, cb) = &cyclic[j];
                if bit(ca, *b) || bit(cb, *a) {
                    continue;
                }
                let s = self.closure(&[*a, *b]);
                if seen.insert(s.clone()) {
                    all.push(s);
                }
            }
        }
        all.sort_by_key(|s| (popcount(s), s.clone()));
        all
    }

    pub fn subgroup_size(&self, s: &[u64]) -> usize {
        popcount(s)
    }

    fn covers(&self, s: &[u64], ids: &[usize], want: &HashSet<usize>) -> bool {
        let mut have = HashSet::new();
        for i in 0..self.order() {
            if bit(s, i) {
                have.insert(ids[i]);
            }
        }
        want.iter().all(|w| have.contains(w))
    }

    fn verdict(&self, ids: &[usize], want: Option<HashSet<usize>>) -> Verdict {
        // an invariant outside SL_2(F_q) means the inputs are not in the target
        let Some(want) = want else {
            return Verdict::Inconclusive;
        };
        let full = self.order();
        let proper = self.subgroups.iter().any(|s| popcount(s) < full && self.covers(s, ids, &want));
        if proper {
            Verdict::Proper
        } else {
            Verdict::Full
        }
    }

    /// "full" iff every subgroup containing an element of each listed characteristic
    /// polynomial is the whole group.
    pub fn charpoly_oracle(&self, charpolys: &[Vec<u32>]) -> Verdict {
        let want: Option<HashSet<usize>> =
            charpolys.iter().map(|c| self.charpolys.iter().position(|x| x == c)).collect();
        self.verdict(&self.charpoly_id, want)
    }

    /// As `charpoly_oracle`, with scalar and non-scalar elements of the same
    /// characteristic polynomial told apart.
    pub fn class_oracle(&self, classes: &[ClassKey]) -> Verdict {
        let want: Option<HashSet<usize>> = classes.iter().map(|c| self.classes.iter().position(|x| x == c)).collect();
        self.verdict(&self.class_id, want)
    }
}

pub fn charpoly_subgroup_oracle(f: &Arc<Fq>, n: usize, charpolys: &[Vec<u32>]) -> Result<Verdict> {
    if n != 2 {
        return Err(Error::Precondition("the subgroup oracle covers n = 2".into()));
    }
    Ok(Sl2Lattice::get(f)?.charpoly_oracle(charpolys))
}

pub fn class_subgroup_oracle(f: &Arc<Fq>, n: usize, classes: &[ClassKey]) -> Result<Verdict> {
    if n != 2 {
        return Err(Error::Precondition("the subgroup oracle covers n = 2".into()));
    }
    Ok(Sl2Lattice::get(f)?.class_oracle(classes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationReport {
    pub witnesses_consumed: usize,
    pub closure_size: u64,
    pub target_size: u64,
    pub closure_is_target: bool,
    pub charpolys_seen: Vec<Vec<u32>>,
    pub classes_seen: Vec<ClassKey>,
    /// Strict characteristic-polynomial oracle.
    pub charpoly_verdict: Verdict,
    /// Class-aware oracle.
    pub class_verdict: Verdict,
    /// Full when the closure is the target or the class-aware oracle certifies.
    pub verdict: Verdict,
    pub places_used: Vec<String>,
}

/// Generation certificate for the constant terms h0 of a witness set.
pub fn certify(
    f: &Arc<Fq>,
    n: usize,
    h0s: &[SmallMat],
    places_used: Vec<String>,
    cap: usize,
) -> Result<GenerationReport> {
    let q = f.q() as u64;
    let target_size = sl_order(q, n);
    let mut charpolys_seen: Vec<Vec<u32>> = h0s.iter().map(|h| charpoly(f, n, h)).collect();
    charpolys_seen.sort();
    charpolys_seen.dedup();
    let mut classes_seen: Vec<ClassKey> = h0s.iter().map(|h| ClassKey::of(f, n, h)).collect();
    classes_seen.sort();
    classes_seen.dedup();
    let gens = FqMatrixGroupGens::new(f, n, h0s.to_vec())?;
    let closure_size = match group_closure(&gens, cap) {
        Ok(c) => Some(c.len() as u64),
        Err(Error::CapExceeded(_)) => None,
        Err(e) => return Err(e),
    };
    if let Some(c) = closure_size {
        if gl_order(q, n) % c != 0 {
            return Err(Error::Invariant("closure order does not divide |GL_n(F_q)|".into()));
        }
    }
    let oracle = if n == 2 { Sl2Lattice::get(f).ok() } else { None };
    let (charpoly_verdict, class_verdict) = match &oracle {
        Some(lat) => (lat.charpoly_oracle(&charpolys_seen), lat.class_oracle(&classes_seen)),
        None => (Verdict::Inconclusive, Verdict::Inconclusive),
    };
    let closure_is_target = closure_size == Some(target_size);
    let verdict = if closure_is_target || class_verdict == Verdict::Full {
        Verdict::Full
    } else if closure_size.is_some() {
        Verdict::Proper
    } else {
        Verdict::Inconclusive
    };
    Ok(GenerationReport {
        witnesses_consumed: h0s.len(),
        closure_size: closure_size.unwrap_or(0),
        target_size,
        closure_is_target,
        charpolys_seen,
        classes_seen,
        charpoly_verdict,
        class_verdict,
        verdict,
        places_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f5() -> Arc<Fq> {
        Fq::new(5, 1).unwrap()
    }

    #[test]
    fn closures() {
        let f = f5();
        let triv = FqMatrixGroupGens::new(&f, 2, vec![identity(2)]).unwrap();
        assert_eq!(group_closure(&triv, 1000).unwrap().len(), 1);
        let tv = FqMatrixGroupGens::new(&f, 2, vec![vec![1, 1, 0, 1], vec![1, 0, 1, 1]]).unwrap();
        assert_eq!(group_closure(&tv, 1000).unwrap().len(), 120);
        let d = FqMatrixGroupGens::new(&f, 2, vec![vec![2, 0, 0, 3]]).unwrap();
        assert_eq!(group_closure(&d, 1000).unwrap().len(), 4);
        assert_eq!(group_closure(&tv, 50).unwrap_err(), Error::CapExceeded(50));
    }

    #[test]
    fn closure_is_a_group() {
        let f = f5();
        let g = FqMatrixGroupGens::new(&f, 2, vec![vec![0, 4, 1, 0], vec![1, 2, 0, 1]]).unwrap();
        let c = group_closure(&g, 1000).unwrap();
        let set: HashSet<_> = c.iter().cloned().collect();
        for a in &c {
            for b in &c {
                assert!(set.contains(&mat_mul(&f, 2, a, b)));
            }
        }
    }

    #[test]
    fn centralizers() {
        let f = f5();
        let sl = enumerate_sl(&f, 2, 1 << 20).unwrap();
        assert_eq!(sl.len(), 120);
        assert_eq!(centralizer(&f, 2, &identity(2), &sl).len(), 120);
        let t = centralizer(&f, 2, &[2, 0, 0, 3], &sl);
        assert_eq!(t.len(), 4);
        assert!(t.iter().all(|x| x[1] == 0 && x[2] == 0));
        assert_eq!(centralizer(&f, 2, &[1, 1, 0, 1], &sl).len(), 10);
    }

    #[test]
    fn torus() {
        let f = f5();
        let (g, cert) = torus_element(&f, 2, &[Poly::new(&f, vec![1, 2])], 4).unwrap();
        assert!(cert.dense);
        assert!(g.det().coeff(0).is_one());
        assert_eq!(torus_element(&f, 2, &[Poly::new(&f, vec![1, 0, 1])], 4).unwrap_err(), Error::NotIrreducible);
        let p = Poly::new(&f, vec![1, 1]);
        assert_eq!(torus_element(&f, 3, &[p.clone(), p], 4).unwrap_err(), Error::NotDistinct);
        assert_eq!(torus_element(&f, 2, &[Poly::new(&f, vec![2, 1])], 4).unwrap_err(), Error::ConstantTermNotOne);
    }

    #[test]
    fn lattice_of_sl2_f5() {
        let f = f5();
        let lat = Sl2Lattice::get(&f).unwrap();
        let sizes: HashSet<usize> = lat.subgroups.iter().map(|s| lat.subgroup_size(s)).collect();
        for s in &sizes {
            assert_eq!(120 % s, 0);
        }
        assert!(sizes.contains(&24) && sizes.contains(&120) && sizes.contains(&20));
    }

    #[test]
    fn oracle_examples() {
        let f = f5();
        assert_eq!(charpoly_subgroup_oracle(&f, 2, &[vec![1, 0, 1]]).unwrap(), Verdict::Proper);
        assert_eq!(charpoly_subgroup_oracle(&f, 2, &[]).unwrap(), Verdict::Proper);
        // every trace occurs in SL(2,3) ⊂ SL_2(F_5)
        let all: Vec<Vec<u32>> = (0..5).map(|a| vec![1, f.neg(a), 1]).collect();
        assert_eq!(charpoly_subgroup_oracle(&f, 2, &all).unwrap(), Verdict::Proper);
        let classes = vec![
            ClassKey { charpoly: vec![1, 3, 1], scalar: false },
            ClassKey { charpoly: vec![1, 1, 1], scalar: false },
        ];
        assert_eq!(class_subgroup_oracle(&f, 2, &classes).unwrap(), Verdict::Full);
    }

    #[test]
    fn budget() {
        let f = Fq::new(11, 1).unwrap();
        assert_eq!(charpoly_subgroup_oracle(&f, 2, &[]).unwrap_err(), Error::BudgetExceeded);
    }
}
