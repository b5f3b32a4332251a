//! End-to-end runs: witness extraction over all places up to a degree, generation
//! certificates, and the parameter search for the SL_n instance.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::function_field::{enumerate_places, BiPoly, PlaceFin, Poly};
use crate::gf::small::Fq;
use crate::group::{self, GenerationReport, Verdict};
use crate::json::{
    codes_of, mat_to_json, CheckJson, ExistenceJson, FieldJson, MotiveJson, PlaceFailureJson, SolveJson,
    WitnessChecksJson, WitnessJson, WitnessSetJson, SCHEMA_VERSION,
};
use crate::module::{check_existence_hypothesis, export_pre_t_motive, reduce_module_at, FrobModule};
use crate::nori::{build_instance, InstanceParams};
use crate::series::{matrix_from_json, matrix_to_json, TruncSeriesMatrix};
use crate::solver::{extract_witness, matrix_order, normalize_to_sl, solve_truncated, Witness, DEFAULT_M_MAX};

pub const THREADS_ENV: &str = "DGW_THREADS";

/// Closure cap used for certificates.
pub const DEFAULT_CLOSURE_CAP: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub prec: usize,
    pub d_max: usize,
    pub m_max: usize,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { prec: 8, d_max: 3, m_max: DEFAULT_M_MAX, seed: None, threads: threads_from_env() }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.prec < 2 {
            return Err(Error::Precondition("precision N must be at least 2".into()));
        }
        if self.d_max < 1 {
            return Err(Error::Precondition("d_max must be at least 1".into()));
        }
        Ok(())
    }
}

/// Worker count from `DGW_THREADS`, ignoring unparsable or zero values.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

pub fn places_up_to(f: &Arc<Fq>, d_max: usize) -> Result<Vec<PlaceFin>> {
    let mut out = Vec::new();
    for d in 1..=d_max {
        out.extend(enumerate_places(f, d)?);
    }
    Ok(out)
}

#[cfg(feature = "parallel")]
fn map_places<T: Send>(
    places: &[PlaceFin],
    threads: Option<usize>,
    job: impl Fn(&PlaceFin) -> T + Sync + Send,
) -> Vec<T> {
    use rayon::prelude::*;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    match builder.build() {
        Ok(pool) => pool.install(|| places.par_iter().map(&job).collect()),
        Err(_) => places.iter().map(job).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
fn map_places<T: Send>(
    places: &[PlaceFin],
    _threads: Option<usize>,
    job: impl Fn(&PlaceFin) -> T + Sync + Send,
) -> Vec<T> {
    places.iter().map(job).collect()
}

/// A place from a monic irreducible polynomial in s, written like `s^2+4*s+2`.
pub fn parse_place(f: &Arc<Fq>, text: &str) -> Result<PlaceFin> {
    let b = BiPoly::parse(f, text)?;
    if b.t_degree().unwrap_or(0) > 0 {
        return Err(Error::Parse(format!("place polynomial '{text}' involves t")));
    }
    let pi = b.t_coeff(0);
    if pi.degree().unwrap_or(0) == 0 || !pi.is_monic() {
        return Err(Error::Parse(format!("place polynomial '{text}' must be monic of positive degree")));
    }
    PlaceFin::new(pi)
}

pub fn place_label(f: &Arc<Fq>, pi: &[u32]) -> String {
    Poly::new(f, pi.to_vec()).to_string()
}

pub fn existence_report(m: &FrobModule, place: &PlaceFin, prec: usize) -> Result<ExistenceJson> {
    let r = check_existence_hypothesis(m, place, prec)?;
    Ok(ExistenceJson {
        schema: "dgw/existence".into(),
        version: SCHEMA_VERSION,
        place: place.to_json(),
        prec,
        ok: r.ok,
        first_failure: r.first_failure,
        valuations: r.valuations,
    })
}

fn det_is_one(y: &TruncSeriesMatrix) -> bool {
    y.det().coeffs().iter().enumerate().all(|(l, c)| if l == 0 { c.is_one() } else { c.is_zero() })
}

/// Truncated fundamental matrix at one place, with its checks.
pub fn solve_at(m: &FrobModule, place: &PlaceFin, prec: usize, m_max: usize, seed: Option<u64>) -> Result<SolveJson> {
    let r = reduce_module_at(m, place, prec)?;
    let sol = solve_truncated(&r, m_max, seed)?;
    let ctx = sol.ybar.ctx().clone();
    let emb = ctx.embedding_from(place.degree())?;
    let identity = r.dbar.embed(&emb, &ctx).mul(&sol.ybar.apply_phi(1)) == sol.ybar;
    let invertible = !sol.ybar.constant_term().det().is_zero();
    let sl_input = det_is_one(&r.dbar);
    let ybar = if sl_input { normalize_to_sl(&sol.ybar)? } else { sol.ybar };
    let mut checks = vec![
        CheckJson { name: "Dbar·φ_q(Ybar) = Ybar mod t^N".into(), ok: identity },
        CheckJson { name: "Ybar(0) invertible".into(), ok: invertible },
    ];
    if sl_input {
        checks.push(CheckJson { name: "det Ybar ≡ 1 after normalization".into(), ok: det_is_one(&ybar) });
    }
    Ok(SolveJson {
        schema: "dgw/solution".into(),
        version: SCHEMA_VERSION,
        place: place.to_json(),
        m: sol.m,
        prec,
        field: ctx.descriptor(),
        ybar: matrix_to_json(&ybar),
        checks,
    })
}

/// Pre-t-motive at (s − α) with the substitution roundtrip and ΦΨ = σ(Ψ) checked at
/// every other degree-one place.
pub fn motive_report(m: &FrobModule, alpha: u32, prec: usize, m_max: usize) -> Result<MotiveJson> {
    let f = m.field().clone();
    let at = PlaceFin::linear(&f, alpha);
    let mot = export_pre_t_motive(m, &at)?;
    let roundtrip = &mot.to_s_coordinates()? == m.matrix();
    let mut identity = true;
    for pl in enumerate_places(&f, 1)?.iter().filter(|pl| pl.pi() != at.pi()) {
        let Ok(r) = reduce_module_at(m, pl, prec) else { continue };
        let sol = solve_truncated(&r, m_max, None)?;
        let ctx = sol.ybar.ctx().clone();
        let emb = ctx.embedding_from(1)?;
        let phi_bar = mot.reduce_at(pl, prec)?.embed(&emb, &ctx);
        let psi = sol.ybar.apply_phi(1);
        identity &= phi_bar.mul(&psi) == psi.apply_phi_inv();
    }
    Ok(MotiveJson {
        schema: "dgw/motive".into(),
        version: SCHEMA_VERSION,
        p: f.p(),
        e: f.e(),
        alpha,
        phi: MotiveJson::phi_rows(&mot.phi),
        convention: mot.convention,
        checks: vec![
            CheckJson { name: "s ↔ theta substitution roundtrip".into(), ok: roundtrip },
            CheckJson { name: "Phi·Psi = sigma(Psi) mod t^N at degree-one places".into(), ok: identity },
        ],
    })
}

/// Witnesses at every place of degree ≤ d_max, in place order.
pub fn extract_all(m: &FrobModule, cfg: &RunConfig) -> Result<Vec<(PlaceFin, Result<Witness>)>> {
    cfg.validate()?;
    let places = places_up_to(m.field(), cfg.d_max)?;
    let results = map_places(&places, cfg.threads, |pl| extract_witness(m, pl, cfg.prec, cfg.m_max, cfg.seed));
    Ok(places.into_iter().zip(results).collect())
}

pub fn witness_to_json(w: &Witness) -> WitnessJson {
    WitnessJson {
        place: w.place.to_json(),
        m: w.m,
        prec: w.prec,
        h: matrix_to_json(&w.h),
        h0: mat_to_json(&w.h0),
        charpoly_h0: w.charpoly_h0().iter().map(|c| c.coeffs().to_vec()).collect(),
        order_h0: matrix_order(&w.h0, u64::MAX).unwrap_or(0),
        checks: WitnessChecksJson {
            phi_fixed: w.checks.phi_fixed,
            det_one: w.checks.det_one,
            fundamental_identity: w.checks.fundamental_identity,
            charpoly_matches_product: w.checks.charpoly_matches_product,
        },
    }
}

pub fn witness_set(
    m: &FrobModule,
    results: &[(PlaceFin, Result<Witness>)],
    cfg: &RunConfig,
    instance: Option<InstanceParams>,
) -> WitnessSetJson {
    let f = m.field();
    let mut witnesses = Vec::new();
    let mut failures = Vec::new();
    for (place, r) in results {
        match r {
            Ok(w) => witnesses.push(witness_to_json(w)),
            Err(e) => failures.push(PlaceFailureJson { place: place.to_json(), error: e.to_string() }),
        }
    }
    WitnessSetJson {
        schema: "dgw/witnesses".into(),
        version: SCHEMA_VERSION,
        field: FieldJson { p: f.p(), e: f.e(), q: f.q() },
        n: m.n(),
        prec: cfg.prec,
        d_max: cfg.d_max,
        seed: cfg.seed,
        instance,
        witnesses,
        failures,
    }
}

/// Generation report for a witness set, plus the torus-witness check at (s − α)
/// when the instance parameters are known and the set has a witness there.
pub fn certify_witness_set(set: &WitnessSetJson) -> Result<(GenerationReport, Vec<CheckJson>)> {
    let f = Fq::new(set.field.p, set.field.e)?;
    let ctx = f.ctx().clone();
    let n = set.n;
    let mut h0s = Vec::new();
    let mut places = Vec::new();
    let mut checks = Vec::new();
    let mut all_sound = true;
    for w in &set.witnesses {
        let h0 = crate::json::mat_from_json(&ctx, &w.h0)?;
        h0s.push(codes_of(&h0)?);
        places.push(place_label(&f, &w.place.pi));
        all_sound &= w.checks.phi_fixed && w.checks.det_one && w.checks.charpoly_matches_product;
    }
    checks.push(CheckJson { name: "every witness is Frobenius-fixed with det 1".into(), ok: all_sound });
    let report = group::certify(&f, n, &h0s, places, DEFAULT_CLOSURE_CAP)?;
    if let Some(params) = &set.instance {
        let inst = build_instance(params, set.prec)?;
        if let Some(w) = set.witnesses.iter().find(|w| w.place == inst.place_p.to_json()) {
            let h = matrix_from_json(&ctx, &w.h)?;
            let g0g = inst.torus(set.prec)?.left_mul_const(&group::to_mat(&ctx, n, &inst.g0));
            checks.push(CheckJson {
                name: "charpoly of the witness at (s - alpha) equals charpoly(g0 g)".into(),
                ok: h.charpoly() == g0g.charpoly(),
            });
        }
    }
    checks.push(CheckJson {
        name: "closure order divides the target order".into(),
        ok: report.closure_size > 0 && report.target_size % report.closure_size == 0,
    });
    Ok((report, checks))
}

/// Runs build → extract → certify for one parameter tuple.
pub fn run_instance(params: &InstanceParams, cfg: &RunConfig) -> Result<(WitnessSetJson, GenerationReport)> {
    let inst = build_instance(params, cfg.prec)?;
    let results = extract_all(&inst.module, cfg)?;
    let set = witness_set(&inst.module, &results, cfg, Some(params.clone()));
    let (report, _) = certify_witness_set(&set)?;
    Ok((set, report))
}

/// Tries (α_1, …, α_{n−1}, β_1, …, β_{n−1}) in lexicographic order of codes and returns
/// the first tuple whose report verdict is full. `budget` bounds the number of tuples.
pub fn search_nori_parameters(
    base: &InstanceParams,
    budget: usize,
    cfg: &RunConfig,
) -> Result<(InstanceParams, GenerationReport)> {
    if base.n != 2 {
        return Err(Error::Precondition("the parameter search covers n = 2".into()));
    }
    if base.q > group::ORACLE_MAX_Q {
        return Err(Error::BudgetExceeded);
    }
    let k = 2 * (base.n - 1);
    let q = base.q as u64;
    let total = q.pow(k as u32);
    for idx in 0..total.min(budget as u64) {
        let mut digits = vec![0u32; k];
        let mut x = idx;
        for d in digits.iter_mut().rev() {
            *d = (x % q) as u32;
            x /= q;
        }
        let params = InstanceParams {
            alphas: digits[..base.n - 1].to_vec(),
            betas: digits[base.n - 1..].to_vec(),
            ..base.clone()
        };
        let (_, report) = run_instance(&params, cfg)?;
        if report.verdict == Verdict::Full {
            return Ok((params, report));
        }
    }
    Err(Error::BudgetExhausted)
}

/// Y⁻¹Y' for two fundamental matrices over the same field.
pub fn torsor_quotient(y: &TruncSeriesMatrix, y2: &TruncSeriesMatrix) -> Result<TruncSeriesMatrix> {
    Ok(y.invert()?.mul(y2))
}
