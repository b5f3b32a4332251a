//! Acceptance run: one PASS/FAIL line per criterion.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use dgw_core::function_field::place::necklace_count;
use dgw_core::function_field::{enumerate_places, reduce_at, valuation_at, Poly, RatFunc, Val};
use dgw_core::gf::small::Fq;
use dgw_core::gf::{build_extension, FieldCtx, FieldElem};
use dgw_core::group::{self, Verdict};
use dgw_core::module::{check_existence_hypothesis, export_pre_t_motive, raise_level, reduce_module_at};
use dgw_core::nori::{build_instance, InstanceParams, SlInstance};
use dgw_core::pipeline::{places_up_to, run_instance, torsor_quotient, RunConfig};
use dgw_core::solver::{normalize_to_sl, solve_truncated, DEFAULT_M_MAX};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const N: usize = 8;

fn params() -> InstanceParams {
    InstanceParams { q: 5, n: 2, zeta: 2, alpha: 2, alphas: vec![1], betas: vec![0] }
}

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn within(t: Duration, limit: Duration) -> bool {
    t < limit
}

fn instance() -> SlInstance {
    build_instance(&params(), N).expect("instance builds")
}

fn c1() -> Outcome {
    let start = Instant::now();
    let inst = match build_instance(&params(), N) {
        Ok(i) => i,
        Err(e) => return outcome(false, format!("build failed: {e}")),
    };
    let t = start.elapsed();
    let all = inst.assertions.iter().all(|(_, ok)| *ok);
    let g0 = inst.g0 == vec![2, 0, 0, 3];
    let d0bar = inst.d0bar == vec![0, 4, 1, 0];
    let ok = all && g0 && d0bar && within(t, Duration::from_secs(1));
    outcome(
        ok,
        format!(
            "{} assertions hold={all}, g0={:?}, D0bar={:?}, x={:?}, {t:.2?}",
            inst.assertions.len(),
            inst.g0,
            inst.d0bar,
            inst.x
        ),
    )
}

fn c2() -> Outcome {
    let inst = instance();
    match check_existence_hypothesis(&inst.module, &inst.place_q, N) {
        Ok(r) => outcome(r.ok, format!("valuations at (s): {:?}", r.valuations)),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn c3() -> Outcome {
    let start = Instant::now();
    let inst = instance();
    let places = places_up_to(inst.field(), 2).unwrap();
    let mut bad = Vec::new();
    for pl in &places {
        let check = || -> dgw_core::Result<bool> {
            let r = reduce_module_at(&inst.module, pl, N)?;
            let s1 = solve_truncated(&r, DEFAULT_M_MAX, Some(1))?;
            let s2 = solve_truncated(&r, DEFAULT_M_MAX, Some(2))?;
            let ctx = s1.ybar.ctx().clone();
            let emb = ctx.embedding_from(pl.degree())?;
            let dm = r.dbar.embed(&emb, &ctx);
            let mut ok = true;
            for s in [&s1, &s2] {
                ok &= dm.mul(&s.ybar.apply_phi(1)) == s.ybar;
                ok &= !s.ybar.constant_term().det().is_zero();
                let y = normalize_to_sl(&s.ybar)?;
                ok &= y.det().coeffs().iter().enumerate().all(|(l, c)| if l == 0 { c.is_one() } else { c.is_zero() });
            }
            ok &= s1.m == s2.m && torsor_quotient(&s1.ybar, &s2.ybar)?.is_phi_fixed();
            Ok(ok)
        };
        match check() {
            Ok(true) => {}
            Ok(false) => bad.push(format!("{:?}: identity check failed", pl.pi().coeffs())),
            Err(e) => bad.push(format!("{:?}: {e}", pl.pi().coeffs())),
        }
    }
    let t = start.elapsed();
    let ok = bad.is_empty() && within(t, Duration::from_secs(10));
    outcome(ok, format!("{} places, {} failures {:?}, {t:.2?}", places.len(), bad.len(), bad))
}

struct Run {
    set: dgw_core::json::WitnessSetJson,
    report: group::GenerationReport,
    time: Duration,
}

fn c4(run: &Run) -> Outcome {
    let sound = run
        .set
        .witnesses
        .iter()
        .filter(|w| {
            w.checks.phi_fixed && w.checks.det_one && w.checks.charpoly_matches_product && w.checks.fundamental_identity
        })
        .count();
    let total = run.set.witnesses.len() + run.set.failures.len();
    outcome(sound == total && total > 0, format!("{sound}/{total} witnesses sound"))
}

fn c5(run: &Run) -> Outcome {
    let r = &run.report;
    let f = Fq::new(5, 1).unwrap();
    let every: Vec<Vec<u32>> = (0..5).map(|tr| vec![1, f.neg(tr), 1]).collect();
    let saturated = group::charpoly_subgroup_oracle(&f, 2, &every).map(|v| format!("{v:?}")).unwrap_or_default();
    let ok = r.closure_size == 120
        && r.charpoly_verdict == Verdict::Full
        && run.set.witnesses.len() == 55
        && within(run.time, Duration::from_secs(60));
    outcome(
        ok,
        format!(
            "{} witnesses, closure {}/{}, charpoly oracle {:?} (on all 5 SL2 charpolys: {}), class oracle {:?}, {:.2?}",
            run.set.witnesses.len(),
            r.closure_size,
            r.target_size,
            r.charpoly_verdict,
            saturated,
            r.class_verdict,
            run.time
        ),
    )
}

fn c6() -> Outcome {
    let f = Fq::new(5, 1).unwrap();
    let all = group::enumerate_sl(&f, 2, 1 << 20).unwrap();
    let c = group::centralizer(&f, 2, &[2, 0, 0, 3], &all);
    let diag = c.iter().all(|m| m[1] == 0 && m[2] == 0);
    outcome(
        all.len() == 120 && c.len() == 4 && diag,
        format!("|SL2(F5)| = {}, |C(g0)| = {}, all diagonal {diag}", all.len(), c.len()),
    )
}

fn c7() -> Outcome {
    let inst = instance();
    let places = places_up_to(inst.field(), 2).unwrap();
    let mut checked = 0;
    let mut bad = Vec::new();
    for i in [2usize, 3] {
        let raised = raise_level(&inst.module, i).unwrap();
        for pl in &places {
            let check = || -> dgw_core::Result<bool> {
                let r = reduce_module_at(&inst.module, pl, N)?;
                let sol = solve_truncated(&r, DEFAULT_M_MAX, None)?;
                let ri = reduce_module_at(&raised, pl, N)?;
                let ctx = sol.ybar.ctx().clone();
                let emb = ctx.embedding_from(pl.degree())?;
                Ok(ri.dbar.embed(&emb, &ctx).mul(&sol.ybar.apply_phi(i)) == sol.ybar)
            };
            checked += 1;
            match check() {
                Ok(true) => {}
                Ok(false) => bad.push(format!("i={i} {:?}", pl.pi().coeffs())),
                Err(e) => bad.push(format!("i={i} {:?}: {e}", pl.pi().coeffs())),
            }
        }
    }
    outcome(bad.is_empty(), format!("{checked} (level, place) pairs, failures {bad:?}"))
}

fn c8() -> Outcome {
    let inst = instance();
    let mot = match export_pre_t_motive(&inst.module, &inst.place_p) {
        Ok(m) => m,
        Err(e) => return outcome(false, e.to_string()),
    };
    let roundtrip = mot.to_s_coordinates().map(|d| &d == inst.module.matrix()).unwrap_or(false);
    let places = places_up_to(inst.field(), 2).unwrap();
    let mut checked = 0;
    let mut bad = Vec::new();
    for pl in places.iter().filter(|pl| pl.pi() != inst.place_p.pi()) {
        let check = || -> dgw_core::Result<bool> {
            let r = reduce_module_at(&inst.module, pl, N)?;
            let sol = solve_truncated(&r, DEFAULT_M_MAX, None)?;
            let ctx = sol.ybar.ctx().clone();
            let emb = ctx.embedding_from(pl.degree())?;
            let phi_bar = mot.reduce_at(pl, N)?.embed(&emb, &ctx);
            let psi = sol.ybar.apply_phi(1);
            Ok(phi_bar.mul(&psi) == psi.apply_phi_inv())
        };
        checked += 1;
        match check() {
            Ok(true) => {}
            Ok(false) => bad.push(format!("{:?}", pl.pi().coeffs())),
            Err(e) => bad.push(format!("{:?}: {e}", pl.pi().coeffs())),
        }
    }
    outcome(roundtrip && bad.is_empty(), format!("roundtrip {roundtrip}, {checked} theta-places, failures {bad:?}"))
}

fn random_elem(ctx: &Arc<FieldCtx>, rng: &mut ChaCha8Rng) -> FieldElem {
    let c: Vec<u32> = (0..ctx.degree()).map(|_| rng.gen_range(0..ctx.p())).collect();
    ctx.from_coeffs(&c).unwrap()
}

fn random_poly(f: &Arc<Fq>, rng: &mut ChaCha8Rng, deg: usize) -> Poly {
    Poly::new(f, (0..=deg).map(|_| rng.gen_range(0..f.q())).collect())
}

fn random_ratfunc(f: &Arc<Fq>, rng: &mut ChaCha8Rng) -> RatFunc {
    loop {
        let (dn, dd) = (rng.gen_range(0..5), rng.gen_range(0..4));
        let num = random_poly(f, rng, dn);
        let den = random_poly(f, rng, dd);
        if let Some(r) = RatFunc::new(num, den) {
            return r;
        }
    }
}

fn field_axioms(rng: &mut ChaCha8Rng) -> (usize, Vec<String>) {
    let mut bad = Vec::new();
    let mut n = 0;
    for (p, e, m) in [(5, 1, 1), (5, 1, 3), (2, 2, 3), (3, 2, 2), (7, 1, 4), (2, 1, 8)] {
        let ctx = build_extension(p, e, m).unwrap();
        for _ in 0..200 {
            let (a, b, c) = (random_elem(&ctx, rng), random_elem(&ctx, rng), random_elem(&ctx, rng));
            let mut ok = a.mul(&b.mul(&c)) == a.mul(&b).mul(&c);
            ok &= a.mul(&b.add(&c)) == a.mul(&b).add(&a.mul(&c));
            ok &= a.add(&b) == b.add(&a) && a.mul(&b) == b.mul(&a);
            ok &= a.sub(&a).is_zero();
            ok &= a.is_zero() || a.mul(&a.inv().unwrap()).is_one();
            ok &= a.add(&b).frobenius(1) == a.frobenius(1).add(&b.frobenius(1));
            ok &= a.mul(&b).frobenius(1) == a.frobenius(1).mul(&b.frobenius(1));
            ok &= a.frobenius(ctx.m()) == a;
            ok &= a.frobenius(1).frobenius_inv() == a;
            if !ok {
                bad.push(format!("F_{p}^{} sample {n}", e * m));
            }
            n += 1;
        }
    }
    (n, bad)
}

fn valuation_axioms(rng: &mut ChaCha8Rng) -> (usize, Vec<String>) {
    let mut bad = Vec::new();
    let mut n = 0;
    for q in [5u32, 4, 3] {
        let f = dgw_core::nori::field_for(q).unwrap();
        let places = places_up_to(&f, 2).unwrap();
        for _ in 0..400 {
            let pl = &places[rng.gen_range(0..places.len())];
            let a = random_ratfunc(&f, rng);
            let b = random_ratfunc(&f, rng);
            let (va, vb) = (valuation_at(pl, &a), valuation_at(pl, &b));
            let vab = valuation_at(pl, &a.mul(&b));
            let sum = match (va, vb) {
                (Val::Finite(x), Val::Finite(y)) => Val::Finite(x + y),
                _ => Val::Infinity,
            };
            let mut ok = vab == sum;
            ok &= valuation_at(pl, &a.add(&b)) >= va.min(vb);
            if va != vb {
                ok &= valuation_at(pl, &a.add(&b)) == va.min(vb);
            }
            if !ok {
                bad.push(format!("q={q} sample {n}"));
            }
            n += 1;
        }
    }
    (n, bad)
}

fn kappa_phi(rng: &mut ChaCha8Rng) -> (usize, Vec<String>) {
    let mut bad = Vec::new();
    let mut n = 0;
    for q in [5u32, 4, 7] {
        let f = dgw_core::nori::field_for(q).unwrap();
        let places = places_up_to(&f, 2).unwrap();
        let mut k = 0;
        while k < 200 {
            let pl = &places[rng.gen_range(0..places.len())];
            let a = random_ratfunc(&f, rng);
            if valuation_at(pl, &a) < Val::Finite(0) {
                continue;
            }
            let lhs = reduce_at(pl, &a.phi());
            let rhs = reduce_at(pl, &a).map(|x| x.frobenius(1));
            if !matches!((&lhs, &rhs), (Ok(x), Ok(y)) if x == y) {
                bad.push(format!("q={q} sample {n}"));
            }
            n += 1;
            k += 1;
        }
    }
    (n, bad)
}

fn necklaces() -> (usize, Vec<String>) {
    let mut bad = Vec::new();
    let mut n = 0;
    for q in [2u32, 3, 4, 5] {
        let f = dgw_core::nori::field_for(q).unwrap();
        for d in 1..=4 {
            let got = enumerate_places(&f, d).unwrap().len() as u64;
            let want = necklace_count(q as u64, d);
            if got != want {
                bad.push(format!("q={q} d={d}: {got} != {want}"));
            }
            n += 1;
        }
    }
    (n, bad)
}

fn c9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (nf, bf) = field_axioms(&mut rng);
    let (nv, bv) = valuation_axioms(&mut rng);
    let (nk, bk) = kappa_phi(&mut rng);
    let (nn, bn) = necklaces();
    let ok = nf >= 1000 && nv >= 1000 && nk >= 500 && bf.is_empty() && bv.is_empty() && bk.is_empty() && bn.is_empty();
    outcome(
        ok,
        format!(
            "field {nf} samples ({} bad), valuation {nv} ({} bad), kappa-phi {nk} ({} bad), necklace {nn} cases ({} bad)",
            bf.len(),
            bv.len(),
            bk.len(),
            bn.len()
        ),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    results.push((1, "instance build", c1()));
    results.push((2, "existence hypothesis", c2()));
    results.push((3, "solver contract", c3()));
    let start = Instant::now();
    let run = run_instance(&params(), &RunConfig { prec: N, d_max: 3, ..RunConfig::default() })
        .map(|(set, report)| Run { set, report, time: start.elapsed() });
    match &run {
        Ok(run) => {
            results.push((4, "witness soundness", c4(run)));
            results.push((5, "generation certificate", c5(run)));
        }
        Err(e) => {
            results.push((4, "witness soundness", outcome(false, e.to_string())));
            results.push((5, "generation certificate", outcome(false, e.to_string())));
        }
    }
    results.push((6, "centralizer", c6()));
    results.push((7, "level raising", c7()));
    results.push((8, "pre-t-motive export", c8()));
    results.push((9, "property suites", c9()));
    let mut failed = 0;
    for (k, name, o) in &results {
        println!("criterion {k} [{name}]: {} - {}", if o.ok { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.ok);
    }
    println!("acceptance: {}/{} passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
