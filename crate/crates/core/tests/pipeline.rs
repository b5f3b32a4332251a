use dgw_core::function_field::PlaceFin;
use dgw_core::json::{self, ModuleJson, WitnessSetJson};
use dgw_core::module::{frobenius_product, raise_level, reduce_module_at};
use dgw_core::nori::{build_instance, InstanceParams};
use dgw_core::pipeline::{certify_witness_set, extract_all, witness_set, RunConfig};
use dgw_core::series::TruncSeriesMatrix;
use dgw_core::solver::{descend_conjugator, extract_witness, DEFAULT_M_MAX};
use dgw_core::Error;

fn params() -> InstanceParams {
    InstanceParams { q: 5, n: 2, zeta: 2, alpha: 2, alphas: vec![1], betas: vec![0] }
}

fn cfg(d_max: usize) -> RunConfig {
    RunConfig { prec: 8, d_max, m_max: DEFAULT_M_MAX, seed: None, threads: Some(1) }
}

#[test]
fn extraction_is_deterministic() {
    let inst = build_instance(&params(), 8).unwrap();
    let a = witness_set(&inst.module, &extract_all(&inst.module, &cfg(2)).unwrap(), &cfg(2), None);
    let b = witness_set(&inst.module, &extract_all(&inst.module, &cfg(2)).unwrap(), &cfg(2), None);
    assert_eq!(json::to_pretty(&a), json::to_pretty(&b));
    assert_eq!(a.witnesses.len(), 15);
    assert!(a.failures.is_empty());
}

#[test]
fn witness_set_roundtrips_and_certifies() {
    let inst = build_instance(&params(), 8).unwrap();
    let c = cfg(2);
    let set = witness_set(&inst.module, &extract_all(&inst.module, &c).unwrap(), &c, Some(params()));
    let back: WitnessSetJson = json::from_str(&json::to_pretty(&set)).unwrap();
    assert_eq!(back, set);
    let (report, checks) = certify_witness_set(&back).unwrap();
    assert!(checks.iter().all(|c| c.ok), "{checks:?}");
    assert_eq!(report.target_size, 120);
    assert_eq!(120 % report.closure_size, 0);
}

#[test]
fn raised_product_matches_reduction() {
    let inst = build_instance(&params(), 6).unwrap();
    let place = PlaceFin::linear(inst.field(), 3);
    let r = reduce_module_at(&inst.module, &place, 6).unwrap();
    let raised = reduce_module_at(&raise_level(&inst.module, 2).unwrap(), &place, 6).unwrap();
    assert_eq!(raised.dbar, r.dbar.mul(&r.dbar.apply_phi(1)));
}

#[test]
fn torus_witness_descends() {
    let inst = build_instance(&params(), 8).unwrap();
    let w = extract_witness(&inst.module, &inst.place_p, 8, DEFAULT_M_MAX, None).unwrap();
    let ctx = w.ybar.ctx().clone();
    let base = inst.field().ctx().clone();
    let emb = ctx.embedding_from(1).unwrap();
    // D̄ = x⁻¹(g₀g)x at (s − α), so A = x·Ybar conjugates g₀g to h.
    let g0g = inst.torus(8).unwrap().left_mul_const(&dgw_core::group::to_mat(&base, 2, &inst.g0)).embed(&emb, &ctx);
    let x = TruncSeriesMatrix::constant(&dgw_core::group::to_mat(&base, 2, &inst.x), 8).embed(&emb, &ctx);
    let a = x.mul(&w.ybar);
    let h = w.h.embed(&emb, &ctx);
    let a2 = descend_conjugator(&g0g, &h, &a).unwrap();
    assert!(a2.constant_term().is_phi_fixed());
    assert_eq!(g0g.conjugate_by(&a2).unwrap(), h);
    assert_eq!(frobenius_product(&reduce_module_at(&inst.module, &inst.place_p, 8).unwrap()).prec(), 8);
}

#[test]
fn module_json_is_stable() {
    let inst = build_instance(&params(), 8).unwrap();
    let text = json::to_pretty(&ModuleJson::from_module(&inst.module));
    let module = json::from_str::<ModuleJson>(&text).unwrap().to_module().unwrap();
    assert_eq!(json::to_pretty(&ModuleJson::from_module(&module)), text);
}

#[test]
fn bad_parameters_are_rejected() {
    let bad_zeta = InstanceParams { zeta: 4, ..params() };
    assert!(matches!(build_instance(&bad_zeta, 8), Err(Error::NotPrimitiveRoot)));
    let small_q = InstanceParams { q: 3, ..params() };
    assert!(matches!(build_instance(&small_q, 8), Err(Error::Precondition(_))));
}
