//! Three operations for the static page in `www/`. Each takes plain numbers and
//! strings and returns pretty JSON.

use dgw_core::json::{self, InstanceJson, ReportJson, SCHEMA_VERSION};
use dgw_core::nori::{build_instance, InstanceParams};
use dgw_core::pipeline::{self, RunConfig};
use dgw_core::solver::{extract_witness, DEFAULT_M_MAX};
use wasm_bindgen::prelude::*;

fn params(q: u32, zeta: u32, alpha: u32, alpha1: u32, beta1: u32) -> InstanceParams {
    InstanceParams { q, n: 2, zeta, alpha, alphas: vec![alpha1], betas: vec![beta1] }
}

pub fn instance_json(q: u32, zeta: u32, alpha: u32, alpha1: u32, beta1: u32, prec: usize) -> Result<String, String> {
    let inst = build_instance(&params(q, zeta, alpha, alpha1, beta1), prec).map_err(|e| e.to_string())?;
    Ok(json::to_pretty(&InstanceJson::from_instance(&inst)))
}

pub fn witness_json(
    q: u32,
    zeta: u32,
    alpha: u32,
    alpha1: u32,
    beta1: u32,
    place: &str,
    prec: usize,
) -> Result<String, String> {
    let inst = build_instance(&params(q, zeta, alpha, alpha1, beta1), prec).map_err(|e| e.to_string())?;
    let pl = pipeline::parse_place(inst.field(), place).map_err(|e| e.to_string())?;
    let w = extract_witness(&inst.module, &pl, prec, DEFAULT_M_MAX, None).map_err(|e| e.to_string())?;
    Ok(json::to_pretty(&pipeline::witness_to_json(&w)))
}

pub fn report_json(
    q: u32,
    zeta: u32,
    alpha: u32,
    alpha1: u32,
    beta1: u32,
    d_max: usize,
    prec: usize,
) -> Result<String, String> {
    let cfg = RunConfig { prec, d_max, m_max: DEFAULT_M_MAX, seed: None, threads: Some(1) };
    let p = params(q, zeta, alpha, alpha1, beta1);
    let inst = build_instance(&p, prec).map_err(|e| e.to_string())?;
    let results = pipeline::extract_all(&inst.module, &cfg).map_err(|e| e.to_string())?;
    let set = pipeline::witness_set(&inst.module, &results, &cfg, Some(p));
    let (report, checks) = pipeline::certify_witness_set(&set).map_err(|e| e.to_string())?;
    Ok(json::to_pretty(&ReportJson { schema: "dgw/report".into(), version: SCHEMA_VERSION, report, checks }))
}

#[wasm_bindgen]
pub fn build(q: u32, zeta: u32, alpha: u32, alpha1: u32, beta1: u32, prec: usize) -> Result<String, JsValue> {
    instance_json(q, zeta, alpha, alpha1, beta1, prec).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn witness(
    q: u32,
    zeta: u32,
    alpha: u32,
    alpha1: u32,
    beta1: u32,
    place: &str,
    prec: usize,
) -> Result<String, JsValue> {
    witness_json(q, zeta, alpha, alpha1, beta1, place, prec).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn certify(
    q: u32,
    zeta: u32,
    alpha: u32,
    alpha1: u32,
    beta1: u32,
    d_max: usize,
    prec: usize,
) -> Result<String, JsValue> {
    report_json(q, zeta, alpha, alpha1, beta1, d_max, prec).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builds() {
        let s = instance_json(5, 2, 2, 1, 0, 8).unwrap();
        assert!(s.contains("\"d0bar\""));
        assert!(instance_json(5, 4, 2, 1, 0, 8).is_err());
    }

    #[test]
    fn witness_at_alpha() {
        let s = witness_json(5, 2, 2, 1, 0, "s+3", 6).unwrap();
        assert!(s.contains("\"phi_fixed\": true"));
        assert!(witness_json(5, 2, 2, 1, 0, "s^2+1", 6).is_err());
    }

    #[test]
    fn report_at_degree_one() {
        let s = report_json(5, 2, 2, 1, 0, 1, 6).unwrap();
        assert!(s.contains("\"target_size\": 120"));
    }
}
