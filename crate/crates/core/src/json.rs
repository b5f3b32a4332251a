//! On-disk JSON forms of modules, instances, witnesses, reports and motives.
//!
//! Field elements are coefficient lists over F_p in the modulus basis, low degree
//! first. Bivariate entries are strings in the grammar `c*s^a*t^b` joined by `+`,
//! with c an F_q element code.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function_field::place::PlaceJson;
use crate::function_field::BivarEntry;
use crate::gf::mat::Mat;
use crate::gf::small::Fq;
use crate::gf::{CtxDescriptor, FieldCtx};
use crate::group::{GenerationReport, SmallMat};
use crate::module::{BivarMatrix, FrobModule, MotiveConvention};
use crate::nori::{InstanceParams, SlInstance};
use crate::series::SeriesJson;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryJson {
    pub num: String,
    pub den: String,
}

impl EntryJson {
    pub fn from_entry(e: &BivarEntry) -> EntryJson {
        EntryJson { num: e.num().to_string(), den: e.den().to_string() }
    }

    pub fn to_entry(&self, f: &Arc<Fq>) -> Result<BivarEntry> {
        BivarEntry::parse(f, &self.num, &self.den)
    }
}

fn matrix_rows(m: &BivarMatrix, rename: impl Fn(String) -> String) -> Vec<Vec<EntryJson>> {
    let n = m.n();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let e = EntryJson::from_entry(m.get(i, j));
                    EntryJson { num: rename(e.num), den: rename(e.den) }
                })
                .collect()
        })
        .collect()
}

fn parse_rows(f: &Arc<Fq>, rows: &[Vec<EntryJson>], rename: impl Fn(&str) -> String) -> Result<BivarMatrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Parse("matrix must be square and nonempty".into()));
    }
    let entries = rows
        .iter()
        .flatten()
        .map(|e| EntryJson { num: rename(&e.num), den: rename(&e.den) }.to_entry(f))
        .collect::<Result<Vec<_>>>()?;
    Ok(BivarMatrix::new(n, entries))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleJson {
    pub schema: String,
    pub version: u32,
    pub p: u32,
    pub e: usize,
    pub q: u32,
    pub n: usize,
    pub level: usize,
    #[serde(rename = "D")]
    pub d: Vec<Vec<EntryJson>>,
}

impl ModuleJson {
    pub fn from_module(m: &FrobModule) -> ModuleJson {
        let f = m.field();
        ModuleJson {
            schema: "dgw/module".into(),
            version: SCHEMA_VERSION,
            p: f.p(),
            e: f.e(),
            q: f.q(),
            n: m.n(),
            level: m.level(),
            d: matrix_rows(m.matrix(), |s| s),
        }
    }

    pub fn to_module(&self) -> Result<FrobModule> {
        let f = Fq::new(self.p, self.e)?;
        if f.q() != self.q {
            return Err(Error::Parse(format!("q = {} does not match p^e", self.q)));
        }
        let d = parse_rows(&f, &self.d, |s| s.to_string())?;
        if d.n() != self.n {
            return Err(Error::Parse("dimension does not match D".into()));
        }
        FrobModule::new(&f, self.level, d)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckJson {
    pub name: String,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceJson {
    pub schema: String,
    pub version: u32,
    #[serde(flatten)]
    pub params: InstanceParams,
    pub g0: Vec<Vec<u32>>,
    pub x: Vec<Vec<u32>>,
    pub d0bar: Vec<Vec<u32>>,
    /// f_i as coefficient lists in s.
    pub fs: Vec<Vec<u32>>,
    pub checks: Vec<CheckJson>,
}

fn rows_of(n: usize, m: &[u32]) -> Vec<Vec<u32>> {
    m.chunks(n).map(|r| r.to_vec()).collect()
}

impl InstanceJson {
    pub fn from_instance(inst: &SlInstance) -> InstanceJson {
        let n = inst.params.n;
        InstanceJson {
            schema: "dgw/instance".into(),
            version: SCHEMA_VERSION,
            params: inst.params.clone(),
            g0: rows_of(n, &inst.g0),
            x: rows_of(n, &inst.x),
            d0bar: rows_of(n, &inst.d0bar),
            fs: inst.fs.iter().map(|p| p.coeffs().to_vec()).collect(),
            checks: inst.assertions.iter().map(|(name, ok)| CheckJson { name: name.clone(), ok: *ok }).collect(),
        }
    }
}

/// A matrix over a field as nested coefficient lists.
pub fn mat_to_json(m: &Mat) -> Vec<Vec<Vec<u32>>> {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| m.get(i, j).coeffs().to_vec()).collect()).collect()
}

pub fn mat_from_json(ctx: &Arc<FieldCtx>, rows: &[Vec<Vec<u32>>]) -> Result<Mat> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err(Error::Parse("matrix rows have different lengths".into()));
    }
    let entries = rows.iter().flatten().map(|c| ctx.from_coeffs(c)).collect::<Result<Vec<_>>>()?;
    let cols = rows[0].len();
    Ok(Mat::from_fn(n, cols, |i, j| entries[i * cols + j].clone()))
}

/// F_q codes of a matrix over the canonical F_q.
pub fn codes_of(m: &Mat) -> Result<SmallMat> {
    crate::group::from_mat(m)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessChecksJson {
    pub phi_fixed: bool,
    pub det_one: bool,
    pub fundamental_identity: bool,
    pub charpoly_matches_product: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessJson {
    pub place: PlaceJson,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub prec: usize,
    pub h: Vec<Vec<SeriesJson>>,
    pub h0: Vec<Vec<Vec<u32>>>,
    pub charpoly_h0: Vec<Vec<u32>>,
    /// Multiplicative order of h0, reported next to M.
    pub order_h0: u64,
    pub checks: WitnessChecksJson,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaceFailureJson {
    pub place: PlaceJson,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldJson {
    pub p: u32,
    pub e: usize,
    pub q: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessSetJson {
    pub schema: String,
    pub version: u32,
    pub field: FieldJson,
    pub n: usize,
    #[serde(rename = "N")]
    pub prec: usize,
    pub d_max: usize,
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<InstanceParams>,
    pub witnesses: Vec<WitnessJson>,
    pub failures: Vec<PlaceFailureJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportJson {
    pub schema: String,
    pub version: u32,
    #[serde(flatten)]
    pub report: GenerationReport,
    pub checks: Vec<CheckJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExistenceJson {
    pub schema: String,
    pub version: u32,
    pub place: PlaceJson,
    #[serde(rename = "N")]
    pub prec: usize,
    pub ok: bool,
    pub first_failure: Option<usize>,
    /// min over entries of v(D_l) for l < N; `null` when D_l = 0.
    pub valuations: Vec<Option<i64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveJson {
    pub schema: String,
    pub version: u32,
    pub place: PlaceJson,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub prec: usize,
    pub field: CtxDescriptor,
    pub ybar: Vec<Vec<SeriesJson>>,
    pub checks: Vec<CheckJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MotiveJson {
    pub schema: String,
    pub version: u32,
    pub p: u32,
    pub e: usize,
    pub alpha: u32,
    pub convention: MotiveConvention,
    /// Φ with θ in place of s.
    #[serde(rename = "Phi")]
    pub phi: Vec<Vec<EntryJson>>,
    pub checks: Vec<CheckJson>,
}

impl MotiveJson {
    pub fn phi_rows(m: &BivarMatrix) -> Vec<Vec<EntryJson>> {
        matrix_rows(m, |s| s.replace('s', "theta"))
    }

    pub fn parse_phi(&self) -> Result<BivarMatrix> {
        let f = Fq::new(self.p, self.e)?;
        parse_rows(&f, &self.phi, |s| s.replace("theta", "s"))
    }
}

pub fn to_pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

pub fn from_str<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nori::build_instance;

    #[test]
    fn module_roundtrip() {
        let p = InstanceParams { q: 5, n: 2, zeta: 2, alpha: 2, alphas: vec![1], betas: vec![0] };
        let inst = build_instance(&p, 4).unwrap();
        let j = ModuleJson::from_module(&inst.module);
        let text = to_pretty(&j);
        let back: ModuleJson = from_str(&text).unwrap();
        assert_eq!(back.to_module().unwrap(), inst.module);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(from_str::<ModuleJson>(""), Err(Error::Parse(_))));
    }
}
