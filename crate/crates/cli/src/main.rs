use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dgw_core::group::Verdict;
use dgw_core::json::{self, CheckJson, InstanceJson, ModuleJson, ReportJson, WitnessSetJson, SCHEMA_VERSION};
use dgw_core::module::FrobModule;
use dgw_core::nori::{build_instance, InstanceParams};
use dgw_core::pipeline::{self, RunConfig};
use dgw_core::solver::DEFAULT_M_MAX;
use dgw_core::Error;
use serde::Serialize;

const EXIT_INVARIANT: u8 = 2;
const EXIT_INTEGRALITY: u8 = 3;
const EXIT_NO_WITNESS: u8 = 4;
const EXIT_CERTIFICATE: u8 = 5;
const EXIT_USAGE: u8 = 64;
const EXIT_PARSE: u8 = 65;

#[derive(Parser)]
#[command(name = "dgw", version, about = "Frobenius difference modules: witnesses and SL_n generation certificates")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build the SL_n instance module and its parameter record.
    Build(BuildArgs),
    /// Valuation table of the coefficients D_l at a place.
    Check(CheckArgs),
    /// Truncated fundamental matrix at one place.
    Solve(SolveArgs),
    /// Witnesses at every place up to a degree.
    Extract(ExtractArgs),
    /// Generation report for a witness set.
    Certify(CertifyArgs),
    /// Rewrite the module as a pre-t-motive around s = alpha.
    ExportMotive(MotiveArgs),
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    q: u32,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    zeta: u32,
    #[arg(long)]
    alpha: u32,
    #[arg(long, value_delimiter = ',', required = true)]
    alphas: Vec<u32>,
    #[arg(long, value_delimiter = ',', required = true)]
    betas: Vec<u32>,
    /// Precision N used by the reduction assertion.
    #[arg(long = "prec", short = 'N', default_value_t = 8)]
    prec: usize,
    #[arg(long, default_value = "module.json")]
    out: PathBuf,
    #[arg(long, default_value = "instance.json")]
    instance_out: PathBuf,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    module: PathBuf,
    #[arg(long, default_value = "s")]
    place: String,
    #[arg(long = "prec", short = 'N', default_value_t = 8)]
    prec: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    module: PathBuf,
    /// Monic irreducible polynomial in s, e.g. `s+3` or `s^2+s+2`.
    #[arg(long)]
    place: String,
    #[arg(long = "prec", short = 'N', default_value_t = 8)]
    prec: usize,
    #[arg(long, default_value_t = DEFAULT_M_MAX)]
    m_max: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long)]
    module: PathBuf,
    /// Instance record from `build`; enables the torus-witness check in `certify`.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long = "prec", short = 'N', default_value_t = 8)]
    prec: usize,
    #[arg(long, default_value_t = 3)]
    d_max: usize,
    #[arg(long, default_value_t = DEFAULT_M_MAX)]
    m_max: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CertifyArgs {
    #[arg(long)]
    witnesses: PathBuf,
    /// Exit with status 5 unless the verdict is full.
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MotiveArgs {
    #[arg(long)]
    module: PathBuf,
    #[arg(long)]
    alpha: u32,
    #[arg(long = "prec", short = 'N', default_value_t = 8)]
    prec: usize,
    #[arg(long, default_value_t = DEFAULT_M_MAX)]
    m_max: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Parse(_) => EXIT_PARSE,
            Error::NotIntegral | Error::SingularReduction | Error::NonUnitDenominator => EXIT_INTEGRALITY,
            Error::Invariant(_)
            | Error::ConjugationFailed
            | Error::CentralizerNotTorus
            | Error::NoRationalDescent
            | Error::PhiFixednessViolated
            | Error::DeterminantNotPhiFixed => EXIT_INVARIANT,
            Error::SplittingDegreeExceeded(_)
            | Error::DegreeOverflow { .. }
            | Error::Inconsistent
            | Error::SingularConstantTerm => EXIT_NO_WITNESS,
            Error::CapExceeded(_) | Error::BudgetExceeded | Error::BudgetExhausted => EXIT_CERTIFICATE,
            _ => EXIT_USAGE,
        };
        Failure { code, msg: e.to_string() }
    }
}

type CmdResult = Result<u8, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure { code: EXIT_USAGE, msg: format!("{}: {e}", path.display()) })
}

fn load_module(path: &Path) -> Result<FrobModule, Failure> {
    Ok(json::from_str::<ModuleJson>(&read(path)?)?.to_module()?)
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), Failure> {
    let text = json::to_pretty(value);
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure { code: 1, msg: format!("{}: {e}", p.display()) }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn log_checks(checks: &[CheckJson]) {
    for c in checks {
        eprintln!("{}: {}", c.name, if c.ok { "ok" } else { "FAILED" });
    }
}

fn build(a: BuildArgs) -> CmdResult {
    let params = InstanceParams { q: a.q, n: a.n, zeta: a.zeta, alpha: a.alpha, alphas: a.alphas, betas: a.betas };
    let inst = build_instance(&params, a.prec)?;
    let ij = InstanceJson::from_instance(&inst);
    log_checks(&ij.checks);
    emit(&ModuleJson::from_module(&inst.module), Some(&a.out))?;
    emit(&ij, Some(&a.instance_out))?;
    eprintln!("wrote {} and {}", a.out.display(), a.instance_out.display());
    Ok(0)
}

fn check(a: CheckArgs) -> CmdResult {
    let m = load_module(&a.module)?;
    let place = pipeline::parse_place(m.field(), &a.place)?;
    let r = pipeline::existence_report(&m, &place, a.prec)?;
    match r.first_failure {
        None => eprintln!("v(D_l) >= l for all l < {}: ok", a.prec),
        Some(l) => eprintln!("v(D_l) >= l fails first at l = {l}"),
    }
    emit(&r, a.out.as_deref())?;
    Ok(0)
}

fn solve(a: SolveArgs) -> CmdResult {
    let m = load_module(&a.module)?;
    let place = pipeline::parse_place(m.field(), &a.place)?;
    let r = pipeline::solve_at(&m, &place, a.prec, a.m_max, a.seed)?;
    log_checks(&r.checks);
    emit(&r, a.out.as_deref())?;
    Ok(if r.checks.iter().all(|c| c.ok) { 0 } else { EXIT_INVARIANT })
}

fn extract(a: ExtractArgs) -> CmdResult {
    let m = load_module(&a.module)?;
    let instance = match &a.instance {
        Some(p) => Some(json::from_str::<InstanceJson>(&read(p)?)?.params),
        None => None,
    };
    let cfg = RunConfig { prec: a.prec, d_max: a.d_max, m_max: a.m_max, seed: a.seed, ..RunConfig::default() };
    let results = pipeline::extract_all(&m, &cfg)?;
    let set = pipeline::witness_set(&m, &results, &cfg, instance);
    for f in &set.failures {
        eprintln!("place {}: {}", pipeline::place_label(m.field(), &f.place.pi), f.error);
    }
    eprintln!("{} witnesses, {} failures", set.witnesses.len(), set.failures.len());
    emit(&set, a.out.as_deref())?;
    Ok(if set.witnesses.is_empty() { EXIT_NO_WITNESS } else { 0 })
}

fn certify(a: CertifyArgs) -> CmdResult {
    let set: WitnessSetJson = json::from_str(&read(&a.witnesses)?)?;
    let (report, checks) = pipeline::certify_witness_set(&set)?;
    log_checks(&checks);
    eprintln!(
        "closure {}/{}, charpoly oracle {:?}, class oracle {:?}, verdict {:?}",
        report.closure_size, report.target_size, report.charpoly_verdict, report.class_verdict, report.verdict
    );
    let sound = checks.iter().all(|c| c.ok);
    let full = report.verdict == Verdict::Full;
    emit(&ReportJson { schema: "dgw/report".into(), version: SCHEMA_VERSION, report, checks }, a.out.as_deref())?;
    if !sound {
        return Ok(EXIT_INVARIANT);
    }
    Ok(if a.strict && !full { EXIT_CERTIFICATE } else { 0 })
}

fn export_motive(a: MotiveArgs) -> CmdResult {
    let m = load_module(&a.module)?;
    let r = pipeline::motive_report(&m, a.alpha, a.prec, a.m_max)?;
    log_checks(&r.checks);
    emit(&r, a.out.as_deref())?;
    Ok(if r.checks.iter().all(|c| c.ok) { 0 } else { EXIT_INVARIANT })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let result = match cli.cmd {
        Cmd::Build(a) => build(a),
        Cmd::Check(a) => check(a),
        Cmd::Solve(a) => solve(a),
        Cmd::Extract(a) => extract(a),
        Cmd::Certify(a) => certify(a),
        Cmd::ExportMotive(a) => export_motive(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
