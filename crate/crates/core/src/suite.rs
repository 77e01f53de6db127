//! Runs check families from a [`RunConfig`] and writes their reports.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Value};

use crate::config::{CheckName, RepName, RunConfig};
use crate::error::{Error, Result};
use crate::function::json::load_function;
use crate::function::{AtomSum, FiberDomain, C64};
use crate::group::{CaseKind, CaseTag};
use crate::shannon::LazyShannonLift;
use crate::verify::bandlimited::{self, bandlimited_identity_defect};
use crate::verify::discrete::{self, discrete_isometry_defect, Side};
use crate::verify::gram::{gram_j, gram_l, gram_q_spot_checks, gram_q_transfer, l_system, truncation_depth};
use crate::verify::intertwine::{
    chart_roundtrip_defect, dilation_invariance_defect, jacobian_defect, line_intertwine_defect, planar_intertwine_defect,
    unitarity_u_defect,
};
use crate::verify::isometry::{isometry_defect_continuous, Generator, Rep};
use crate::verify::kernel::kernel_isometry_defect;
use crate::verify::parseval::{bessel_sequence, parseval_defect};
use crate::verify::testfns::rng_for;
use crate::verify::{workers, Report};

/// Reports of one run, stamped with the config hash.
#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub config_hash: String,
    pub seed: u64,
    pub reports: Vec<Report>,
}

impl SuiteOutcome {
    pub fn pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }

    /// Process exit code: 0 when every check passes, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.pass() {
            0
        } else {
            2
        }
    }

    /// Aggregated document written as `suite.json`.
    pub fn summary(&self) -> Value {
        json!({
            "schemaVersion": crate::verify::REPORT_SCHEMA_VERSION,
            "configHash": self.config_hash,
            "seed": self.seed,
            "workers": workers(),
            "pass": self.pass(),
            "reports": self.reports,
        })
    }

    /// Report bodies without runtimes, for determinism comparisons.
    pub fn bodies(&self) -> Vec<Value> {
        self.reports.iter().map(Report::body).collect()
    }
}

/// Runs every check family listed in the config.
pub fn run(cfg: &RunConfig) -> Result<SuiteOutcome> {
    run_checks(cfg, &cfg.checks)
}

/// Runs the given families in order. Configuration problems are errors;
/// numerical failures inside a check become failing reports.
pub fn run_checks(cfg: &RunConfig, checks: &[CheckName]) -> Result<SuiteOutcome> {
    cfg.validate()?;
    let hash = cfg.hash();
    let mut reports = Vec::new();
    for &c in checks {
        reports.extend(run_family(cfg, c)?);
    }
    for r in &mut reports {
        r.config_hash = hash.clone();
    }
    Ok(SuiteOutcome { config_hash: hash, seed: cfg.seed, reports })
}

/// Keeps configuration errors, turns any other check error into a failing report.
fn guard(check: &str, case: &str, tol: f64, f: impl FnOnce() -> Result<Report>) -> Result<Report> {
    let started = Instant::now();
    match f() {
        Ok(r) => Ok(r),
        Err(e @ (Error::Config(_) | Error::InvalidCase(_))) => Err(e),
        Err(e) => Ok(Report::from_error(check, case, json!({}), tol, &e, started)),
    }
}

fn tag_generator(mut r: Report, label: &str) -> Report {
    if let Value::Object(m) = &mut r.params {
        m.insert("generator".into(), json!(label));
    }
    r
}

fn planar_cases(cfg: &RunConfig) -> Result<Vec<CaseTag>> {
    Ok(cfg.case_tags()?.into_iter().filter(|c| c.kind.is_planar()).collect())
}

fn case_domain(case: &CaseTag) -> FiberDomain {
    if case.kind == CaseKind::III {
        FiberDomain::Circle
    } else {
        FiberDomain::Line
    }
}

fn rep(r: RepName) -> Rep {
    match r {
        RepName::L => Rep::L,
        RepName::Q => Rep::Q,
    }
}

/// Reports of one family.
pub fn run_family(cfg: &RunConfig, check: CheckName) -> Result<Vec<Report>> {
    let t = &cfg.tolerances;
    let s = &cfg.samples;
    let domain = cfg.primary_domain()?;
    let lift = cfg.lift(domain)?;
    let label = cfg.generator_label(domain);
    let mut out = Vec::new();
    match check {
        CheckName::Gram => {
            let r = guard("gram_l", "L", t.gram, || Ok(gram_l(&lift, &cfg.lattice, cfg.fiber_box, t.gram)?.0))?;
            out.push(tag_generator(r, &label));
        }
        CheckName::QGram => {
            let r = guard("gram_q_transfer", "Q", t.q_gram, || {
                Ok(gram_q_transfer(&lift, &cfg.lattice, cfg.fiber_box, t.q_gram)?.0)
            })?;
            out.push(tag_generator(r, &label));
            let r = guard("gram_q_spot", "Q", t.spot_check, || {
                gram_q_spot_checks(&lift, &cfg.lattice, cfg.fiber_box, s.spot_checks, cfg.seed, t.spot_check)
            })?;
            out.push(tag_generator(r, &label));
        }
        CheckName::JGram => {
            for case in planar_cases(cfg)? {
                let lift = cfg.lift(case_domain(&case))?;
                let started = Instant::now();
                match gram_j(&case, &lift, &cfg.lattice, cfg.fiber_box, s.spot_checks, cfg.seed, t.j_gram, t.spot_check) {
                    Ok((a, b)) => out.extend([a, b]),
                    Err(e @ (Error::Config(_) | Error::InvalidCase(_))) => return Err(e),
                    Err(e) => out.push(Report::from_error("gram_j_transfer", &case.label(), json!({}), t.j_gram, &e, started)),
                }
            }
        }
        CheckName::Isometry => {
            for &r in &cfg.reps {
                let rp = rep(r);
                let rep_out = guard("isometry", rp.label(), t.isometry, || {
                    Ok(isometry_defect_continuous(&Generator::Lift(lift.clone()), rp, cfg.isometry_box, t.isometry)?.0)
                })?;
                out.push(tag_generator(rep_out, &label));
            }
        }
        CheckName::Discrete => {
            let pairs = discrete::default_pairs(domain, cfg.seed, 2, s.discrete_random_pairs);
            let g = Generator::Lift(lift.clone());
            for &r in &cfg.reps {
                let (side, tol) = match r {
                    RepName::L => (Side::L, t.discrete_l),
                    RepName::Q => (Side::Q, t.discrete_q),
                };
                let rp = guard("discrete_isometry", &side.label(), tol, || {
                    discrete_isometry_defect(&g, side, &pairs, s.discrete_xi, tol)
                })?;
                out.push(tag_generator(rp, &label));
            }
            for case in planar_cases(cfg)? {
                let d = case_domain(&case);
                let pairs = discrete::default_pairs(d, cfg.seed, 2, s.discrete_random_pairs);
                let g = Generator::Lift(cfg.lift(d)?);
                let side = Side::J(case);
                out.push(guard("discrete_isometry", &side.label(), t.discrete_j, || {
                    discrete_isometry_defect(&g, side, &pairs, s.discrete_xi_planar, t.discrete_j)
                })?);
            }
        }
        CheckName::Bandlimited => {
            for (f, g, k) in bandlimited::default_pairs() {
                out.push(guard("bandlimited", "L", t.bandlimited, || {
                    bandlimited_identity_defect(&f, &g, k, t.bandlimited)
                })?);
            }
        }
        CheckName::Parseval => {
            let line = cfg.lift(FiberDomain::Line)?;
            out.push(guard("parseval_bessel", "L", t.parseval, || {
                Ok(bessel_sequence(&line, &cfg.parseval_boxes, t.parseval)?.0)
            })?);
            out.push(guard("parseval", "L", t.parseval, || parseval_combination(cfg, &line))?);
            if let Some(path) = &cfg.function {
                let f = load_function(path)?;
                out.push(guard("parseval", "L", t.parseval, || parseval_defect(&f, &line, &cfg.lattice, t.parseval))?);
            }
        }
        CheckName::Intertwine => {
            out.push(guard("line_intertwine", "L->Q", t.line_intertwine, || {
                line_intertwine_defect(cfg.seed, s.line_elements, s.line_points, t.line_intertwine)
            })?);
            out.push(guard("unitarity_u", "L->Q", t.unitarity, || {
                unitarity_u_defect(cfg.seed, s.unitarity_functions, t.unitarity)
            })?);
        }
        CheckName::PlanarIntertwine => {
            for case in planar_cases(cfg)? {
                out.push(guard("planar_intertwine", &case.label(), t.planar_intertwine, || {
                    planar_intertwine_defect(&case, cfg.seed, s.intertwine_elements, s.intertwine_points, t.planar_intertwine)
                })?);
            }
        }
        CheckName::Charts => {
            for case in planar_cases(cfg)? {
                out.push(guard("chart_roundtrip", &case.label(), t.roundtrip, || {
                    chart_roundtrip_defect(&case, cfg.seed, s.chart_points, t.roundtrip)
                })?);
                out.push(guard("jacobian", &case.label(), t.jacobian, || {
                    jacobian_defect(&case, cfg.seed, s.jacobian_points, s.jacobian_step, t.jacobian)
                })?);
            }
        }
        CheckName::Invariance => {
            for case in planar_cases(cfg)? {
                out.push(guard("dilation_invariance", &case.label(), t.invariance, || {
                    dilation_invariance_defect(&case, cfg.seed, s.invariance_points, t.invariance)
                })?);
            }
        }
        CheckName::Kernel => {
            for case in planar_cases(cfg)? {
                let tol = if case.kind == CaseKind::I && case.alpha == Some(-1.0) { t.kernel_exact } else { t.kernel };
                let lift = cfg.lift(case_domain(&case))?;
                out.push(guard("kernel", &case.label(), tol, || kernel_isometry_defect(&case, &lift, cfg.kernel_box, tol))?);
            }
        }
    }
    Ok(out)
}

/// `0.6·a + 0.8·b` for two seeded elements of the truncated l-side system, whose
/// coefficients are exactly `0.6` and `0.8`.
fn parseval_combination(cfg: &RunConfig, lift: &LazyShannonLift) -> Result<Report> {
    use rand::Rng;
    let depth = truncation_depth(lift, cfg.fiber_box)?;
    let sys = l_system(lift, depth, &cfg.lattice)?;
    let mut rng = rng_for(cfg.seed, "parseval_combination");
    let a = rng.gen_range(0..sys.len());
    let (f, elements) = if sys.len() == 1 {
        (sys[a].clone(), vec![a])
    } else {
        let mut b = rng.gen_range(0..sys.len() - 1);
        if b >= a {
            b += 1;
        }
        let mut f: AtomSum = sys[a].scaled(C64::new(0.6, 0.0));
        f.extend(&sys[b].scaled(C64::new(0.8, 0.0)));
        (f, vec![a, b])
    };
    let mut r = parseval_defect(&f, lift, &cfg.lattice, cfg.tolerances.parseval)?;
    if let Value::Object(m) = &mut r.params {
        m.insert("elements".into(), json!(elements));
    }
    Ok(r)
}

/// Writes `bytes` to a temporary sibling, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let name = path.file_name().ok_or_else(|| Error::Config(format!("not a file path: {}", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn file_stem(r: &Report) -> String {
    let clean = |s: &str| -> String {
        s.chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' })
            .collect::<String>()
            .trim_matches('_')
            .to_string()
    };
    format!("{}-{}", clean(&r.check), clean(&r.case))
}

/// Writes one `NN-check-case.json` per report and `suite.json`; returns the paths written.
pub fn write_outcome(outcome: &SuiteOutcome, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for (i, r) in outcome.reports.iter().enumerate() {
        let p = dir.join(format!("{:02}-{}.json", i + 1, file_stem(r)));
        write_atomic(&p, serde_json::to_string_pretty(r)?.as_bytes())?;
        paths.push(p);
    }
    let p = dir.join("suite.json");
    write_atomic(&p, serde_json::to_string_pretty(&outcome.summary())?.as_bytes())?;
    paths.push(p);
    Ok(paths)
}
