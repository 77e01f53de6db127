//! Command-line interface: `verify`, `coeffs` and `suite`.
//!
//! Exit codes: 0 when every check passes, 2 when any check fails, 1 on a
//! configuration or input error.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{CaseSpec, CheckName, RepName, RunConfig};
use crate::error::{Error, Result};
use crate::function::json::load_function;
use crate::function::FiberDomain;
use crate::suite::{run_checks, write_atomic, write_outcome, SuiteOutcome};
use crate::verify::gram::LatticeBox;
use crate::verify::parseval::{coefficient_energy, l_coefficients};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_FAIL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "repro-lifts", version, about = "Shannon lifts, intertwiners and numerical checks of reproducing formulae")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one check family and write its reports.
    Verify {
        check: VerifyCheck,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Exact lattice coefficients of a function as CSV, with a trailing Parseval row.
    Coeffs {
        /// Function file (JSON atoms).
        #[arg(long)]
        function: PathBuf,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Scale range `a..b`.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_range)]
        k: Option<(i64, i64)>,
        /// Translation range `a..b`.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_range)]
        m: Option<(i64, i64)>,
        /// `DR` or a line-fiber bijection table.
        #[arg(long)]
        generator: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run every check family listed in a config.
    Suite {
        #[command(flatten)]
        opts: RunOpts,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerifyCheck {
    Intertwine,
    Gram,
    Parseval,
    Isometry,
    Discrete,
    Kernel,
    Bandlimited,
    Charts,
    Invariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RepArg {
    L,
    Q,
}

/// Flags shared by `verify` and `suite`; each overrides the config value.
#[derive(Debug, Clone, Default, Args)]
pub struct RunOpts {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Report directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Tolerance for every check in the run.
    #[arg(long, allow_hyphen_values = true)]
    pub tol: Option<f64>,
    /// Case tags, comma separated (`I`, `II`, `III`, `IV`).
    #[arg(long, value_delimiter = ',')]
    pub case: Vec<String>,
    /// α grid, comma separated; applied to every case that takes α.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub alpha: Vec<f64>,
    #[arg(long)]
    pub elements: Option<usize>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long, value_enum)]
    pub rep: Option<RepArg>,
    /// `DR`, `DT` or a bijection table path.
    #[arg(long)]
    pub generator: Option<String>,
    /// Lattice scale range `a..b`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_range)]
    pub k: Option<(i64, i64)>,
    /// Lattice translation range `a..b`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_range)]
    pub m: Option<(i64, i64)>,
    /// Fiber box `-b..b`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_range)]
    pub l: Option<(i64, i64)>,
    /// Sample count of the check (points, ξ samples or spot checks).
    #[arg(long)]
    pub samples: Option<usize>,
    /// Function file for the Parseval check.
    #[arg(long)]
    pub function: Option<PathBuf>,
}

/// Parses an inclusive range `a..b`.
pub fn parse_range(s: &str) -> std::result::Result<(i64, i64), String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected a..b, got {s:?}"))?;
    let a: i64 = a.trim().parse().map_err(|_| format!("bad range start in {s:?}"))?;
    let b: i64 = b.trim().parse().map_err(|_| format!("bad range end in {s:?}"))?;
    if a > b {
        return Err(format!("empty range {s:?}"));
    }
    Ok((a, b))
}

fn load_config(path: &Option<PathBuf>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn case_specs(cases: &[String], alphas: &[f64]) -> Vec<CaseSpec> {
    let mut out = Vec::new();
    for c in cases {
        let takes_alpha = !matches!(c.as_str(), "II" | "L" | "Q");
        if takes_alpha && !alphas.is_empty() {
            out.extend(alphas.iter().map(|&a| CaseSpec::new(c, Some(a))));
        } else {
            out.push(CaseSpec::new(c, None));
        }
    }
    out
}

fn set_all_tolerances(cfg: &mut RunConfig, tol: f64) {
    let t = &mut cfg.tolerances;
    for v in [
        &mut t.gram,
        &mut t.q_gram,
        &mut t.spot_check,
        &mut t.j_gram,
        &mut t.isometry,
        &mut t.discrete_l,
        &mut t.discrete_q,
        &mut t.discrete_j,
        &mut t.bandlimited,
        &mut t.parseval,
        &mut t.line_intertwine,
        &mut t.unitarity,
        &mut t.planar_intertwine,
        &mut t.roundtrip,
        &mut t.jacobian,
        &mut t.invariance,
        &mut t.kernel,
        &mut t.kernel_exact,
    ] {
        *v = tol;
    }
}

/// Applies flag overrides to a config.
pub fn apply_opts(cfg: &mut RunConfig, o: &RunOpts, check: Option<VerifyCheck>) -> Result<()> {
    if let Some(s) = o.seed {
        cfg.seed = s;
    }
    if let Some(p) = &o.out {
        cfg.output = p.clone();
    }
    if let Some(t) = o.tol {
        set_all_tolerances(cfg, t);
    }
    if !o.case.is_empty() {
        cfg.cases = case_specs(&o.case, &o.alpha);
    } else if !o.alpha.is_empty() {
        return Err(Error::Config("--alpha needs --case".into()));
    }
    if let Some(r) = o.rep {
        cfg.reps = vec![match r {
            RepArg::L => RepName::L,
            RepArg::Q => RepName::Q,
        }];
    }
    if let Some(g) = &o.generator {
        cfg.generator = Some(g.clone());
    }
    if o.k.is_some() || o.m.is_some() {
        cfg.lattice = LatticeBox::new(o.k.unwrap_or(cfg.lattice.k), o.m.unwrap_or(cfg.lattice.m))?;
    }
    if let Some((a, b)) = o.l {
        if a != -b {
            return Err(Error::Config(format!("--l must be a symmetric range -b..b, got {a}..{b}")));
        }
        cfg.fiber_box = b;
    }
    if let Some(p) = &o.function {
        cfg.function = Some(p.clone());
    }
    let s = &mut cfg.samples;
    let planar = !o.case.is_empty();
    if let Some(e) = o.elements {
        s.intertwine_elements = e;
        s.line_elements = e;
    }
    if let Some(p) = o.points {
        s.intertwine_points = p;
        s.line_points = p;
    }
    if let (Some(n), Some(c)) = (o.samples, check) {
        match c {
            VerifyCheck::Intertwine => {
                s.intertwine_points = n;
                s.line_points = n;
            }
            VerifyCheck::Gram => s.spot_checks = n,
            VerifyCheck::Discrete if planar => s.discrete_xi_planar = n,
            VerifyCheck::Discrete => s.discrete_xi = n,
            VerifyCheck::Charts => {
                s.chart_points = n;
                s.jacobian_points = n;
            }
            VerifyCheck::Invariance => s.invariance_points = n,
            VerifyCheck::Parseval | VerifyCheck::Isometry | VerifyCheck::Kernel | VerifyCheck::Bandlimited => {
                return Err(Error::Config(format!("--samples does not apply to {c:?}")))
            }
        }
    } else if o.samples.is_some() {
        return Err(Error::Config("--samples only applies to verify".into()));
    }
    Ok(())
}

/// Check families run by `verify <check>`.
pub fn families(check: VerifyCheck, cfg: &RunConfig, with_cases: bool) -> Vec<CheckName> {
    match check {
        VerifyCheck::Intertwine if with_cases => vec![CheckName::PlanarIntertwine],
        VerifyCheck::Intertwine => vec![CheckName::Intertwine],
        VerifyCheck::Gram if with_cases => vec![CheckName::JGram],
        VerifyCheck::Gram => {
            let mut v = Vec::new();
            if cfg.reps.contains(&RepName::L) {
                v.push(CheckName::Gram);
            }
            if cfg.reps.contains(&RepName::Q) {
                v.push(CheckName::QGram);
            }
            v
        }
        VerifyCheck::Parseval => vec![CheckName::Parseval],
        VerifyCheck::Isometry => vec![CheckName::Isometry],
        VerifyCheck::Discrete => vec![CheckName::Discrete],
        VerifyCheck::Kernel => vec![CheckName::Kernel],
        VerifyCheck::Bandlimited => vec![CheckName::Bandlimited],
        VerifyCheck::Charts => vec![CheckName::Charts],
        VerifyCheck::Invariance => vec![CheckName::Invariance],
    }
}

fn finish(outcome: &SuiteOutcome, cfg: &RunConfig) -> Result<i32> {
    for r in &outcome.reports {
        println!("{}", r.summary_line());
    }
    let paths = write_outcome(outcome, &cfg.output)?;
    println!(
        "{} of {} checks passed; reports in {} ({} files)",
        outcome.reports.iter().filter(|r| r.pass).count(),
        outcome.reports.len(),
        cfg.output.display(),
        paths.len()
    );
    Ok(outcome.exit_code())
}

fn verify(check: VerifyCheck, o: &RunOpts) -> Result<i32> {
    let mut cfg = load_config(&o.config)?;
    apply_opts(&mut cfg, o, Some(check))?;
    cfg.validate()?;
    let mut fams = families(check, &cfg, !o.case.is_empty());
    if check == VerifyCheck::Discrete && !o.case.is_empty() {
        // planar sides only: drop the one-dimensional sides
        cfg.reps.clear();
        fams = vec![CheckName::Discrete];
    }
    if matches!(check, VerifyCheck::Kernel | VerifyCheck::Charts | VerifyCheck::Invariance)
        && !cfg.case_tags()?.iter().any(|c| c.kind.is_planar())
    {
        return Err(Error::Config(format!("{check:?} needs at least one planar case")));
    }
    let outcome = run_checks(&cfg, &fams)?;
    finish(&outcome, &cfg)
}

fn suite(o: &RunOpts) -> Result<i32> {
    let mut cfg = load_config(&o.config)?;
    apply_opts(&mut cfg, o, None)?;
    cfg.validate()?;
    let outcome = run_checks(&cfg, &cfg.checks)?;
    finish(&outcome, &cfg)
}

/// CSV of exact coefficients at the scales where the function can have any,
/// followed by `parseval,,<Σ|c|²>,`.
pub fn coeffs_csv(
    function: &std::path::Path,
    k: Option<(i64, i64)>,
    m: Option<(i64, i64)>,
    cfg: &RunConfig,
) -> Result<String> {
    let f = load_function(function)?;
    let lift = cfg.lift(FiberDomain::Line)?;
    let lattice = LatticeBox::new(k.unwrap_or(cfg.lattice.k), m.unwrap_or(cfg.lattice.m))?;
    let coeffs = l_coefficients(&f, &lift, &lattice)?;
    let scales = crate::verify::parseval::needed_scales(&f, &lift)?;
    let mut out = String::from("k,m,coef_re,coef_im\n");
    for ((kk, mm), c) in &coeffs {
        if scales.contains(kk) {
            writeln!(out, "{kk},{mm},{:e},{:e}", c.re, c.im).expect("string write");
        }
    }
    writeln!(out, "parseval,,{:e},", coefficient_energy(&coeffs)).expect("string write");
    Ok(out)
}

fn coeffs(
    function: &std::path::Path,
    out: &Option<PathBuf>,
    k: Option<(i64, i64)>,
    m: Option<(i64, i64)>,
    generator: &Option<String>,
    config: &Option<PathBuf>,
) -> Result<i32> {
    let mut cfg = load_config(config)?;
    if let Some(g) = generator {
        cfg.generator = Some(g.clone());
    }
    cfg.validate()?;
    if cfg.primary_domain()? != FiberDomain::Line {
        return Err(Error::Config("coeffs needs a line-fiber generator (DR or a line table)".into()));
    }
    let csv = coeffs_csv(function, k, m, &cfg)?;
    match out {
        Some(p) => write_atomic(p, csv.as_bytes())?,
        None => print!("{csv}"),
    }
    Ok(EXIT_PASS)
}

/// Runs the CLI on an argument list and returns the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    let res = match &cli.command {
        Command::Verify { check, opts } => verify(*check, opts),
        Command::Suite { opts } => suite(opts),
        Command::Coeffs { function, out, k, m, generator, config } => coeffs(function, out, *k, *m, generator, config),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}
