//! Run configuration: validated before any computation, hashed into every report.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::function::FiberDomain;
use crate::group::{CaseKind, CaseTag};
use crate::shannon::{Bijection, CanonicalDR, CanonicalDT, LazyShannonLift, TableBijection};
use crate::verify::gram::LatticeBox;

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// Check families the suite can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum CheckName {
    /// Orthonormality of the l-side lattice system.
    Gram,
    /// q-side Gram by transfer through `U`, plus quadrature spot checks.
    QGram,
    /// Planar-case Gram through the equivalence chain.
    JGram,
    /// Operator Gram `(ln 2)·I` of the continuous transform.
    Isometry,
    /// Sampled discrete isometry.
    Discrete,
    /// Band-limited sampling identity.
    Bandlimited,
    /// Bessel sequence and Parseval sums on the l-side.
    Parseval,
    /// Pointwise intertwining of the one-dimensional actions and unitarity of `U`.
    Intertwine,
    /// Pointwise intertwining of the planar actions.
    PlanarIntertwine,
    /// Chart round-trips and Jacobians.
    Charts,
    /// Dilation invariance of the second chart coordinate.
    Invariance,
    /// Kernel-table Gram.
    Kernel,
}

impl CheckName {
    pub const ALL: [CheckName; 12] = [
        CheckName::Gram,
        CheckName::QGram,
        CheckName::JGram,
        CheckName::Isometry,
        CheckName::Discrete,
        CheckName::Bandlimited,
        CheckName::Parseval,
        CheckName::Intertwine,
        CheckName::PlanarIntertwine,
        CheckName::Charts,
        CheckName::Invariance,
        CheckName::Kernel,
    ];
}

/// One-dimensional sides, for checks that run on both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RepName {
    L,
    Q,
}

/// A case entry as written in the config: `{"case": "I", "alpha": -0.5}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseSpec {
    pub case: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

impl CaseSpec {
    pub fn new(case: &str, alpha: Option<f64>) -> Self {
        CaseSpec { case: case.to_string(), alpha }
    }

    pub fn tag(&self) -> Result<CaseTag> {
        CaseTag::new(self.case.parse::<CaseKind>()?, self.alpha)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase", default)]
pub struct Samples {
    pub line_elements: usize,
    pub line_points: usize,
    pub unitarity_functions: usize,
    pub intertwine_elements: usize,
    pub intertwine_points: usize,
    pub chart_points: usize,
    pub jacobian_points: usize,
    pub jacobian_step: f64,
    pub invariance_points: usize,
    pub discrete_xi: usize,
    /// ξ samples for the planar kernels, which need quadrature per sample.
    pub discrete_xi_planar: usize,
    pub discrete_random_pairs: usize,
    pub spot_checks: usize,
}

impl Default for Samples {
    fn default() -> Self {
        Samples {
            line_elements: 20,
            line_points: 64,
            unitarity_functions: 6,
            intertwine_elements: 20,
            intertwine_points: 64,
            chart_points: 500,
            jacobian_points: 100,
            jacobian_step: 1e-5,
            invariance_points: 200,
            discrete_xi: 256,
            discrete_xi_planar: 32,
            discrete_random_pairs: 3,
            spot_checks: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase", default)]
pub struct Tolerances {
    pub gram: f64,
    pub q_gram: f64,
    pub spot_check: f64,
    pub j_gram: f64,
    pub isometry: f64,
    pub discrete_l: f64,
    pub discrete_q: f64,
    pub discrete_j: f64,
    pub bandlimited: f64,
    pub parseval: f64,
    pub line_intertwine: f64,
    pub unitarity: f64,
    pub planar_intertwine: f64,
    pub roundtrip: f64,
    pub jacobian: f64,
    pub invariance: f64,
    pub kernel: f64,
    /// Kernel tolerance for case I at α = −1, where the kernel involves no chart distortion.
    pub kernel_exact: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            gram: 1e-12,
            q_gram: 1e-12,
            spot_check: 1e-8,
            j_gram: 1e-10,
            isometry: 1e-12,
            discrete_l: 1e-12,
            discrete_q: 1e-10,
            discrete_j: 1e-10,
            bandlimited: 1e-8,
            parseval: 1e-12,
            line_intertwine: 1e-12,
            unitarity: 1e-10,
            planar_intertwine: 1e-10,
            roundtrip: 1e-14,
            jacobian: 1e-6,
            invariance: 1e-12,
            kernel: 1e-10,
            kernel_exact: 1e-12,
        }
    }
}

/// Everything a run needs; see `configs/default.json` for the shipped values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase", default)]
pub struct RunConfig {
    pub schema_version: u32,
    pub seed: u64,
    /// Directory receiving per-check reports and the aggregated `suite.json`.
    pub output: PathBuf,
    pub checks: Vec<CheckName>,
    pub cases: Vec<CaseSpec>,
    pub reps: Vec<RepName>,
    /// `"DR"`, `"DT"` or a path to a bijection table; `DR` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    pub lattice: LatticeBox,
    /// Fiber box `|k|,|l| ≤ b` for the Gram checks.
    pub fiber_box: i64,
    pub isometry_box: i64,
    pub kernel_box: i64,
    /// Nested `|m| ≤ M` boxes for the Bessel sequence.
    pub parseval_boxes: Vec<i64>,
    /// Optional function file checked for Parseval in the `lattice` box.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub function: Option<PathBuf>,
    pub samples: Samples,
    pub tolerances: Tolerances,
}

pub fn default_cases() -> Vec<CaseSpec> {
    let mut v = vec![CaseSpec::new("I", Some(-1.0)), CaseSpec::new("I", Some(-0.5)), CaseSpec::new("I", Some(-0.1))];
    v.push(CaseSpec::new("II", None));
    for kind in ["III", "IV"] {
        for a in [0.0, 0.7, 2.0] {
            v.push(CaseSpec::new(kind, Some(a)));
        }
    }
    v
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema_version: CONFIG_SCHEMA_VERSION,
            seed: 20_240_917,
            output: PathBuf::from("reports"),
            checks: CheckName::ALL.to_vec(),
            cases: default_cases(),
            reps: vec![RepName::L, RepName::Q],
            generator: None,
            lattice: LatticeBox { k: (-2, 2), m: (-4, 4) },
            fiber_box: 2,
            isometry_box: 3,
            kernel_box: 3,
            parseval_boxes: vec![1, 3, 7, 15, 31],
            function: None,
            samples: Samples::default(),
            tolerances: Tolerances::default(),
        }
    }
}

impl RunConfig {
    /// Parses and validates a JSON config; parse errors carry line and column.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        RunConfig::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schemaVersion {} unsupported (expected {CONFIG_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.case_tags()?;
        LatticeBox::new(self.lattice.k, self.lattice.m)?;
        for (name, b) in [("fiberBox", self.fiber_box), ("isometryBox", self.isometry_box), ("kernelBox", self.kernel_box)] {
            if !(0..=20).contains(&b) {
                return Err(Error::Config(format!("{name} must be in 0..=20, got {b}")));
            }
        }
        if self.parseval_boxes.is_empty() || self.parseval_boxes.iter().any(|&m| m < 0) {
            return Err(Error::Config("parsevalBoxes must be a non-empty list of nonnegative bounds".into()));
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("gram", t.gram),
            ("qGram", t.q_gram),
            ("spotCheck", t.spot_check),
            ("jGram", t.j_gram),
            ("isometry", t.isometry),
            ("discreteL", t.discrete_l),
            ("discreteQ", t.discrete_q),
            ("discreteJ", t.discrete_j),
            ("bandlimited", t.bandlimited),
            ("parseval", t.parseval),
            ("lineIntertwine", t.line_intertwine),
            ("unitarity", t.unitarity),
            ("planarIntertwine", t.planar_intertwine),
            ("roundtrip", t.roundtrip),
            ("jacobian", t.jacobian),
            ("invariance", t.invariance),
            ("kernel", t.kernel),
            ("kernelExact", t.kernel_exact),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("tolerances.{name} must be positive and finite, got {v}")));
            }
        }
        let s = &self.samples;
        for (name, v) in [
            ("lineElements", s.line_elements),
            ("linePoints", s.line_points),
            ("unitarityFunctions", s.unitarity_functions),
            ("intertwineElements", s.intertwine_elements),
            ("intertwinePoints", s.intertwine_points),
            ("chartPoints", s.chart_points),
            ("jacobianPoints", s.jacobian_points),
            ("invariancePoints", s.invariance_points),
            ("discreteXi", s.discrete_xi),
            ("discreteXiPlanar", s.discrete_xi_planar),
            ("spotChecks", s.spot_checks),
        ] {
            if v == 0 {
                return Err(Error::Config(format!("samples.{name} must be positive")));
            }
        }
        if !(s.jacobian_step > 0.0 && s.jacobian_step < 0.1) {
            return Err(Error::Config(format!("samples.jacobianStep must be in (0, 0.1), got {}", s.jacobian_step)));
        }
        self.primary_domain()?;
        Ok(())
    }

    pub fn case_tags(&self) -> Result<Vec<CaseTag>> {
        self.cases.iter().map(CaseSpec::tag).collect()
    }

    fn table(&self, path: &Path) -> Result<TableBijection> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read bijection table {}: {e}", path.display())))?;
        TableBijection::parse(&text)
    }

    fn configured_table(&self) -> Result<Option<TableBijection>> {
        match self.generator.as_deref() {
            None | Some("DR") | Some("DT") => Ok(None),
            Some(p) => self.table(Path::new(p)).map(Some),
        }
    }

    /// Fiber domain of the configured generator; the one-dimensional checks run on it.
    pub fn primary_domain(&self) -> Result<FiberDomain> {
        Ok(match self.generator.as_deref() {
            None | Some("DR") => FiberDomain::Line,
            Some("DT") => FiberDomain::Circle,
            Some(_) => self.configured_table()?.expect("table path").domain(),
        })
    }

    /// The Shannon lift for a fiber domain: the configured table when it matches the domain,
    /// else the canonical bijection.
    pub fn lift(&self, domain: FiberDomain) -> Result<LazyShannonLift> {
        if let Some(t) = self.configured_table()? {
            if t.domain() == domain {
                return Ok(LazyShannonLift::new(Arc::new(t)));
            }
        }
        Ok(match domain {
            FiberDomain::Line => LazyShannonLift::new(Arc::new(CanonicalDR)),
            FiberDomain::Circle => LazyShannonLift::new(Arc::new(CanonicalDT)),
        })
    }

    /// Label for the generator in use on a domain.
    pub fn generator_label(&self, domain: FiberDomain) -> String {
        match (self.generator.as_deref(), domain) {
            (Some(p), _) if p != "DR" && p != "DT" && self.primary_domain().ok() == Some(domain) => format!("table:{p}"),
            (_, FiberDomain::Line) => "DR".into(),
            (_, FiberDomain::Circle) => "DT".into(),
        }
    }

    /// SHA-256 of the canonical JSON form (sorted keys, no whitespace), without `output`,
    /// which decides where reports go but not what they contain.
    pub fn hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let serde_json::Value::Object(m) = &mut v {
            m.remove("output");
        }
        let canonical = serde_json::to_string(&v).expect("value serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        let c = RunConfig::default();
        c.validate().unwrap();
        let text = serde_json::to_string_pretty(&c).unwrap();
        let back = RunConfig::parse(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
        assert_eq!(c.hash().len(), 64);
    }

    #[test]
    fn partial_config_fills_defaults() {
        let c = RunConfig::parse(r#"{"schemaVersion":1,"seed":5,"cases":[{"case":"I","alpha":-0.5}]}"#).unwrap();
        assert_eq!(c.seed, 5);
        assert_eq!(c.cases.len(), 1);
        assert_eq!(c.tolerances, Tolerances::default());
        assert_ne!(c.hash(), RunConfig::default().hash());
        let moved = RunConfig { output: "elsewhere".into(), ..c.clone() };
        assert_eq!(moved.hash(), c.hash());
    }

    #[test]
    fn validation_errors() {
        let e = RunConfig::parse(r#"{"cases":[{"case":"I","alpha":0}]}"#).unwrap_err();
        assert!(e.to_string().contains("alpha=0 invalid for case I"), "{e}");
        assert!(matches!(RunConfig::parse(r#"{"cases":[{"case":"V"}]}"#), Err(Error::InvalidCase(_))));
        assert!(matches!(RunConfig::parse(r#"{"bogus":1}"#), Err(Error::Config(_))));
        let e = RunConfig::parse("{\n  \"seed\": \"x\"\n}").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        assert!(RunConfig::parse(r#"{"tolerances":{"gram":-1}}"#).is_err());
        assert!(RunConfig::parse(r#"{"lattice":{"k":[2,1],"m":[0,0]}}"#).is_err());
        assert!(RunConfig::parse(r#"{"schemaVersion":2}"#).is_err());
    }
}
