//! Function interchange format.

use serde::{Deserialize, Serialize};

use super::atom::{AtomSum, FiberFactor, RadialFactor, TensorAtom, C64};
use crate::error::{Error, Result};

pub const FUNCTION_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionFile {
    #[serde(rename = "schemaVersion")]
    pub schema_version: u32,
    #[serde(default)]
    pub atoms: Vec<AtomRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomRecord {
    pub coeff_re: f64,
    #[serde(default)]
    pub coeff_im: f64,
    #[serde(default)]
    pub power: f64,
    /// `[a, b]`; `b = null` means `+∞`.
    pub interval: (f64, Option<f64>),
    #[serde(default)]
    pub lin_phase: f64,
    #[serde(default)]
    pub quad_phase: f64,
    pub fiber: FiberRecord,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberRecord {
    pub kind: FiberKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<(f64, f64)>,
    #[serde(default)]
    pub freq: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FiberKind {
    Line,
    Circle,
    None,
}

impl AtomRecord {
    fn to_atom(&self, index: usize) -> Result<TensorAtom> {
        let fiber = match self.fiber.kind {
            FiberKind::None => FiberFactor::Trivial,
            FiberKind::Line => {
                let (lo, hi) = self.fiber.interval.ok_or_else(|| {
                    Error::InvalidFunction(format!("atoms[{index}].fiber.interval is required for kind Line"))
                })?;
                FiberFactor::Line { lo, hi, freq: self.fiber.freq }
            }
            FiberKind::Circle => {
                if self.fiber.freq.fract() != 0.0 || !self.fiber.freq.is_finite() {
                    return Err(Error::InvalidFunction(format!(
                        "atoms[{index}].fiber.freq must be an integer on the circle, got {}",
                        self.fiber.freq
                    )));
                }
                FiberFactor::Circle { freq: self.fiber.freq as i64 }
            }
        };
        let atom = TensorAtom::new(
            C64::new(self.coeff_re, self.coeff_im),
            RadialFactor {
                power: self.power,
                lo: self.interval.0,
                hi: self.interval.1.unwrap_or(f64::INFINITY),
                lin: self.lin_phase,
                quad: self.quad_phase,
            },
            fiber,
        );
        atom.validate()
            .map_err(|e| Error::InvalidFunction(format!("atoms[{index}]: {e}")))?;
        Ok(atom)
    }

    fn from_atom(a: &TensorAtom) -> Self {
        let fiber = match a.fiber {
            FiberFactor::Trivial => FiberRecord { kind: FiberKind::None, interval: None, freq: 0.0 },
            FiberFactor::Line { lo, hi, freq } => FiberRecord { kind: FiberKind::Line, interval: Some((lo, hi)), freq },
            FiberFactor::Circle { freq } => FiberRecord { kind: FiberKind::Circle, interval: None, freq: freq as f64 },
        };
        AtomRecord {
            coeff_re: a.coeff.re,
            coeff_im: a.coeff.im,
            power: a.radial.power,
            interval: (a.radial.lo, a.radial.hi.is_finite().then_some(a.radial.hi)),
            lin_phase: a.radial.lin,
            quad_phase: a.radial.quad,
            fiber,
        }
    }
}

impl FunctionFile {
    pub fn to_atoms(&self) -> Result<AtomSum> {
        if self.schema_version != FUNCTION_SCHEMA_VERSION {
            return Err(Error::InvalidFunction(format!(
                "schemaVersion {} unsupported (expected {FUNCTION_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let sum: AtomSum = self
            .atoms
            .iter()
            .enumerate()
            .map(|(i, a)| a.to_atom(i))
            .collect::<Result<Vec<_>>>()
            .map(AtomSum::new)?;
        sum.validate()?;
        Ok(sum)
    }

    pub fn from_atoms(f: &AtomSum) -> Self {
        FunctionFile {
            schema_version: FUNCTION_SCHEMA_VERSION,
            atoms: f.atoms.iter().map(AtomRecord::from_atom).collect(),
        }
    }
}

pub fn parse_function(text: &str) -> Result<AtomSum> {
    let file: FunctionFile = serde_json::from_str(text)?;
    file.to_atoms()
}

pub fn load_function(path: &std::path::Path) -> Result<AtomSum> {
    parse_function(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let text = r#"{"schemaVersion":1,"atoms":[
            {"coeff_re":0.6,"coeff_im":0.0,"power":0,"interval":[0.5,1.0],"lin_phase":0,"quad_phase":0,
             "fiber":{"kind":"Line","interval":[0,1],"freq":0}},
            {"coeff_re":0.8,"interval":[0.25,0.5],"fiber":{"kind":"Line","interval":[1,2],"freq":0}}]}"#;
        let f = parse_function(text).unwrap();
        assert_eq!(f.len(), 2);
        let back = serde_json::to_string(&FunctionFile::from_atoms(&f)).unwrap();
        assert_eq!(parse_function(&back).unwrap(), f);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_function(r#"{"schemaVersion":2,"atoms":[]}"#).is_err());
        let bad_interval = r#"{"schemaVersion":1,"atoms":[{"coeff_re":1,"interval":[1,0.5],"fiber":{"kind":"None"}}]}"#;
        assert!(matches!(parse_function(bad_interval), Err(Error::InvalidFunction(_))));
        let bad_circle = r#"{"schemaVersion":1,"atoms":[{"coeff_re":1,"interval":[0,1],"fiber":{"kind":"Circle","freq":0.5}}]}"#;
        assert!(parse_function(bad_circle).is_err());
        let unbounded = r#"{"schemaVersion":1,"atoms":[{"coeff_re":1,"power":-1,"interval":[1,null],"fiber":{"kind":"None"}}]}"#;
        assert!(parse_function(unbounded).is_ok());
    }

    #[test]
    fn empty_function() {
        let f = parse_function(r#"{"schemaVersion":1,"atoms":[]}"#).unwrap();
        assert!(f.is_empty());
    }
}
