//! Verification reports and deterministic defect aggregation.

use std::sync::OnceLock;
use std::time::Instant;

use rayon::prelude::*;
use rayon::ThreadPool;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// One check's outcome; `pass ⇔ maxDefect ≤ tolerance` (a NaN defect fails).
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Report {
    #[serde(rename = "schemaVersion")]
    pub schema_version: u32,
    pub check: String,
    pub case: String,
    pub params: Value,
    #[serde(rename = "maxDefect")]
    pub max_defect: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub samples: u64,
    #[serde(rename = "runtimeSeconds")]
    pub runtime_seconds: f64,
    pub notes: String,
    #[serde(rename = "configHash")]
    pub config_hash: String,
    pub workers: usize,
}

impl Report {
    pub fn new(check: &str, case: &str, params: Value, defect: &Defect, tolerance: f64, started: Instant) -> Self {
        let max_defect = defect.max;
        Report {
            schema_version: REPORT_SCHEMA_VERSION,
            check: check.to_string(),
            case: case.to_string(),
            params,
            max_defect,
            tolerance,
            pass: max_defect <= tolerance,
            samples: defect.count,
            runtime_seconds: started.elapsed().as_secs_f64(),
            notes: String::new(),
            config_hash: String::new(),
            workers: workers(),
        }
    }

    /// A failing report for a check that could not complete.
    pub fn from_error(check: &str, case: &str, params: Value, tolerance: f64, err: &Error, started: Instant) -> Self {
        let d = Defect { max: f64::NAN, count: 0 };
        Report::new(check, case, params, &d, tolerance, started).with_notes(format!("error: {err}"))
    }

    pub fn with_notes(mut self, notes: impl Into<String>) -> Self {
        self.notes = notes.into();
        self
    }

    /// JSON value without the runtime field; identical across reruns.
    pub fn body(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Value::Object(m) = &mut v {
            m.remove("runtimeSeconds");
        }
        v
    }

    /// `PASS check[case] maxDefect=… tol=… (…s)`.
    pub fn summary_line(&self) -> String {
        format!(
            "{} {}[{}] maxDefect={:.3e} tol={:.1e} samples={} ({:.2}s)",
            if self.pass { "PASS" } else { "FAIL" },
            self.check,
            self.case,
            self.max_defect,
            self.tolerance,
            self.samples,
            self.runtime_seconds
        )
    }
}

/// Running maximum of absolute defects that propagates NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Defect {
    pub max: f64,
    pub count: u64,
}

impl Default for Defect {
    fn default() -> Self {
        Defect { max: 0.0, count: 0 }
    }
}

impl Defect {
    pub fn push(&mut self, d: f64) {
        self.count += 1;
        if d.is_nan() || self.max.is_nan() {
            self.max = f64::NAN;
        } else if d > self.max {
            self.max = d;
        }
    }

    pub fn merge(&mut self, other: &Defect) {
        let n = self.count;
        self.push(other.max);
        self.count = n + other.count;
    }

    pub fn from_values(values: impl IntoIterator<Item = f64>) -> Self {
        let mut d = Defect::default();
        for v in values {
            d.push(v);
        }
        d
    }
}

/// Worker count: `LIFTS_WORKERS` if set to a positive integer, otherwise the number of CPUs.
pub fn workers() -> usize {
    pool().current_num_threads()
}

fn pool() -> &'static ThreadPool {
    static POOL: OnceLock<ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let n = std::env::var("LIFTS_WORKERS")
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&n| n > 0)
            .unwrap_or(0);
        rayon::ThreadPoolBuilder::new().num_threads(n).build().expect("thread pool")
    })
}

/// Ordered parallel map; results come back in input order regardless of scheduling.
pub fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    pool().install(|| items.par_iter().map(&f).collect())
}

/// Ordered parallel map over fallible work; the first error in input order wins.
pub fn try_par_map<T, R, F>(items: &[T], f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync + Send,
{
    par_map(items, f).into_iter().collect()
}

pub(crate) fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("tolerance must be positive and finite, got {tol}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defect_propagates_nan() {
        let d = Defect::from_values([1e-3, f64::NAN, 2.0]);
        assert!(d.max.is_nan());
        assert_eq!(d.count, 3);
        let r = Report::new("x", "L", Value::Null, &d, 1.0, Instant::now());
        assert!(!r.pass);
    }

    #[test]
    fn pass_iff_within_tolerance() {
        let d = Defect::from_values([1e-13, 5e-13]);
        assert!(Report::new("x", "L", Value::Null, &d, 1e-12, Instant::now()).pass);
        assert!(!Report::new("x", "L", Value::Null, &d, 1e-13, Instant::now()).pass);
        let body = Report::new("x", "L", Value::Null, &d, 1e-12, Instant::now()).body();
        assert!(body.get("runtimeSeconds").is_none());
        assert!(body.get("maxDefect").is_some());
    }

    #[test]
    fn ordered_map() {
        let v: Vec<u64> = (0..1000).collect();
        let out = par_map(&v, |x| x * x);
        assert!(out.iter().enumerate().all(|(i, &y)| y == (i * i) as u64));
    }
}
