//! End-to-end tests of the `repro-lifts` binary: exit codes, report files and the coefficient CSV.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use repro_lifts::function::json::FunctionFile;
use repro_lifts::function::{AtomSum, C64};
use repro_lifts::shannon::LazyShannonLift;
use repro_lifts::verify::gram::{l_system, LatticeBox};
use serde_json::Value;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_repro-lifts")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_function(dir: &Path, name: &str, f: &AtomSum) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string(&FunctionFile::from_atoms(f)).unwrap()).unwrap();
    p
}

fn csv_rows(text: &str) -> (Vec<(i64, i64, f64, f64)>, f64) {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k,m,coef_re,coef_im"));
    let mut rows = Vec::new();
    let mut parseval = None;
    for l in lines {
        let cols: Vec<&str> = l.split(',').collect();
        assert_eq!(cols.len(), 4, "{l}");
        if cols[0] == "parseval" {
            parseval = Some(cols[2].parse().unwrap());
        } else {
            rows.push((cols[0].parse().unwrap(), cols[1].parse().unwrap(), cols[2].parse().unwrap(), cols[3].parse().unwrap()));
        }
    }
    (rows, parseval.expect("trailing parseval row"))
}

#[test]
fn planar_intertwining_example_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["verify", "intertwine", "--case", "I", "--alpha", "-0.5", "--elements", "20", "--points", "64", "--tol", "1e-10", "--out", s(dir.path())]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("01-planar_intertwine-I_alpha_-0.5.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["params"]["elements"], 20);
    assert_eq!(report["configHash"].as_str().unwrap().len(), 64);
    let suite: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("suite.json")).unwrap()).unwrap();
    assert_eq!(suite["pass"], true);
}

#[test]
fn gram_example_passes_and_impossible_tolerance_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["verify", "gram", "--rep", "l", "--generator", "DR", "--k", "-2..2", "--m", "-4..4", "--l", "-2..2", "--out", s(dir.path())]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = bin(&["verify", "gram", "--rep", "l", "--generator", "DR", "--tol", "1e-20", "--out", s(dir.path())]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL gram[L]"));
}

#[test]
fn configuration_errors_exit_one() {
    let o = bin(&["verify", "intertwine", "--case", "I", "--alpha", "0"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("alpha=0 invalid for case I"), "{}", stderr(&o));
    assert_eq!(code(&bin(&["verify", "intertwine", "--case", "V"])), 1);
    assert_eq!(code(&bin(&["verify", "gram", "--l", "-1..2"])), 1);
    assert_eq!(code(&bin(&["verify", "gram", "--tol", "-1"])), 1);
    assert_eq!(code(&bin(&["verify", "bogus"])), 1);
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, "{\n  \"seed\": 1,\n  \"nope\": true\n}").unwrap();
    let o = bin(&["suite", "--config", s(&cfg)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("nope"), "{}", stderr(&o));
    fs::write(&cfg, r#"{"cases":[{"case":"I","alpha":0}]}"#).unwrap();
    let o = bin(&["suite", "--config", s(&cfg)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("alpha=0 invalid for case I"));
}

#[test]
fn coefficient_csv() {
    let dir = tempfile::tempdir().unwrap();
    let lift = LazyShannonLift::line();
    let lattice = LatticeBox::new((-1, 1), (-2, 2)).unwrap();
    let sys = l_system(&lift, 41, &lattice).unwrap();

    // a lattice element: one unit coefficient at its own index
    let f = write_function(dir.path(), "basis.json", &sys[7]);
    let out = dir.path().join("basis.csv");
    let o = bin(&["coeffs", "--function", s(&f), "--out", s(&out), "--k", "-1..1", "--m", "-4..4"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (rows, parseval) = csv_rows(&fs::read_to_string(&out).unwrap());
    let (k, m) = lattice.indices()[7];
    let big: Vec<_> = rows.iter().filter(|r| (r.2 * r.2 + r.3 * r.3).sqrt() > 1e-12).collect();
    assert_eq!(big.len(), 1, "{rows:?}");
    assert_eq!((big[0].0, big[0].1), (k, m));
    assert!((big[0].2 - 1.0).abs() < 1e-12 && big[0].3.abs() < 1e-12);
    assert!((parseval - 1.0).abs() < 1e-12);

    // 0.6 and 0.8 on two elements: Parseval row 1
    let mut g = sys[2].scaled(C64::new(0.6, 0.0));
    g.extend(&sys[12].scaled(C64::new(0.8, 0.0)));
    let f = write_function(dir.path(), "combo.json", &g);
    let o = bin(&["coeffs", "--function", s(&f), "--k", "-1..1", "--m", "-4..4"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (_, parseval) = csv_rows(&String::from_utf8_lossy(&o.stdout));
    assert!((parseval - 1.0).abs() < 1e-12, "{parseval}");

    // empty function: header, no rows, Parseval 0
    let f = write_function(dir.path(), "empty.json", &AtomSum::zero());
    let o = bin(&["coeffs", "--function", s(&f)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (rows, parseval) = csv_rows(&String::from_utf8_lossy(&o.stdout));
    assert!(rows.is_empty());
    assert_eq!(parseval, 0.0);

    // scales outside the requested box are an input error
    let f = write_function(dir.path(), "basis2.json", &sys[7]);
    assert_eq!(code(&bin(&["coeffs", "--function", s(&f), "--k", "3..4"])), 1);
}

#[test]
fn shipped_config_runs_cheap_families_deterministically() {
    let shipped = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.json");
    let mut cfg: Value = serde_json::from_str(&fs::read_to_string(&shipped).unwrap()).unwrap();
    cfg["checks"] = serde_json::json!(["gram", "isometry", "intertwine", "charts", "invariance"]);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let run = |out: &str| {
        let out = dir.path().join(out);
        let o = bin(&["suite", "--config", s(&path), "--out", s(&out)]);
        assert_eq!(code(&o), 0, "{}{}", String::from_utf8_lossy(&o.stdout), stderr(&o));
        let v: Value = serde_json::from_str(&fs::read_to_string(out.join("suite.json")).unwrap()).unwrap();
        let mut reports = v["reports"].as_array().unwrap().clone();
        for r in &mut reports {
            r.as_object_mut().unwrap().remove("runtimeSeconds");
        }
        (reports, fs::read_dir(&out).unwrap().count())
    };
    let (a, files) = run("a");
    let (b, _) = run("b");
    assert_eq!(a, b);
    assert_eq!(files, a.len() + 1);
}
