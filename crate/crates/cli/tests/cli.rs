use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const SCENARIOS: [&str; 10] = [
    "theorem-1-1",
    "theorem-1-2",
    "prop-equiv",
    "prop-concave",
    "corollary-slab",
    "prop-rouge",
    "hm",
    "dancs-uhrin",
    "ce-power",
    "parallel-corollary",
];

fn bmlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bmlab"))
        .args(args)
        .output()
        .expect("spawn bmlab")
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(format!("{name}.json"))
}

fn scratch() -> TempDir {
    tempfile::tempdir().unwrap()
}

fn run_to(name: &str, dir: &Path) -> Output {
    bmlab(&["--scenario", scenario(name).to_str().unwrap(), "--out", dir.to_str().unwrap()])
}

/// Numbers agree to `rel` relative (or `abs` absolute); everything else exactly.
fn same(got: &Value, want: &Value, path: &str, rel: f64, abs: f64) -> Result<(), String> {
    match (got, want) {
        (Value::Number(g), Value::Number(w)) => {
            let (g, w) = (g.as_f64().unwrap(), w.as_f64().unwrap());
            if (g - w).abs() <= abs + rel * w.abs() {
                Ok(())
            } else {
                Err(format!("{path}: {g} vs {w}"))
            }
        }
        (Value::Object(g), Value::Object(w)) => {
            if g.keys().ne(w.keys()) {
                return Err(format!("{path}: keys differ"));
            }
            for (k, wv) in w {
                same(&g[k], wv, &format!("{path}.{k}"), rel, abs)?;
            }
            Ok(())
        }
        (Value::Array(g), Value::Array(w)) => {
            if g.len() != w.len() {
                return Err(format!("{path}: lengths differ"));
            }
            for (i, (gv, wv)) in g.iter().zip(w).enumerate() {
                same(gv, wv, &format!("{path}[{i}]"), rel, abs)?;
            }
            Ok(())
        }
        _ if got == want => Ok(()),
        _ => Err(format!("{path}: {got} vs {want}")),
    }
}

#[test]
fn corpus_round_trip() {
    let tmp = scratch();
    let dir = tmp.path();
    for name in SCENARIOS {
        let out = run_to(name, dir);
        let code = out.status.code().unwrap();
        assert!(code == 0 || code == 1, "{name}: {}", String::from_utf8_lossy(&out.stderr));
        let got: Value = serde_json::from_str(&fs::read_to_string(dir.join(format!("{name}.json"))).unwrap()).unwrap();
        let expected = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/expected").join(format!("{name}.json"));
        let want: Value = serde_json::from_str(&fs::read_to_string(expected).unwrap()).unwrap();
        // reruns on other platforms may differ in the last bits of libm
        same(&got, &want, name, 1e-9, 1e-12).unwrap();
        let verdict = got["report"]["verdict"].as_str().unwrap();
        assert_eq!(code == 1, verdict == "violation", "{name}: exit {code} with verdict {verdict}");
    }
}

#[test]
fn exit_codes() {
    let tmp = scratch();
    let dir = tmp.path();
    assert_eq!(run_to("ce-power", dir).status.code(), Some(1));
    assert_eq!(run_to("theorem-1-2", dir).status.code(), Some(0));
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.join("theorem-1-2.json")).unwrap()).unwrap();
    assert_eq!(report["report"]["verdict"], "pass");

    let bad = dir.join("no-measure.json");
    fs::write(&bad, r#"{"command": "check-bm", "s": 0.5, "sets": []}"#).unwrap();
    let out = bmlab(&["--scenario", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("measure"));
}

#[test]
fn malformed_json_reports_position() {
    let tmp = scratch();
    let dir = tmp.path();
    let bad = dir.join("bad.json");
    fs::write(&bad, "{\n  \"command\": \"check-bm\",\n  \"s\": 0.5,,\n}").unwrap();
    let out = bmlab(&["--scenario", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");

    fs::write(&bad, r#"{"command": "check-bm", "sigma": 1}"#).unwrap();
    let out = bmlab(&["--scenario", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sigma"));
}

#[test]
fn power_subcommand_records_a() {
    let out = bmlab(&["counterexample", "power", "--s", "0.5", "--r", "1.0", "--b", "1.0"]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let a = v["report"]["witness"]["a"].as_f64().unwrap();
    assert!(a > 0.0 && a < 1.0);
    assert!(v["report"]["worst_deficit"].as_f64().unwrap() <= -0.03);
    assert_eq!(v["extras"]["search"]["certified"], true);
}

#[test]
fn reruns_are_byte_identical() {
    let (t1, t2) = (scratch(), scratch());
    let (d1, d2) = (t1.path(), t2.path());
    for name in ["prop-equiv", "parallel-corollary", "hm"] {
        run_to(name, d1);
        run_to(name, d2);
        for ext in ["json", "csv"] {
            let f = format!("{name}.{ext}");
            if d1.join(&f).exists() {
                assert_eq!(fs::read(d1.join(&f)).unwrap(), fs::read(d2.join(&f)).unwrap(), "{f}");
            }
        }
    }
    // the thread count does not change the output
    let t3 = scratch();
    let d3 = t3.path();
    let out = Command::new(env!("CARGO_BIN_EXE_bmlab"))
        .args(["--scenario", scenario("prop-equiv").to_str().unwrap(), "--out", d3.to_str().unwrap()])
        .env("BMLAB_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(fs::read(d1.join("prop-equiv.json")).unwrap(), fs::read(d3.join("prop-equiv.json")).unwrap());
}

#[test]
fn curve_of_41_points_has_42_lines() {
    let tmp = scratch();
    let dir = tmp.path();
    run_to("parallel-corollary", dir);
    let csv = fs::read_to_string(dir.join("parallel-corollary.csv")).unwrap();
    assert_eq!(csv.lines().count(), 42);
    assert_eq!(csv.lines().next(), Some("t,value,cumulative_deficit"));

    let out = bmlab(&[
        "parallel",
        "--measure",
        "lebesgue",
        "--A",
        r#"{"kind": "polygon", "vertices": [[0, 0], [1, 0], [0, 1]]}"#,
        "--B",
        r#"{"kind": "regular-polygon"}"#,
        "--t",
        "0:2:0.05",
        "--s",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(csv.lines().count(), 42);
    // the area at t = 0.5 is close to the Steiner value
    let row: Vec<f64> = csv.lines().nth(11).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(row[0], 0.5);
    let steiner = 0.5 + (2.0 + 2f64.sqrt()) * 0.5 + std::f64::consts::PI * 0.25;
    assert!((row[1] / steiner - 1.0).abs() < 0.01);
}

#[test]
fn vacuous_report_has_reason() {
    let tmp = scratch();
    let dir = tmp.path();
    let f = dir.join("away.json");
    // A does not contain the origin
    fs::write(
        &f,
        r#"{"command": "scan-dilates", "measure": {"kind": "gaussian-standard", "dimension": 2},
            "sets": [{"kind": "polygon", "vertices": [[1, 1], [2, 1], [1, 2]]}], "t_grid": "0.5:2:0.5"}"#,
    )
    .unwrap();
    let out = bmlab(&["--scenario", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["report"]["verdict"], "vacuous");
    assert!(v["report"]["reason"].as_str().unwrap().contains("0"));
    assert!(v["report"]["worst_deficit"].is_null());
}

#[test]
fn grid_flags_override_the_scenario() {
    let out = bmlab(&[
        "--scenario",
        scenario("theorem-1-2").to_str().unwrap(),
        "--lambda-grid",
        "0.5:0.5:0.1",
        "--rel-tol",
        "1e-10",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    // a single node leaves no bracket to refine
    assert_eq!(v["report"]["samples"].as_u64(), Some(1));
    assert_eq!(v["report"]["witness"]["lambda"].as_f64(), Some(0.5));

    let out = bmlab(&["--scenario", scenario("theorem-1-2").to_str().unwrap(), "--lambda-grid", "1:0:0.1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn search_is_exploratory() {
    let out = bmlab(&[
        "counterexample",
        "search",
        "--family",
        "triangle",
        "--measure",
        "exp-product",
        "--s",
        "0.5",
        "--seed",
        "7",
        "--budget",
        "400",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["extras"]["exploratory"], true);
    assert_eq!(v["extras"]["seed"].as_u64(), Some(7));
    assert!(v["extras"]["params"].as_object().unwrap().len() == 10);
}
