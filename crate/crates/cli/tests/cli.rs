use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_geostatic"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

const SCHWARZSCHILD: &str = r#"{"holes":[{"p":[0,0,0],"alpha":0.5,"beta":0.5}]}"#;
const SMALL_PAIR: &str =
    r#"{"holes":[{"p":[2,0,0],"alpha":5e-6,"beta":5e-6},{"p":[-2,0,0],"alpha":5e-6,"beta":5e-6}]}"#;
const UNEQUAL_PAIR: &str =
    r#"{"holes":[{"p":[1,0,0],"alpha":0.1,"beta":0.3},{"p":[0,0.5,0],"alpha":0.2,"beta":0.4}]}"#;

fn summary(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn masses_of_schwarzschild() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "s.json", SCHWARZSCHILD);
    let out = run(d.path(), &["masses", "s.json"]);
    assert_eq!(out.status.code(), Some(0));
    let s = summary(&out);
    assert_eq!(s["m"], 1.0);
    assert_eq!(s["ends"][0]["m"], 1.0);
    assert_eq!(s["ends"][0]["q"], 0.0);
}

#[test]
fn horizon_of_schwarzschild_with_artifacts() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "s.json", SCHWARZSCHILD);
    let out = run(d.path(), &["horizon", "--config", "s.json", "--center", "0", "--out", "res", "--svg"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let h = &summary(&out)["horizon"];
    assert!((h["mean_radius"].as_f64().unwrap() - 0.5).abs() < 5e-7);
    let area = h["area_g"].as_f64().unwrap();
    assert!((area / (16.0 * std::f64::consts::PI) - 1.0).abs() < 1e-6);

    let res = d.path().join("res");
    let manifest: Value = serde_json::from_str(&fs::read_to_string(res.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "horizon");
    assert_eq!(manifest["constants_source"]["mode"], "default");
    assert_eq!(manifest["tolerances"]["solver"], 1e-9);
    assert!(manifest["extracted_constants"]["c_double_prime"].as_f64().unwrap() > 0.0);
    let csv = fs::read_to_string(res.join("horizon.csv")).unwrap();
    assert!(csv.starts_with("surface,j,k,theta,phi,r,x,y,z\n"));
    assert_eq!(csv.lines().count(), 1 + 64 * 128);
    assert!(fs::read_to_string(res.join("horizon.svg")).unwrap().contains("<polyline"));
}

#[test]
fn outputs_are_byte_identical() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "c.json", UNEQUAL_PAIR);
    let args = ["constraints", "c.json", "--samples", "200", "--seed", "7", "--out", "res"];
    let snapshot = |out: &Output| {
        assert_eq!(out.status.code(), Some(0));
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(d.path().join("res"))
            .unwrap()
            .map(|e| e.unwrap())
            .map(|e| (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap()))
            .collect();
        files.sort();
        (out.stdout.clone(), files)
    };
    let first = snapshot(&run(d.path(), &args));
    fs::remove_dir_all(d.path().join("res")).unwrap();
    let second = snapshot(&run(d.path(), &args));
    assert_eq!(first, second);
    assert_eq!(first.1.len(), 3);
}

#[test]
fn inversion_writes_targets() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "c.json", UNEQUAL_PAIR);
    let out = run(d.path(), &["invert", "c.json", "--out", "res"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for p in 0..2 {
        let t = fs::read_to_string(d.path().join(format!("res/inverted_{p}.json"))).unwrap();
        let back = run(d.path(), &["masses", &format!("res/inverted_{p}.json")]);
        assert_eq!(back.status.code(), Some(0), "{t}");
    }
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "pair.json", SMALL_PAIR);
    write(d.path(), "bad.json", r#"{"holes":[{"p":[0,0,0],"alpha":-1,"beta":0.5}]}"#);
    write(d.path(), "broken.json", "{\n  \"holes\": [\n    {\"p\": [0, 0]}\n  ]\n}");

    assert_eq!(run(d.path(), &["frobnicate"]).status.code(), Some(4));
    assert_eq!(run(d.path(), &["masses"]).status.code(), Some(4));
    let bad = run(d.path(), &["masses", "bad.json"]);
    assert_eq!(bad.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("hole 0: alpha = -1"));
    let broken = run(d.path(), &["masses", "broken.json"]);
    assert_eq!(broken.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&broken.stderr).contains("line 3"));

    let gate = run(d.path(), &["flat-distance", "pair.json", "--R", "10", "--eps", "0.3"]);
    assert_eq!(gate.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&gate.stderr).contains("eps0"));

    // No minimal surface encloses an empty point, so the flow collapses.
    let empty = run(d.path(), &["horizon", "pair.json", "--center", "5,5,5", "--init", "0.1"]);
    assert_eq!(empty.status.code(), Some(3), "{}", String::from_utf8_lossy(&empty.stderr));
}

#[test]
fn auto_constants_are_recorded() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "s.json", SCHWARZSCHILD);
    let out = run(d.path(), &["locate", "s.json", "--kappa", "auto", "--out", "res"]);
    assert!(matches!(out.status.code(), Some(0 | 2)), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: Value = serde_json::from_str(&fs::read_to_string(d.path().join("res/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["constants_source"]["mode"], "auto");
    assert_eq!(manifest["constants"]["source"], "auto");
}

#[test]
fn converge_table_columns() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "seq.json", r#"{"positions":[[2,0,0],[-2,0,0]],"alpha":0.25,"beta":0.25,"k_min":3,"k_max":5}"#);
    let out = run(d.path(), &["converge", "seq.json", "--R", "10", "--points", "50000", "--pairs", "40", "--out", "res", "--svg"]);
    assert!(matches!(out.status.code(), Some(0 | 1)), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(d.path().join("res/converge.csv")).unwrap();
    let mut r = csv::Reader::from_reader(csv.as_bytes());
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header,
        ["k", "m", "sigma", "eps", "lambda_numeric", "lambda_analytic", "dF_numeric", "dF_envelope", "dDF_numeric"]
    );
    let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 3);
    // k = 3 has no feasible eps, so its estimate columns are empty.
    assert_eq!(&rows[0][3], "");
    assert!(rows[1][6].parse::<f64>().unwrap() > 0.0);
    assert!(fs::read_to_string(d.path().join("res/converge.svg")).unwrap().contains("dF numeric"));
}
