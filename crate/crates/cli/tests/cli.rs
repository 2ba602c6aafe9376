use std::path::{Path, PathBuf};
use std::process::Command;

use arakelov_cli::manifest::RunManifest;
use arakelov_cli::{run, EXIT_INVALID, EXIT_OK, EXIT_UNCERTIFIED};
use serde_json::Value;
use tempfile::TempDir;

fn write_map(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

struct Fixture {
    dir: TempDir,
    z2: PathBuf,
    z2m1: PathBuf,
    three: PathBuf,
}

fn fixture() -> Fixture {
    let dir = TempDir::new().unwrap();
    let z2 = write_map(dir.path(), "z2.json", r#"{"d":2,"P":["1","0","0"],"Q":["0","0","1"]}"#);
    let z2m1 = write_map(dir.path(), "m2.json", r#"{"d":2,"P":["1","0","-1"],"Q":["0","0","1"]}"#);
    let three = write_map(dir.path(), "three.json", r#"{"d":2,"P":["3","0","0"],"Q":["0","0","1"]}"#);
    Fixture { dir, z2, z2m1, three }
}

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["arakelov"];
    argv.extend_from_slice(args);
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn resultant_of_monomial_map() {
    let fx = fixture();
    let (code, out, _) = call(&["resultant", "--map", s(&fx.z2)]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "{\"res\":\"1\"}\n");
    let (_, out, _) = call(&["resultant", "--map", s(&fx.three), "--format", "csv"]);
    assert_eq!(out, "res\n9\n");
}

#[test]
fn height_of_two_under_squaring() {
    let fx = fixture();
    let (code, out, _) = call(&["height", "--map", s(&fx.z2), "--point", "[2:1]"]);
    assert_eq!(code, EXIT_OK);
    let v: Value = serde_json::from_str(&out).unwrap();
    let total = v["total"]["value"].as_f64().unwrap();
    assert!((total - 0.693147).abs() < 1e-6);
    assert!(v["total"]["err"].as_f64().unwrap() >= 0.0);
    assert_eq!(v["per_place"][0]["place"], "inf");
}

#[test]
fn orbit_of_zero_under_z2_minus_1() {
    let fx = fixture();
    let (code, out, _) = call(&["orbit", "--map", s(&fx.z2m1), "--point", "[0:1]"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "{\"status\":\"preperiodic\",\"tail\":0,\"cycle\":2}\n");
    let (code, out, _) = call(&["orbit", "--map", s(&fx.z2), "--point", "[2:1]"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("\"escaped\""));
}

#[test]
fn exhausted_orbit_budget_exits_3() {
    let fx = fixture();
    let (code, out, err) = call(&["orbit", "--map", s(&fx.z2m1), "--point", "[1:1]", "--budget", "1"]);
    assert_eq!(code, EXIT_UNCERTIFIED);
    assert!(out.contains("undecided"));
    assert!(err.contains("uncertified"));
}

#[test]
fn minres_certificate_json() {
    let fx = fixture();
    let (code, out, _) = call(&["minres", "--map", s(&fx.three), "--prime", "3"]);
    assert_eq!(code, EXIT_OK);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["p"], 3);
    assert_eq!(v["ord_start"], 2);
    assert_eq!(v["ord_min"], 0);
    assert_eq!(v["conjugator"], serde_json::json!([["3", "0"], ["0", "1"]]));
    assert_eq!(v["method"], "descent");
    let (code, _, _) = call(&["minres", "--map", s(&fx.three), "--prime", "4"]);
    assert_eq!(code, EXIT_INVALID);
}

#[test]
fn green_and_energy_values() {
    let fx = fixture();
    let (_, out, _) = call(&["green", "--map", s(&fx.z2), "--x", "[2:1]", "--y", "[3:1]", "--place", "inf"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!((v["value"].as_f64().unwrap() - 6f64.ln()).abs() < 1e-10);
    assert!(v.get("err").is_some() && v.get("exact").is_some());
    let (_, out, _) = call(&["green", "--map", s(&fx.z2), "--x", "[2:1]", "--y", "[3:1]", "--place", "5"]);
    assert_eq!(out, "{\"value\":0.0,\"err\":0.0,\"exact\":true}\n");
    let (code, out, _) = call(&["energy", "--map", s(&fx.z2), "--point", "[2:1]", "--point", "[3:1]"]);
    assert_eq!(code, EXIT_OK);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!((v["ordered"]["value"].as_f64().unwrap() - 2.0 * 6f64.ln()).abs() < 1e-10);
    assert_eq!(v["identity"]["holds"], true);
    let (code, _, _) = call(&["energy", "--map", s(&fx.z2), "--point", "[2:1]", "--point", "[2:1]"]);
    assert_eq!(code, EXIT_INVALID);
}

#[test]
fn preperiodic_and_census_outputs() {
    let fx = fixture();
    let (code, out, _) = call(&["preperiodic", "--map", s(&fx.z2m1), "--bound", "100", "--format", "csv"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().count(), 5);
    let svg = fx.dir.path().join("census.svg");
    let (code, out, _) =
        call(&["census", "--map", s(&fx.z2), "--bound", "5", "--format", "csv", "--plot", s(&svg)]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().next().unwrap(), "point,weil_h,hhat,hhat_err,preperiodic,tail,cycle");
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
}

#[test]
fn compare_and_milnor() {
    let fx = fixture();
    let (code, out, _) = call(&["compare", "--map", s(&fx.z2), "--map", s(&fx.z2m1)]);
    assert_eq!(code, EXIT_OK);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["rows"][0]["sigma1"], "2");
    assert_eq!(v["rows"][1]["h_res_finite"], 0.0);
    let (_, out, _) = call(&["milnor", "--map", s(&fx.z2m1)]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["sigma3"], "0");
}

#[test]
fn invalid_input_exits_2() {
    let fx = fixture();
    assert_eq!(call(&["bogus"]).0, EXIT_INVALID);
    assert_eq!(call(&["height", "--map", s(&fx.z2), "--point", "[0:0]"]).0, EXIT_INVALID);
    assert_eq!(call(&["height", "--map", s(&fx.z2)]).0, EXIT_INVALID);
    assert_eq!(call(&["height", "--point", "[1:2]"]).0, EXIT_INVALID);
    assert_eq!(call(&["resultant", "--map", "/nonexistent.json"]).0, EXIT_INVALID);
    let bad = write_map(fx.dir.path(), "bad.json", r#"{"d":2,"P":["1","0","0"],"Q":["1","0","0"]}"#);
    assert_eq!(call(&["resultant", "--map", s(&bad)]).0, EXIT_INVALID);
    assert_eq!(call(&["milnor", "--map", s(&fx.z2), "--format", "xml"]).0, EXIT_INVALID);
    assert_eq!(call(&["--help"]).0, EXIT_OK);
}

#[test]
fn output_is_identical_across_thread_counts() {
    let fx = fixture();
    let m1 = fx.dir.path().join("run1.json");
    let base = ["census", "--map", s(&fx.z2m1), "--bound", "12", "--t-fraction", "0.5"];
    let mut a1: Vec<&str> = base.to_vec();
    a1.extend(["--threads", "1", "--manifest", s(&m1)]);
    let (c1, o1, _) = call(&a1);
    let mut a4: Vec<&str> = base.to_vec();
    a4.extend(["--threads", "4"]);
    let (c4, o4, _) = call(&a4);
    assert_eq!((c1, c4), (EXIT_OK, EXIT_OK));
    assert_eq!(o1, o4);

    let m: RunManifest = serde_json::from_str(&std::fs::read_to_string(&m1).unwrap()).unwrap();
    assert_eq!(m.command, "census");
    assert_eq!(m.map_hashes.len(), 1);
    assert_eq!(m.output_digest, arakelov_cli::manifest::digest(o1.as_bytes()));
    let (code, replayed, err) = call(&["replay", "--manifest", s(&m1), "--threads", "4"]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert_eq!(replayed, o1);
}

#[test]
fn binary_reports_exit_codes() {
    let fx = fixture();
    let bin = env!("CARGO_BIN_EXE_arakelov");
    let out = Command::new(bin).args(["resultant", "--map", s(&fx.z2)]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout), "{\"res\":\"1\"}\n");
    let out = Command::new(bin).arg("nonsense").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}
