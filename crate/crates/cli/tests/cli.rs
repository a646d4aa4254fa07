use std::path::PathBuf;
use std::process::{Command, Output};

fn dpfib(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dpfib")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn tmp(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

#[test]
fn classify_exceptional_rational() {
    let o = dpfib(&["classify", "--degree", "3", "--n", "3", "--params", "1,0,0,0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("ExceptionalRational"));
}

#[test]
fn classify_invalid_family_is_not_applicable() {
    let o = dpfib(&["classify", "--degree", "2", "--n", "3", "--params", "0,0,0", "--json"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("\"tag\":\"Invalid\""));
}

#[test]
fn enumerate_lists_both_exceptional_families() {
    let o = dpfib(&["enumerate", "--degree", "3", "--n", "3", "--max", "3", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let tags: Vec<serde_json::Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let odd: Vec<&str> = tags
        .iter()
        .map(|v| v["tag"].as_str().unwrap())
        .filter(|t| *t != "NotStablyRationalVG")
        .collect();
    assert_eq!(odd, vec!["ExceptionalRational", "ExceptionalCubicBlowup"]);
}

#[test]
fn basis_of_weighted_plane_example() {
    let spec = tmp("p1123.json");
    std::fs::write(&spec, r#"{"base_dim":1,"twists":[0,0,0,0],"weights":[1,1,2,3]}"#).unwrap();
    let o = dpfib(&["basis", "--spec", spec.to_str().unwrap(), "--bidegree", "0,6", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["count"], 23);
}

#[test]
fn pipeline_writes_versioned_report() {
    let out = tmp("report.json");
    let o = dpfib(&[
        "pipeline", "--degree", "2", "--n", "3", "--params", "0,0,1", "--field", "GF(2^3)", "--seed", "42", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["overall"], "ObstructionWitnessed");
}

#[test]
fn pipeline_exit_codes() {
    let exceptional = dpfib(&["pipeline", "--degree", "3", "--n", "3", "--params", "1,0,0,0", "--field", "GF(9)"]);
    assert_eq!(exceptional.status.code(), Some(3));
    let wrong_char = dpfib(&["pipeline", "--degree", "2", "--n", "3", "--params", "0,0,1", "--field", "GF(9)"]);
    assert_eq!(wrong_char.status.code(), Some(64));
    let sabotaged = dpfib(&[
        "pipeline", "--degree", "2", "--n", "3", "--params", "0,0,1", "--field", "GF(8)", "--max-attempts", "1",
        "--sabotage", "planted_degenerate_point",
    ]);
    assert_eq!(sabotaged.status.code(), Some(2));
    assert!(stdout(&sabotaged).contains("degenerate critical point"));
}

#[test]
fn json_output_is_deterministic() {
    let args = ["pipeline", "--degree", "3", "--n", "3", "--params", "3,0,0,1", "--field", "GF(9)", "--seed", "7", "--json"];
    let a = dpfib(&args);
    let b = dpfib(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let single = Command::new(env!("CARGO_BIN_EXE_dpfib"))
        .args(args)
        .env("DPFIB_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a.stdout, single.stdout);
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(dpfib(&["classify", "--degree", "3", "--bogus", "1"]).status.code(), Some(64));
    assert_eq!(dpfib(&["classify", "--degree", "3", "--n", "3"]).status.code(), Some(64));
    assert_eq!(dpfib(&["crit", "--field", "GF(6)", "--nvars", "1", "--poly", "x0"]).status.code(), Some(64));
    let bad_threads = Command::new(env!("CARGO_BIN_EXE_dpfib"))
        .args(["classify", "--degree", "3", "--n", "3", "--params", "1,0,0,0"])
        .env("DPFIB_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(bad_threads.status.code(), Some(64));
}

#[test]
fn config_values_are_overridden_by_flags() {
    let cfg = tmp("config.json");
    std::fs::write(
        &cfg,
        r#"{"classify":{"degree":3,"n":3,"params":[1,0,0,0]},"restrict":{"case":1,"m":1,"d":3,"field":"GF(16)","samples":5}}"#,
    )
    .unwrap();
    let c = cfg.to_str().unwrap();
    let o = dpfib(&["--config", c, "classify"]);
    assert!(stdout(&o).contains("ExceptionalRational"));
    let o = dpfib(&["--config", c, "classify", "--params", "3,1,1,1"]);
    assert!(stdout(&o).contains("ExceptionalCubicBlowup"));
    // below the bound the restriction map is not surjective
    assert_eq!(dpfib(&["--config", c, "restrict"]).status.code(), Some(0));
    assert_eq!(dpfib(&["--config", c, "restrict", "--delta", "1"]).status.code(), Some(2));
    let bad = tmp("bad_config.json");
    std::fs::write(&bad, r#"{"classify":{"degre":3}}"#).unwrap();
    assert_eq!(dpfib(&["--config", bad.to_str().unwrap(), "classify"]).status.code(), Some(64));
}

#[test]
fn crit_classifies_almost_nondegenerate_point() {
    let o = dpfib(&["crit", "--field", "GF(2)", "--vars", "x,y,z", "--poly", "x^3+y*z", "--point", "0,0,0", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["classification"], "almost_nondegenerate");
}

#[test]
fn crit_on_bundle_charts() {
    let o = dpfib(&[
        "crit", "--field", "GF(4)", "--base-dim", "1", "--twists", "0,0,0", "--weights", "1,1,1", "--poly",
        "u0*x^2+u1*y*z", "--json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    // one census report per weight-one chart
    assert_eq!(stdout(&o).lines().count(), 6);
}

#[test]
fn selftest_subset_passes() {
    let o = dpfib(&["selftest", "--only", "1,3,10"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("[PASS]")).count(), 3);
}
