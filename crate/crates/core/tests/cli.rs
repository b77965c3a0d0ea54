use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
        .display()
        .to_string()
}

fn opfrelax(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opfrelax"))
        .args(args)
        .env_remove("OPFRELAX_TOL")
        .output()
        .unwrap()
}

fn ok_json(args: &[&str]) -> Value {
    let out = opfrelax(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn pf_two_bus_matches_hand_solution() {
    let r = ok_json(&["pf", "--case", &data("two_bus.json")]);
    // v₁ from the one-line fixed point ℓ = |−s₁ + zℓ|²
    let (z, s1) = ((0.01f64, 0.02f64), (-0.1f64, -0.05f64));
    let mut ell = 0.0;
    for _ in 0..200 {
        let (p, q) = (-s1.0 + z.0 * ell, -s1.1 + z.1 * ell);
        ell = p * p + q * q;
    }
    let (p, q) = (-s1.0 + z.0 * ell, -s1.1 + z.1 * ell);
    let v1 = 1.0 - 2.0 * (z.0 * p + z.1 * q) + (z.0 * z.0 + z.1 * z.1) * ell;
    assert!((f(&r["v"][1]) - v1).abs() < 1e-10);
    assert!((f(&r["v"][1]) - 0.99599).abs() < 1e-5);
    assert!((f(&r["ell"][0]) - ell).abs() < 1e-10);
    assert!(f(&r["bfm_residual"]) <= 1e-8);
    assert!(f(&r["distflow_residual"]) <= 1e-9);
}

#[test]
fn pf_zero_load_is_flat() {
    let r = ok_json(&["pf", "--case", &data("zero_load.json")]);
    for v in r["voltages"].as_array().unwrap() {
        assert!((f(&v["magnitude"]) - 1.0).abs() < 1e-12);
        assert!(f(&v["angle"]).abs() < 1e-12);
    }
    assert!(r["ell"].as_array().unwrap().iter().all(|l| f(l) == 0.0));
}

#[test]
fn pf_failures_have_distinct_codes() {
    let mesh = opfrelax(&["pf", "--case", &data("ring3.json")]);
    assert_eq!(mesh.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&mesh.stderr).contains("tree"));
    assert_eq!(opfrelax(&["pf", "--case", &data("overload.json")]).status.code(), Some(2));
    assert_eq!(opfrelax(&["pf"]).status.code(), Some(1));
    assert_eq!(opfrelax(&["pf", "--case", "/no/such/file.json"]).status.code(), Some(1));
}

#[test]
fn relax_radial_is_exact_and_models_agree() {
    let a = ok_json(&["relax", "--case", &data("feeder5.json"), "--model", "bfm"]);
    let b = ok_json(&["relax", "--case", &data("feeder5.json"), "--model", "bim"]);
    for r in [&a, &b] {
        assert_eq!(r["verdict"], "exact");
        assert_eq!(r["recovered"], true);
        assert_eq!(r["voltages"].as_array().unwrap().len(), 5);
        assert!(f(&r["bfm_residual"]) <= 1e-7);
    }
    assert!((f(&a["objective"]) - f(&b["objective"])).abs() < 1e-7);

    let g = ok_json(&["relax", "--case", &data("feeder3_boxed.json"), "--cost", "gen", "--model", "bim"]);
    assert_eq!(g["verdict"], "exact");
}

#[test]
fn relax_mesh_reports_a_verdict() {
    for model in ["bfm", "bim"] {
        let r = ok_json(&["relax", "--case", &data("ring3.json"), "--model", model]);
        assert_eq!(r["mesh"], true);
        let verdict = r["verdict"].as_str().unwrap();
        assert!(["exact", "inexact_cone", "inexact_cycle"].contains(&verdict));
        assert!(r["cycle_defects"].is_array());
        assert_eq!(r["recovered"], verdict == "exact");
    }
}

#[test]
fn bounds_monte_carlo_has_no_violations() {
    let args = ["bounds", "--seed", "7", "--instances", "100"];
    let r = ok_json(&args);
    assert_eq!(r["instances"], 100);
    assert_eq!(r["violations"], 0);
    assert_eq!(r["out_of_hypothesis"], 0);
    assert!(f(&r["min_edge_margin"]) >= -1e-9);
    assert!(f(&r["min_bus_margin"]) >= -1e-9);
    assert!(f(&r["max_identity_residual"]) <= 1e-9);
    assert_eq!(opfrelax(&args).stdout, opfrelax(&args).stdout);
}

#[test]
fn bounds_zero_load_is_tight() {
    let r = ok_json(&["bounds", "--case", &data("zero_load.json")]);
    assert_eq!(r["all_tight"], true);
    assert!(r["notes"].as_array().unwrap().iter().any(|n| n == "all bounds tight"));
}

#[test]
fn bounds_with_generation_is_flagged() {
    let r = ok_json(&["bounds", "--seed", "3", "--instances", "20", "--generators"]);
    assert_eq!(r["in_hypothesis"], 0);
    assert_eq!(r["out_of_hypothesis"], 20);
    assert!(r["notes"].as_array().unwrap().iter().any(|n| n.as_str().unwrap().contains("outside")));
}

#[test]
fn chordal_counts_for_both_orderings() {
    let b = ok_json(&["chordal", "--case", &data("fig1.json"), "--ordering", &data("fig1_ordering_b.json")]);
    assert_eq!(b["decoupling_count"], 4);
    assert_eq!(b["chordal"], true);
    let c = ok_json(&["chordal", "--case", &data("fig1.json"), "--ordering", &data("fig1_ordering_c.json")]);
    assert_eq!(c["decoupling_count"], 8);
    assert_eq!(c["clique_sizes"], serde_json::json!([3, 3, 3]));
}

#[test]
fn chordal_trivial_graphs() {
    let tree = ok_json(&["chordal", "--case", &data("feeder5.json")]);
    assert_eq!(tree["fill"].as_array().unwrap().len(), 0);
    assert_eq!(tree["decoupling_count"], 3);
    let k4 = ok_json(&["chordal", "--case", &data("k4.json")]);
    assert_eq!(k4["cliques"], serde_json::json!([[0, 1, 2, 3]]));
    assert_eq!(k4["decoupling_count"], 0);
}

#[test]
fn chordal_writes_sdp_form() {
    let dir = tempfile::tempdir().unwrap();
    let sdp = dir.path().join("sdp.json");
    let r = ok_json(&[
        "chordal",
        "--case",
        &data("fig1.json"),
        "--ordering",
        &data("fig1_ordering_c.json"),
        "--sdp-out",
        sdp.to_str().unwrap(),
    ]);
    assert_eq!(r["sdp_out"], sdp.to_str().unwrap());
    let form: Value = serde_json::from_str(&std::fs::read_to_string(&sdp).unwrap()).unwrap();
    assert_eq!(form["blocks"].as_array().unwrap().len(), 3);
    assert_eq!(form["decoupling"].as_array().unwrap().len(), 8);
}

#[test]
fn out_and_pretty_write_the_same_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = opfrelax(&["pf", "--case", &data("two_bus.json"), "--out", path.to_str().unwrap(), "--pretty"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("\n  \""));
    let compact = ok_json(&["pf", "--case", &data("two_bus.json")]);
    assert_eq!(serde_json::from_str::<Value>(&text).unwrap(), compact);
}

#[test]
fn tolerance_from_environment() {
    let bad = Command::new(env!("CARGO_BIN_EXE_opfrelax"))
        .args(["pf", "--case", &data("two_bus.json")])
        .env("OPFRELAX_TOL", "-1")
        .output()
        .unwrap();
    assert_ne!(bad.status.code(), Some(0));
    let loose = Command::new(env!("CARGO_BIN_EXE_opfrelax"))
        .args(["relax", "--case", &data("two_bus.json")])
        .env("OPFRELAX_TOL", "1e-6")
        .output()
        .unwrap();
    assert_eq!(loose.status.code(), Some(0));
    let r: Value = serde_json::from_slice(&loose.stdout).unwrap();
    assert!(r["solver"]["iterations"].as_u64().unwrap() > 0);
}

#[test]
fn reruns_are_byte_identical() {
    for args in [
        vec!["relax", "--case", "feeder5.json", "--model", "bim"],
        vec!["relax", "--case", "ring3.json"],
        vec!["chordal", "--case", "fig1.json"],
        vec!["pf", "--case", "feeder5.json", "--orientation", "toward"],
    ] {
        let path = data(args[2]);
        let mut a = args.clone();
        a[2] = &path;
        assert_eq!(opfrelax(&a).stdout, opfrelax(&a).stdout);
    }
}
