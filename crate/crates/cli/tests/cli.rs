use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn framelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_framelab"))
        .args(args)
        .env_remove("FRAMELAB_SEED")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn path(name: &str) -> String {
    fixture(name).to_string_lossy().into_owned()
}

#[test]
fn analyze_mercedes_is_tight_with_bound_one() {
    let out = framelab(&["analyze", &path("mercedes.json")]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["lower_bound"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((v["bessel_bound"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(v["is_parseval"], true);
}

#[test]
fn analyze_trivial_inputs() {
    let v = json(&framelab(&["analyze", &path("orthonormal.json")]));
    assert_eq!(v["is_parseval"], true);
    let v = json(&framelab(&["analyze", &path("zero.json")]));
    assert_eq!(v["H_A_dim"], 0);
    let v = json(&framelab(&["analyze", &path("two_blocks.json")]));
    assert!((v["lower_bound"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((v["bessel_bound"].as_f64().unwrap() - 4.0).abs() < 1e-12);
}

#[test]
fn canonical_dual_of_mercedes_is_itself() {
    let v = json(&framelab(&["dual", &path("mercedes.json"), "--canonical"]));
    assert_eq!(v["is_dual"], true);
    let original: Value = serde_json::from_str(&std::fs::read_to_string(fixture("mercedes.json")).unwrap()).unwrap();
    for (dual_block, block) in v["dual"]["blocks"].as_array().unwrap().iter().zip(original["blocks"].as_array().unwrap()) {
        for (d, x) in dual_block["data"].as_array().unwrap().iter().zip(block["data"].as_array().unwrap()) {
            assert!((d[0].as_f64().unwrap() - x.as_f64().unwrap()).abs() < 1e-12);
            assert!(d[1].as_f64().unwrap().abs() < 1e-12);
        }
    }
}

#[test]
fn dual_with_parameter_adds_l() {
    let v = json(&framelab(&["dual", &path("mercedes.json"), "--L", &path("mercedes_L.json")]));
    assert_eq!(v["is_dual"], true);
    // first row of T_A S_A^{-1} is (0, 2/sqrt 6); L adds (0.4, -0.25)
    let first = &v["dual"]["blocks"][0]["data"];
    assert!((first[0][0].as_f64().unwrap() - 0.4).abs() < 1e-12);
    assert!((first[1][0].as_f64().unwrap() - (2.0 / 6f64.sqrt() - 0.25)).abs() < 1e-12);
}

#[test]
fn invalid_parameter_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let l = dir.path().join("l.json");
    std::fs::write(&l, r#"{"rows": 3, "cols": 2, "data": [1, 0, 0, 0, 0, 0]}"#).unwrap();
    let out = framelab(&["dual", &path("mercedes.json"), "--L", l.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn parse_failures_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(framelab(&["analyze", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(framelab(&["analyze", "/no/such/file.json"]).status.code(), Some(2));
    assert_eq!(framelab(&["reproduce", "nope"]).status.code(), Some(2));
    assert_eq!(framelab(&["sweep", "--suite", "nope"]).status.code(), Some(2));
}

#[test]
fn shape_mismatch_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let b = dir.path().join("b.json");
    std::fs::write(&b, r#"{"vectors": [[1, 0], [0, 1]]}"#).unwrap();
    let out = framelab(&["perturb", &path("mercedes.json"), b.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn perturb_mercedes_pair() {
    let out = framelab(&["perturb", &path("mercedes.json"), &path("mercedes_eps_0.1.json")]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["status"], "ok");
    let eps = 0.1f64;
    let delta = 1.0 - (1.0 - eps * eps).sqrt();
    let mu = v["perturbation"]["mu"].as_f64().unwrap();
    assert!((mu - 2.0 * (delta / 3.0).sqrt()).abs() < 1e-10);
    let (lo, hi) = (
        v["perturbation"]["measured_bounds"][0].as_f64().unwrap(),
        v["perturbation"]["measured_bounds"][1].as_f64().unwrap(),
    );
    assert!(lo >= (1.0 - eps).powi(2) - 1e-9 && hi <= (1.0 + eps).powi(2) + 1e-9);
}

#[test]
fn perturb_identical_inputs_has_zero_deviation() {
    let v = json(&framelab(&["perturb", &path("mercedes.json"), &path("mercedes.json")]));
    assert_eq!(v["perturbation"]["mu"].as_f64(), Some(0.0));
    assert_eq!(v["canonical_dual_deviation"]["measured"].as_f64(), Some(0.0));
    assert!(v["stable_dual"]["deviation"]["measured"].as_f64().unwrap() < 1e-14);
}

#[test]
fn fusion_commands() {
    let v = json(&framelab(&["fusion-dual", &path("skew_pair.json"), "--canonical"]));
    assert_eq!(v["ffdual_verify"]["is_dual"], true);
    assert_eq!(v["Q"].as_array().unwrap().len(), 2);
    let v = json(&framelab(&["dual", &path("two_blocks.json")]));
    assert_eq!(v["ffdual_verify"]["is_dual"], true);
    let out = framelab(&["fusion-perturb", &path("orthonormal_lines.json"), &path("orthonormal_lines.json")]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["fusion_stability"]["measured"].as_f64(), Some(0.0));
    assert!(v["fusion_stability"]["C"].as_f64().unwrap() > 0.0);
    assert_eq!(framelab(&["fusion-dual", &path("mercedes.json")]).status.code(), Some(2));
}

#[test]
fn reproduce_examples() {
    for name in ["mercedes", "gavruta-counterexample", "decomposition"] {
        let out = framelab(&["reproduce", name]);
        assert_eq!(out.status.code(), Some(0), "{name}");
        assert_eq!(json(&out)["passed"], true);
    }
}

#[test]
fn output_is_deterministic_and_out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("sweep.json");
    let args = ["sweep", "--suite", "perturbation", "--trials", "8", "--seed", "9"];
    let first = framelab(&args);
    let second = framelab(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    let mut with_out = args.to_vec();
    with_out.extend(["--out", out_path.to_str().unwrap()]);
    let third = framelab(&with_out);
    assert!(third.stdout.is_empty());
    assert_eq!(std::fs::read(&out_path).unwrap(), first.stdout);
}

#[test]
fn seed_falls_back_to_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_framelab"))
        .args(["sweep", "--suite", "pq", "--trials", "3"])
        .env("FRAMELAB_SEED", "123")
        .output()
        .unwrap();
    assert_eq!(json(&out)["seed"], 123);
}

#[test]
fn floats_use_17_significant_digits() {
    let out = framelab(&["analyze", &path("mercedes.json")]);
    let text = String::from_utf8(out.stdout).unwrap();
    let start = text.find("\"lower_bound\":").unwrap() + "\"lower_bound\":".len();
    let token: String = text[start..].chars().take_while(|c| !matches!(c, ',' | '}')).collect();
    let (mantissa, _) = token.split_once('e').expect("exponent form");
    let digits = mantissa.trim_start_matches('-').replace('.', "");
    assert_eq!(digits.len(), 17, "{token}");
}
