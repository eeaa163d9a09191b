//! End-to-end checks of the command-line surface: file format handling,
//! exit-code contract, determinism, and CSV dumps.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_exactode"))
}

fn fixture(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name);
    p.display().to_string()
}

fn run(args: &[&str]) -> (i32, String) {
    let out = bin().args(args).output().expect("binary runs");
    let stdout = String::from_utf8_lossy(&out.stdout).into_owned();
    (out.status.code().unwrap_or(-1), stdout)
}

#[test]
fn check_exit_codes_across_corpus() {
    for (file, expect) in [
        ("example2.ode", 3),
        ("example2_scaled.ode", 0),
        ("linear_example1.ode", 3),
        ("exact_product.ode", 0),
        ("exact_poly.ode", 0),
        ("exact_trig.ode", 0),
        ("oscillator.ode", 3),
        ("notquasilinear.ode", 1),
    ] {
        let (code, out) = run(&["check", &fixture(file)]);
        assert_eq!(code, expect, "{file}: unexpected exit\n{out}");
    }
}

#[test]
fn check_reports_condition_counts() {
    let (_, out) = run(&["check", &fixture("example2.ode")]);
    assert!(out.contains("6 conditions, 3 violated"), "{out}");
    assert!(out.contains("n(n+1)/2"), "metadata note missing:\n{out}");
}

#[test]
fn find_mu_auto_on_corpus() {
    let (code, out) = run(&["find-mu", &fixture("example2.ode")]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("mu = y^(-3)"), "{out}");

    let (code, out) = run(&["find-mu", &fixture("linear_example1.ode")]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("mu = t^(-1)"), "{out}");
    assert!(out.contains("search path: time"), "{out}");

    let (code, out) = run(&["find-mu", &fixture("oscillator.ode")]);
    assert_eq!(code, 4, "{out}");
    assert!(out.contains("NoCandidateCertified"), "{out}");
}

#[test]
fn find_mu_explicit_xi_expression() {
    let (code, out) = run(&["find-mu", &fixture("example2.ode"), "--xi", "expr:y"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("mu = y^(-3)"), "{out}");
}

#[test]
fn reduce_exact_file_needs_no_factor() {
    let (code, out) = run(&["reduce", &fixture("exact_product.ode")]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("first integral: y*y1 = c"), "{out}");
    assert!(!out.contains("integrating factor"), "{out}");
}

#[test]
fn reduce_with_explicit_singular_base_retries() {
    let (code, out) = run(&[
        "reduce",
        &fixture("example2.ode"),
        "--base",
        "t0=0, y0=0, y10=0, y20=0",
    ]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("singular"), "retry note missing:\n{out}");
    assert!(out.contains("retrying"), "retry note missing:\n{out}");
    assert!(out.contains("base point: t0=1, y0=1, y10=1, y20=1"), "{out}");
}

#[test]
fn reduce_respects_good_explicit_base() {
    let (code, out) = run(&[
        "reduce",
        &fixture("example2.ode"),
        "--base",
        "t0=0, y0=1, y10=0, y20=0",
    ]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("first integral: y1 + y2 + t*y^(-2) = c"), "{out}");
}

#[test]
fn json_output_is_byte_deterministic() {
    let args = ["reduce", &fixture("example2.ode"), "--verify", "--json"];
    let (c1, a) = run(&args);
    let (c2, b) = run(&args);
    assert_eq!(c1, 0);
    assert_eq!(c1, c2);
    assert_eq!(a, b, "same input and seed must give identical documents");
    let doc: serde_json::Value = serde_json::from_str(&a).expect("valid json");
    assert_eq!(doc["exit_code"], 0);
    assert_eq!(doc["seed"], 0);
    assert_eq!(doc["factor"]["mu"], "y^(-3)");
}

#[test]
fn seed_flag_changes_probe_details_not_verdicts() {
    let (c1, a) = run(&["check", &fixture("example2.ode"), "--seed", "1", "--json"]);
    let (c2, b) = run(&["check", &fixture("example2.ode"), "--seed", "2", "--json"]);
    assert_eq!(c1, 3);
    assert_eq!(c2, 3);
    let da: serde_json::Value = serde_json::from_str(&a).unwrap();
    let db: serde_json::Value = serde_json::from_str(&b).unwrap();
    assert_eq!(da["exactness"]["violated_count"], db["exactness"]["violated_count"]);
}

#[test]
fn verify_dumps_csv() {
    let dir = std::env::temp_dir().join("exactode_csv_test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("traj.csv");
    let _ = std::fs::remove_file(&path);
    let (code, _) = run(&[
        "verify",
        &fixture("oscillator.ode"),
        "--psi",
        "y^2 + y1^2",
        "--span",
        "1.0",
        "--dump-csv",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(&path).expect("csv written");
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,y,y1,psi");
    assert_eq!(lines.count(), 1001);
}

#[test]
fn verify_requires_an_initial_state() {
    let (code, out) = run(&["verify", &fixture("exact_product.ode"), "--psi", "y*y1"]);
    assert_eq!(code, 1, "{out}");
    assert!(out.contains("MissingBase"), "{out}");
}

#[test]
fn malformed_file_reports_line() {
    let dir = std::env::temp_dir().join("exactode_badfile_test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.ode");
    std::fs::write(&path, "order: 2\nbogus: 1\nequation: y2\n").unwrap();
    let (code, out) = run(&["check", path.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(out.contains("line 2"), "{out}");
}

#[test]
fn parse_error_carries_byte_offset() {
    let dir = std::env::temp_dir().join("exactode_badexpr_test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.ode");
    std::fs::write(&path, "order: 2\nequation: 2t*y2\n").unwrap();
    let (code, out) = run(&["check", path.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(out.contains("implicit multiplication"), "{out}");
    assert!(out.contains("byte 1"), "{out}");
}

#[test]
fn canonical_echo_reparses() {
    // the canonical input echo is itself a valid input file
    let (_, out) = run(&["check", &fixture("example2.ode"), "--json"]);
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    let canonical = doc["input"]["canonical"].as_str().unwrap();
    let dir = std::env::temp_dir().join("exactode_echo_test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("echo.ode");
    std::fs::write(&path, canonical).unwrap();
    let (code, out2) = run(&["check", path.to_str().unwrap(), "--json"]);
    assert_eq!(code, 3);
    let doc2: serde_json::Value = serde_json::from_str(&out2).unwrap();
    assert_eq!(doc["exactness"], doc2["exactness"]);
}

#[test]
fn reduce_verify_on_exact_fixtures() {
    for file in ["exact_poly.ode", "exact_trig.ode", "exact_product.ode"] {
        let (code, out) = run(&["reduce", &fixture(file), "--verify"]);
        assert_eq!(code, 0, "{file}:\n{out}");
        assert!(out.contains("PASS"), "{file}:\n{out}");
        assert!(!out.contains("FAIL"), "{file}:\n{out}");
    }
}

#[test]
fn reduce_partially_closed_exits_four() {
    let dir = std::env::temp_dir().join("exactode_partial_test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("partial.ode");
    std::fs::write(&path, "order: 2\nequation: y2 + exp(t^2)\n").unwrap();
    let (code, out) = run(&["reduce", path.to_str().unwrap()]);
    assert_eq!(code, 4, "{out}");
    assert!(out.contains("partially-closed"), "{out}");
    assert!(out.contains("blocked"), "{out}");
}

#[test]
fn scaled_fixture_uses_its_base_line() {
    let (code, out) = run(&["reduce", &fixture("example2_scaled.ode"), "--json"]);
    assert_eq!(code, 0, "{out}");
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["exactness"]["exact"], true);
    assert_eq!(doc["first_integral"]["psi"], "y1 + y2 + t*y^(-2)");
    assert_eq!(
        doc["first_integral"]["base_point"],
        "t0=0, y0=1, y10=0, y20=0"
    );
}

#[test]
fn find_mu_on_exact_equation_returns_unit() {
    let (code, out) = run(&["find-mu", &fixture("example2_scaled.ode"), "--json"]);
    assert_eq!(code, 0, "{out}");
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["factor"]["mu"], "1");
    assert_eq!(doc["factor"]["search_path"], "already-exact");
}
