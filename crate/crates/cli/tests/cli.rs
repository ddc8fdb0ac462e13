use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wildcover"))
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawning the binary")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

#[test]
fn pord_command() {
    let out = run(&["pord", "--p=3", "t^3+t^6+t^7"]);
    assert!(out.status.success());
    assert_eq!(stdout_json(&out)["pord"], "7");

    // exact p-th powers have no prime-to-p term at all
    let out = run(&["pord", "--p=3", "t^3+t^6"]);
    assert_eq!(stdout_json(&out)["pord"], "inf");

    // a parse error in the expression is an input error
    let out = run(&["pord", "--p=3", "t^^3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("1:3"));
}

#[test]
fn normalize_binomial_cover() {
    let path = fixture("cover_binomial.json");
    let out = run(&["normalize", path.to_str().unwrap()]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["form"]["kind"], "binomial");
    assert_eq!(v["form"]["n"], 3);
    assert_eq!(v["form"]["v_c"], "1/2");

    let out = run(&["different", path.to_str().unwrap()]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["delta"]["base"], "1/2");
    assert_eq!(v["delta"]["slope"], 1);
}

#[test]
fn normalize_mixed_char_tame_cover() {
    let out = run(&["normalize", fixture("cover_kummer_mixed.json").to_str().unwrap()]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["form"]["kind"], "kummer");
    assert_eq!(v["form"]["n"], 2);
}

#[test]
fn validate_and_roundtrip() {
    let morphism = fixture("morphism_frobenius.json");
    let enh = fixture("enhancement_frobenius.json");
    let out = run(&["validate-morphism", morphism.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(stdout_json(&out)["ok"], true);

    let out = run(&[
        "validate-enhancement",
        morphism.to_str().unwrap(),
        enh.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let v = stdout_json(&out);
    assert_eq!(v["s_values"]["c/inf"], -1);
    assert_eq!(v["degree_residuals"]["c"], 0);

    let out = run(&["roundtrip", morphism.to_str().unwrap(), enh.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let v = stdout_json(&out);
    assert_eq!(v["ok"], true);
    assert_eq!(v["edge_monomials"]["c/inf"]["base"], "1/2");
    assert_eq!(v["edge_monomials"]["c/inf"]["slope"], 1);
}

#[test]
fn build_then_verify_plan() {
    let morphism = fixture("morphism_frobenius.json");
    let enh = fixture("enhancement_frobenius.json");
    let built = run(&["build-plan", morphism.to_str().unwrap(), enh.to_str().unwrap()]);
    assert!(built.status.success());
    // identical input gives byte-identical output
    let again = run(&["build-plan", morphism.to_str().unwrap(), enh.to_str().unwrap()]);
    assert_eq!(built.stdout, again.stdout);

    let dir = std::env::temp_dir().join("wildcover-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let plan_path = dir.join("plan.json");
    std::fs::write(&plan_path, &built.stdout).unwrap();
    let out = run(&[
        "verify-plan",
        plan_path.to_str().unwrap(),
        morphism.to_str().unwrap(),
        enh.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(stdout_json(&out)["ok"], true);
}

#[test]
fn invalid_enhancement_is_a_checked_failure() {
    let out = run(&[
        "validate-enhancement",
        fixture("morphism_frobenius.json").to_str().unwrap(),
        fixture("enhancement_zero_delta.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["ok"], false);

    // build-plan refuses unvalidated input with the same status
    let out = run(&[
        "build-plan",
        fixture("morphism_frobenius.json").to_str().unwrap(),
        fixture("enhancement_zero_delta.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn malformed_documents_are_input_errors() {
    let dir = std::env::temp_dir().join("wildcover-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{\"kind\": \"cover\"").unwrap();
    let out = run(&["normalize", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    // unknown payload fields are rejected, not ignored
    let text = std::fs::read_to_string(fixture("cover_binomial.json"))
        .unwrap()
        .replace("\"degree\"", "\"degre\"");
    let unknown = dir.join("unknown.json");
    std::fs::write(&unknown, text).unwrap();
    let out = run(&["normalize", unknown.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["normalize", "/nonexistent/path.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reads_documents_from_stdin() {
    use std::io::Write;
    let text = std::fs::read_to_string(fixture("cover_binomial.json")).unwrap();
    let mut child = bin()
        .args(["normalize", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.as_mut().unwrap().write_all(text.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    assert_eq!(stdout_json(&out)["form"]["n"], 3);
}
