use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_kochenlab"));
    c.env_remove("KOCHENLAB_BUDGET");
    c
}

fn schema_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{name}.json"))
}

fn check_schema(name: &str, v: &Value) {
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(schema_path(name)).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(v).map(|e| format!("{e} at {}", e.instance_path())).collect();
    assert!(errors.is_empty(), "{name} schema: {errors:?}\n{v}");
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

/// Runs a command expected to succeed and validates stdout against a schema.
fn ok(schema: &str, args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} exited {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    check_schema(schema, &v);
    v
}

fn err(args: &[&str]) -> (i32, Value) {
    let out = run(args);
    let code = out.status.code().unwrap();
    let v: Value = serde_json::from_slice(&out.stderr).unwrap();
    check_schema("error", &v);
    assert_eq!(v["exit_code"], json!(code));
    (code, v)
}

fn write_family(dir: &Path, name: &str, v: &Value) -> String {
    let path = dir.join(name);
    std::fs::write(&path, v.to_string()).unwrap();
    path.to_str().unwrap().to_string()
}

fn squares() -> Value {
    json!({"n": 1, "m": 1, "polys": [
        {"arity": 2, "terms": [{"exps": [1, 0], "coef": "1"}, {"exps": [0, 2], "coef": "-1"}]}
    ]})
}

#[test]
fn gamma_example() {
    let v = ok("gamma", &["gamma", "--p", "3", "--tau", "1,1", "--t", "+", "--x", "2"]);
    assert_eq!(v, json!({"value": "2/35", "valuation": 0, "case": "ResRootPos"}));
    let v = ok("gamma", &["gamma", "--p", "5", "--tau", "2,1", "--t", "-", "--x", "-7/25", "--predict"]);
    assert_eq!(v["agree"], json!(true));
}

#[test]
fn gamma_input_errors() {
    assert_eq!(err(&["gamma", "--p", "4", "--x", "1"]).0, 2);
    assert_eq!(err(&["gamma", "--p", "3", "--x", "1/0"]).0, 2);
    assert_eq!(err(&["gamma", "--p", "3", "--tau", "0,1", "--x", "1"]).0, 2);
    let out = run(&["gamma", "--p", "3", "--x", "1", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn rings_member_verdicts() {
    let v = ok("rings-member", &["rings", "member", "--p", "3", "--n", "1", "--x", "1/3"]);
    assert_eq!(v["verdict"], "NonMember");
    assert_eq!(v["obstruction"]["kind"], "p_valuation");

    // The constant polynomial 1 with t = -3 gives 1/(1 - 3) = -1/2, so 1/2 is
    // a root of the monic relation X - 1/2 and no 2-adic obstruction exists.
    let v = ok("rings-member", &["rings", "member", "--p", "3", "--n", "1", "--x", "1/2", "--height", "5"]);
    assert_eq!(v["verdict"], "Member");
    assert_eq!(v["witness"]["t"], "-3");

    let v = ok("rings-member", &["rings", "member", "--p", "3", "--n", "1", "--x", "-2/35"]);
    assert_eq!(v["verdict"], "Member");
}

#[test]
fn pi_lower_bound_certificate() {
    let v = ok("pi-lower-bound", &["rings", "pi-lower-bound", "--n", "1", "--samples", "50", "--seed", "3"]);
    assert_eq!(v["report"]["all_pass"], json!(true));
    let ell = v["certificate"]["ell"].as_u64().unwrap();
    let p = v["certificate"]["p"].as_u64().unwrap();
    assert!(p > ell && (p - 1).is_multiple_of(ell - 1));
}

#[test]
fn budget_flag_and_env() {
    let (code, _) = err(&["--budget", "3", "rings", "pi-lower-bound", "--n", "2"]);
    assert_eq!(code, 3);
    let out = bin()
        .env("KOCHENLAB_BUDGET", "3")
        .args(["rings", "pi-lower-bound", "--n", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let out = bin()
        .env("KOCHENLAB_BUDGET", "lots")
        .args(["rings", "pi-lower-bound", "--n", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dioph_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let sq = write_family(dir.path(), "sq.json", &squares());

    let v = ok("dioph-eval", &["dioph", "eval", &sq, "--q", "7"]);
    assert_eq!(v["points"], json!([[0], [1], [2], [4]]));

    for op in ["union", "intersect", "product"] {
        let v = ok("dioph-family", &["dioph", op, &sq, &sq]);
        let expected_n = if op == "product" { 2 } else { 1 };
        assert_eq!(v["n"], json!(expected_n), "{op}");
    }

    // x ↦ x + 1 sends squares mod 7 to {1, 2, 3, 5}.
    let image = ok("dioph-family", &["dioph", "image", &sq, "--map", "X1+1"]);
    let image_path = write_family(dir.path(), "image.json", &image);
    let v = ok("dioph-eval", &["dioph", "eval", &image_path, "--q", "7"]);
    assert_eq!(v["points"], json!([[1], [2], [3], [5]]));

    let prod = ok("dioph-family", &["dioph", "product", &sq, &image_path]);
    let prod_path = write_family(dir.path(), "prod.json", &prod);
    let sec = ok("dioph-family", &["dioph", "section", &prod_path, "--values", "2"]);
    let sec_path = write_family(dir.path(), "sec.json", &sec);
    let v = ok("dioph-eval", &["dioph", "eval", &sec_path, "--q", "7"]);
    assert_eq!(v["points"], json!([[0], [1], [2], [4]]));

    let w = ok("dioph-family", &["dioph", "weil", &sq, "--k", "2"]);
    assert_eq!(w["n"], json!(3));

    assert_eq!(err(&["dioph", "section", &sq, "--values", "1"]).0, 2);
    assert_eq!(err(&["dioph", "eval", &dir.path().join("missing.json").to_string_lossy(), "--q", "5"]).0, 2);
}

#[test]
fn dioph_reads_stdin() {
    use std::io::Write;
    use std::process::Stdio;
    let mut child = bin()
        .args(["dioph", "eval", "-", "--q", "5"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(squares().to_string().as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["points"], json!([[0], [1], [4]]));
}

#[test]
fn dioph_compiled_families() {
    let v = ok("dioph-compile-r", &["dioph", "compile-r", "--p", "3", "--n", "1", "--x", "2/35"]);
    assert_eq!(v["membership"]["verdict"], "Member");
    let v = ok("dioph-compile-r", &["dioph", "compile-r", "--p", "3", "--n", "1", "--x", "1/3"]);
    assert_eq!(v["membership"]["verdict"], "NonMember");
    let v = ok("dioph-compile-holo", &["dioph", "compile-holo", "--p", "3", "--n-prime", "1", "--x", "2", "--a", "1"]);
    assert_eq!(v["size"]["n"], json!(2));
    assert_eq!(err(&["dioph", "compile-holo", "--p", "3", "--n-prime", "1", "--x", "2"]).0, 2);
}

#[test]
fn brauer_commands() {
    let v = ok("brauer-symbols", &["brauer", "symbols", "--a", "-1", "--b", "-1"]);
    assert_eq!(v["ramification"], json!([2, "real"]));
    let v = ok("brauer-construct", &["brauer", "construct", "--p", "5", "--q1", "2", "--q2", "13"]);
    assert_eq!(v["a_ramification"], json!([2, 5]));
    assert_eq!(v["b_ramification"], json!([5, 13]));
    let v = ok("brauer-prescribe", &["brauer", "prescribe", "--ell", "2", "--inv", "2:1/2,real:1/2"]);
    assert_eq!(v["invariants"].as_array().unwrap().len(), 2);
    assert_eq!(err(&["brauer", "prescribe", "--ell", "2", "--inv", "2:1/2"]).0, 2);
    let v = ok("brauer-sample-t", &["brauer", "sample-t", "--a", "-1", "--b", "-1", "--height", "2"]);
    assert_eq!(v["norm_one_count"], json!(24));
    let v = ok("brauer-d-member", &["brauer", "d-member", "--p", "5", "--q1", "2", "--q2", "13", "--x", "1/5"]);
    assert_eq!(v["membership"]["verdict"], "NonMember");
    assert_eq!(err(&["brauer", "construct", "--p", "5", "--q1", "5", "--q2", "13"]).0, 2);
}

#[test]
fn nf_commands() {
    let v = ok("nf-primes", &["nf", "primes", "--h", "T^2+1", "--p", "5"]);
    assert_eq!(v["sum_ef"], json!(2));
    assert_eq!(v["primes"].as_array().unwrap().len(), 2);
    let v = ok("nf-primes", &["nf", "primes", "--h", "T^2+1", "--p", "2"]);
    assert_eq!(v["primes"][0]["e"], json!(2));
    let v = ok("nf-val", &["nf", "val", "--h", "T^2+1", "--p", "5", "--elem", "T+2"]);
    let vals: Vec<&Value> = v["valuations"].as_array().unwrap().iter().map(|r| &r["valuation"]).collect();
    assert_eq!(vals, [&json!(1), &json!(0)]);
    let v = ok("nf-kill-check", &["nf", "kill-check", "--p", "2", "--tau", "1,1", "--a", "1"]);
    assert_eq!(v["agree"], json!(true));
}

#[test]
fn verify_suites() {
    let v = ok("verify", &["verify", "--suite", "kochen", "--seed", "7"]);
    assert_eq!(v["pass"], json!(true));
    let v = ok("verify", &["verify", "--seed", "2", "--samples", "50", "--families", "4"]);
    let names: Vec<&str> = v["suites"].as_array().unwrap().iter().map(|s| s["suite"].as_str().unwrap()).collect();
    assert_eq!(names, ["kochen", "pyth", "dioph", "weil", "brauer", "numberfield", "cross"]);
    assert_eq!(err(&["verify", "--suite", "nope"]).0, 2);
}

#[test]
fn output_is_deterministic() {
    let args = ["verify", "--suite", "dioph", "--seed", "11", "--families", "5"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
    let seq: Vec<&str> = std::iter::once("--sequential").chain(args).collect();
    assert_eq!(run(&seq).stdout, run(&args).stdout);
}

#[test]
fn table_format() {
    let out = run(&["--format", "table", "gamma", "--p", "3", "--x", "2"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("value") && l.ends_with("2/35")));
}
