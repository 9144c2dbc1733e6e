use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_joindeg"));
    c.env_remove("JOINDEG_SEED");
    c
}

fn instance(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../instances").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}); stderr: {}", String::from_utf8_lossy(&out.stderr))
    })
}

fn scrub(v: &mut Value) {
    match v {
        Value::Object(m) => {
            m.remove("timings_ms");
            m.values_mut().for_each(scrub);
        }
        Value::Array(a) => a.iter_mut().for_each(scrub),
        _ => {}
    }
}

#[test]
fn analyze_skew_lines() {
    let p = instance("skew-lines.json");
    let out = run(&["analyze", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["command"], "analyze");
    let c = &r["report"]["census"];
    assert_eq!(c["status"], "ok");
    assert_eq!(c["value"]["deg_pi"], 1);
    assert_eq!(r["report"]["degree"]["value"]["degree"], 1);
}

#[test]
fn analyze_twisted_cubic() {
    let p = instance("twisted-cubic-secant.json");
    let r = json(&run(&["analyze", p.to_str().unwrap()]));
    let c = &r["report"]["census"]["value"];
    assert_eq!((c["m_x"].as_u64(), c["m_y"].as_u64()), (Some(2), Some(2)));
    assert_eq!((c["b"].as_u64(), c["deg_pi"].as_u64()), (Some(1), Some(4)));
}

#[test]
fn malformed_input_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ \"schema\": 1,").unwrap();
    let out = run(&["analyze", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());

    let text = std::fs::read_to_string(instance("skew-lines.json")).unwrap();
    let mut v: Value = serde_json::from_str(&text).unwrap();
    v["colour"] = Value::from(3);
    std::fs::write(&bad, v.to_string()).unwrap();
    let out = run(&["analyze", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));

    let missing = dir.path().join("nope.json");
    assert_eq!(run(&["analyze", missing.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(run(&["analyze"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn oracle_prime_must_be_prime() {
    let p = instance("twisted-cubic-secant.json");
    let out = run(&["oracle", p.to_str().unwrap(), "--prime", "4"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn oracle_twisted_cubic_fibres() {
    let p = instance("twisted-cubic-secant.json");
    let out = run(&["oracle", p.to_str().unwrap(), "--prime", "31"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let cs = r["censuses"]["value"].as_array().unwrap();
    assert_eq!(cs.len(), 5);
    assert!(cs.iter().all(|c| c["fiber"] == 4 && c["b"] == 1), "{cs:?}");
    assert_eq!(r["dimension"]["value"]["dim"], 3);
}

#[test]
fn oracle_char2_conic_dimension() {
    let p = instance("char2-conic.json");
    let out = run(&["oracle", p.to_str().unwrap(), "--prime", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["dimension"]["value"]["dim"], 2);
}

#[test]
fn crosscheck_agrees_on_rational_instances() {
    for name in ["skew-lines.json", "twisted-cubic-secant.json", "conic-line-f31.json"] {
        let p = instance(name);
        let out = run(&["crosscheck", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{name}");
        let r = json(&out);
        assert_eq!(r["verdict"], "AGREE", "{name}");
        assert!(r["failing"].is_null(), "{name}");
    }
}

// No rational join point over F5 is general for this pair, so the census
// section errors and the command exits with the section-error code.
#[test]
fn crosscheck_without_general_point_is_a_section_error() {
    let p = instance("char5-constrained.json");
    let out = run(&["crosscheck", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["verdict"], "ERROR");
}

#[test]
fn seed_precedence() {
    let p = instance("skew-lines.json");
    let seed_of = |out: Output| json(&out)["instance"]["seed"].as_u64().unwrap();
    let env = bin()
        .args(["analyze", p.to_str().unwrap()])
        .env("JOINDEG_SEED", "99")
        .output()
        .unwrap();
    assert_eq!(seed_of(env), 99);
    let both = bin()
        .args(["analyze", p.to_str().unwrap(), "--seed", "5"])
        .env("JOINDEG_SEED", "99")
        .output()
        .unwrap();
    assert_eq!(seed_of(both), 5);
    let bad = bin()
        .args(["analyze", p.to_str().unwrap()])
        .env("JOINDEG_SEED", "minus one")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn json_out_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.json");
    let p = instance("conic-line.json");
    let out = bin()
        .args(["analyze", p.to_str().unwrap(), "--seed", "12", "--json-out"])
        .arg(&first)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&first).unwrap()).unwrap();
    assert_eq!(written, json(&out));

    // the embedded instance alone reproduces the report
    let replay = dir.path().join("replay.json");
    std::fs::write(&replay, written["instance"].to_string()).unwrap();
    let again = run(&["analyze", replay.to_str().unwrap()]);
    assert_eq!(again.status.code(), Some(0));
    let (mut a, mut b) = (written, json(&again));
    scrub(&mut a);
    scrub(&mut b);
    assert_eq!(a, b);
}
