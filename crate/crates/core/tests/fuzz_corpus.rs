//! Replays the checked-in fuzz corpus through the fuzz target bodies, so
//! the seeds stay panic-free on stable without libFuzzer.

use std::path::{Path, PathBuf};

use joindeg_core::field::FieldSpec;
use joindeg_core::instance::InstanceFile;
use joindeg_core::poly::{parse_form, parse_poly};

fn corpus(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            let bytes = std::fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "empty corpus {}", dir.display());
    out
}

#[test]
fn parse_poly_corpus() {
    let mut parsed = 0;
    for (_, data) in corpus("parse_poly") {
        let Some((&n, rest)) = data.split_first() else { continue };
        let Ok(text) = std::str::from_utf8(rest) else { continue };
        let nvars = 1 + usize::from(n % 4);
        if parse_poly(text, nvars).is_ok() {
            parsed += 1;
            let _ = parse_form(text, nvars, FieldSpec::rationals());
            let _ = parse_form(text, nvars, FieldSpec::prime(31).unwrap());
        }
    }
    assert!(parsed > 0);
}

#[test]
fn parse_instance_corpus() {
    let mut built = 0;
    for (path, data) in corpus("parse_instance") {
        let Ok(text) = std::str::from_utf8(&data) else { continue };
        if let Ok(file) = InstanceFile::from_json(text) {
            let again = InstanceFile::from_json(&file.to_json_pretty()).expect("round trip");
            assert_eq!(again, file, "{}", path.display());
            if file.build().is_ok() {
                built += 1;
            }
        }
    }
    assert!(built > 0);
}

// A cheap stand-in for a libFuzzer run: random strings over the parser's
// alphabet must never panic.
#[test]
fn parse_poly_random_text() {
    use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
    let config = Config {
        cases: 4096,
        failure_persistence: None,
        ..Config::default()
    };
    let rng = TestRng::deterministic_rng(RngAlgorithm::ChaCha);
    let mut runner = TestRunner::new_with_rng(config, rng);
    runner
        .run(&("[s0-9+*^() -]{0,40}", 1usize..4), |(text, nvars)| {
            if parse_poly(&text, nvars).is_ok() {
                let _ = parse_form(&text, nvars, FieldSpec::prime(7).unwrap());
            }
            Ok(())
        })
        .unwrap();
}
